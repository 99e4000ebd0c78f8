use clap::Parser;

fn main() {
    let cli = coupling_lab::cli::Cli::parse();
    std::process::exit(coupling_lab::cli::run(cli));
}
