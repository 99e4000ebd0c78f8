use coupling_lab::coupling::CouplingModel;
use coupling_lab::oracle::{exact_with_replacement, exact_without_replacement, ExactPopulation};
use coupling_lab::population::Population;
use coupling_lab::stats::{
    collect, convex_function_test, default_convex_functions, marginal_gof_test, martingale_test,
};

fn main() {
    let pop = Population::from_values(vec![0.0, 1.0, 2.0]).unwrap();
    let exact = ExactPopulation::from_decimal_strs(&["0", "1", "2"]).unwrap();
    let expected_s = exact_without_replacement(&exact, 2).unwrap();
    let expected_t = exact_with_replacement(&exact, 2).unwrap();
    let mut found = 0;
    for seed in 0..40000u64 {
        let emp = collect(&pop, &CouplingModel::Replacement, 2, 1000, seed).unwrap();
        let m = martingale_test(&emp);
        let g = marginal_gof_test(&emp, &expected_s, &expected_t).unwrap();
        let c = convex_function_test(&emp, &default_convex_functions(&emp));
        if !(m.passed && g.passed && c.passed) {
            println!(
                "seed {seed}: martingale={} gof={} convex={}",
                m.passed, g.passed, c.passed
            );
            found += 1;
            if found >= 10 {
                break;
            }
        }
    }
    eprintln!("done");
}
