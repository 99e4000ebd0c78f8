//! Martingale couplings between finite-population sampling schemes.
//!
//! A population of `N` real values can be sampled without replacement, with
//! replacement, from its `k`-fold multiplication, or with "surreplacement"
//! (each draw is returned together with `d - 1` fresh copies). For each of
//! the latter three schemes there is an explicit two-urn coupling that pins
//! the without-replacement sum `S_n` to the scheme's sum `T_n` so that
//! `E[T_n | S_n] = S_n`. This crate provides
//!
//! - [`coupling`]: seeded simulation of one coupled trajectory per scheme,
//! - [`oracle`]: exact rational-arithmetic enumeration of the same processes
//!   plus exact marginal laws, tail probabilities, and convex-order checks,
//! - [`stats`]: Monte Carlo estimators and hypothesis tests for instance
//!   sizes beyond exact enumeration,
//! - [`bounds`]: Chernoff machinery for the binomial tail and its transfer
//!   to the hypergeometric tail,
//! - [`cli`]: the command-line front end (`simulate`, `verify`, `bounds`,
//!   `oracle`).

pub mod bounds;
pub mod cli;
pub mod coupling;
pub mod oracle;
pub mod population;
pub mod rng;
pub mod stats;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Population construction rejected (empty, non-finite entries, ...).
    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    /// Operation parameters outside their domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Exact enumeration would exceed the branch budget.
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    /// Empirical data contains a value the expected law assigns probability zero.
    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    /// Numerical evaluation left the function's domain (non-finite MGF, ...).
    #[error("domain error: {0}")]
    DomainError(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use coupling::{run_kfold, run_replacement, run_surreplacement, CouplingModel, Trajectory};
pub use population::Population;
pub use rng::RngStream;
