//! Exact rational-arithmetic ground truth for the coupling processes.
//!
//! Population values are ingested as decimal strings or integers (never as
//! floats) so that every probability, conditional expectation, and tail in
//! this module is literally exact.

mod checks;
mod dist;
mod enumerate;
mod tails;

pub use checks::{
    check_martingale, convex_order_check, expectation_f64, hinge_expectation, mgf_ordering_check,
    run_joint_checks, ConvexOrderReport, JointChecks, MartingaleReport, MgfOrderingReport, MgfRow,
    DEFAULT_U_GRID, MGF_REL_TOLERANCE,
};
pub use dist::{
    dist_to_string, parse_decimal, rational_to_f64, render_decimal, Dist, ExactPopulation,
    JointDist, JointSupportEntry, Rational,
};
pub use enumerate::{
    enumerate_joint, enumerate_joint_with_budget, exact_kfold_sample, exact_surreplacement_sample,
    exact_with_replacement, exact_without_replacement, ENUMERATION_BUDGET,
};
pub use tails::{binom_tail, binomial_coefficient, binomial_dist, hypergeom_tail, hypergeometric_dist};

use crate::coupling::CouplingModel;
use crate::Result;

/// Exact marginal law of the model's T-side sum.
pub fn exact_t_marginal(pop: &ExactPopulation, model: &CouplingModel, n: usize) -> Result<Dist> {
    match *model {
        CouplingModel::Replacement => exact_with_replacement(pop, n),
        CouplingModel::KFold { k } => exact_kfold_sample(pop, k, n),
        CouplingModel::Surreplacement { d } => exact_surreplacement_sample(pop, d, n),
    }
}
