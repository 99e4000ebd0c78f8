//! Exact property checks on enumerated laws.

use num::{Signed, Zero};
use serde::Serialize;

use super::dist::{rational_to_f64, render_decimal, Dist, JointDist, Rational};

/// Result of the exact conditional-expectation check E[T | S = s] = s.
#[derive(Debug, Clone)]
pub struct MartingaleReport {
    /// Per-s rows: (s, E[T | S = s]).
    pub rows: Vec<(Rational, Rational)>,
    pub max_deviation: Rational,
    pub passed: bool,
}

/// For every s in the support of S, computes E[T | S = s] exactly and
/// reports the largest |E[T | S = s] - s|. Passes only on deviation zero.
pub fn check_martingale(joint: &JointDist) -> MartingaleReport {
    let mut rows = Vec::new();
    let mut max_deviation = Rational::zero();
    for (s, p_s) in joint.marginal_s().iter() {
        let mut conditional = Rational::zero();
        for ((js, jt), p) in joint.iter() {
            if js == s {
                conditional += jt * p;
            }
        }
        conditional /= p_s;
        let deviation = (conditional.clone() - s).abs();
        if deviation > max_deviation {
            max_deviation = deviation;
        }
        rows.push((s.clone(), conditional));
    }
    let passed = max_deviation.is_zero();
    MartingaleReport { rows, max_deviation, passed }
}

/// Exact E[(R - a)_+].
pub fn hinge_expectation(dist: &Dist, a: &Rational) -> Rational {
    dist.iter()
        .filter(|(v, _)| *v > a)
        .map(|(v, p)| (v - a) * p)
        .sum()
}

/// Result of the finite-support convex-order check.
#[derive(Debug, Clone)]
pub struct ConvexOrderReport {
    pub mean_s: Rational,
    pub mean_t: Rational,
    /// Per-hinge rows: (a, E[(S-a)_+], E[(T-a)_+]).
    pub rows: Vec<(Rational, Rational, Rational)>,
    /// Largest positive excess of the S-hinge over the T-hinge (zero when
    /// the order holds).
    pub max_violation: Rational,
    pub passed: bool,
}

/// Convex domination on finite supports: equal means plus the hinge
/// inequality E[(S-a)_+] <= E[(T-a)_+] at every a in either support.
pub fn convex_order_check(dist_s: &Dist, dist_t: &Dist) -> ConvexOrderReport {
    let mean_s = dist_s.mean();
    let mean_t = dist_t.mean();
    let mut grid: Vec<Rational> = dist_s.iter().map(|(v, _)| v.clone()).collect();
    grid.extend(dist_t.iter().map(|(v, _)| v.clone()));
    grid.sort();
    grid.dedup();

    let mut rows = Vec::with_capacity(grid.len());
    let mut max_violation = Rational::zero();
    for a in grid {
        let hs = hinge_expectation(dist_s, &a);
        let ht = hinge_expectation(dist_t, &a);
        if hs > ht {
            let violation = hs.clone() - &ht;
            if violation > max_violation {
                max_violation = violation;
            }
        }
        rows.push((a, hs, ht));
    }
    let passed = mean_s == mean_t && max_violation.is_zero();
    ConvexOrderReport { mean_s, mean_t, rows, max_violation, passed }
}

/// One grid point of the MGF ordering check.
#[derive(Debug, Clone, Serialize)]
pub struct MgfRow {
    pub u: f64,
    pub mgf_s: f64,
    pub mgf_t: f64,
    /// Relative margin (mgf_t - mgf_s) / mgf_t; negative means a violation.
    pub rel_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MgfOrderingReport {
    pub rows: Vec<MgfRow>,
    pub rel_tolerance: f64,
    pub passed: bool,
}

/// Relative tolerance for the floating-point MGF comparison.
pub const MGF_REL_TOLERANCE: f64 = 1e-12;

/// Checks M_S(u) <= M_T(u) at each grid point, in floating point with a
/// relative tolerance (the exact content is covered by the hinge checks).
pub fn mgf_ordering_check(dist_s: &Dist, dist_t: &Dist, u_grid: &[f64]) -> MgfOrderingReport {
    let mut rows = Vec::with_capacity(u_grid.len());
    let mut passed = true;
    for &u in u_grid {
        let mgf_s = dist_s.mgf_f64(u);
        let mgf_t = dist_t.mgf_f64(u);
        let rel_margin = (mgf_t - mgf_s) / mgf_t;
        if mgf_s > mgf_t + MGF_REL_TOLERANCE * mgf_t {
            passed = false;
        }
        rows.push(MgfRow { u, mgf_s, mgf_t, rel_margin });
    }
    MgfOrderingReport { rows, rel_tolerance: MGF_REL_TOLERANCE, passed }
}

/// Check summary embedded in oracle JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct JointChecks {
    pub martingale_max_deviation: String,
    pub martingale_passed: bool,
    pub marginal_s_matches: bool,
    pub marginal_t_matches: bool,
    pub convex_order_passed: bool,
    pub mgf_ordering_passed: bool,
}

/// Default grid for MGF ordering checks.
pub const DEFAULT_U_GRID: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];

/// Runs every embedded check of an enumerated joint law against the exact
/// marginal laws of its model.
pub fn run_joint_checks(joint: &JointDist, expected_s: &Dist, expected_t: &Dist) -> JointChecks {
    let martingale = check_martingale(joint);
    let convex = convex_order_check(joint.marginal_s(), joint.marginal_t());
    let mgf = mgf_ordering_check(joint.marginal_s(), joint.marginal_t(), &DEFAULT_U_GRID);
    JointChecks {
        martingale_max_deviation: render_decimal(&martingale.max_deviation),
        martingale_passed: martingale.passed,
        marginal_s_matches: joint.marginal_s() == expected_s,
        marginal_t_matches: joint.marginal_t() == expected_t,
        convex_order_passed: convex.passed,
        mgf_ordering_passed: mgf.passed,
    }
}

/// Convenience for reporting: f64 view of an exact expectation.
pub fn expectation_f64(dist: &Dist) -> f64 {
    rational_to_f64(&dist.mean())
}
