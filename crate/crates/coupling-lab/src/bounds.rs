//! Chernoff tail bounds for the binomial sum and their transfer to the
//! hypergeometric sum.
//!
//! The closed-form binomial bound for P(T_n >= (p+q)n) is
//! `((p/(p+q))^(p+q) ((1-p)/(1-p-q))^(1-p-q))^n`, with the convention that a
//! factor with exponent zero contributes one. Because the MGF of the
//! without-replacement sum is dominated by the with-replacement MGF, the
//! identical numeric bound applies to the hypergeometric tail. All bound
//! arithmetic happens in log space; we exponentiate last.

use num::bigint::BigInt;
use num::{One, Zero};
use serde::Serialize;

use crate::oracle::{
    binom_tail, binomial_dist, hypergeom_tail, hypergeometric_dist, mgf_ordering_check,
    rational_to_f64, render_decimal, Rational, DEFAULT_U_GRID,
};
use crate::{Error, Result};

/// An optimized Chernoff exponent and the bound it certifies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChernoffResult {
    /// Optimizing exponent parameter (infinity when the optimum sits at the
    /// p+q = 1 boundary).
    pub u_star: f64,
    /// Natural log of the bound.
    pub log_bound: f64,
    /// The bound itself, in [0, 1].
    pub bound: f64,
    /// Set when p + q > 1 makes the tail event impossible; the bound is then
    /// reported as zero rather than an error.
    pub tail_empty: bool,
}

impl ChernoffResult {
    fn from_log(u_star: f64, log_bound: f64) -> Self {
        let log_bound = log_bound.min(0.0);
        Self { u_star, log_bound, bound: log_bound.exp(), tail_empty: false }
    }

    fn empty_tail() -> Self {
        Self { u_star: f64::INFINITY, log_bound: f64::NEG_INFINITY, bound: 0.0, tail_empty: true }
    }
}

/// Parameters of the binomial tail P(T_n >= (p+q)n).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BinomialParams {
    pub n: u64,
    /// Single-trial success probability.
    pub p: f64,
    /// Tail offset: the bound covers deviations of at least q*n above the mean.
    pub q: f64,
}

/// MGF of the binomial sum, `(p e^u + 1 - p)^n`, evaluated via
/// `exp(n ln1p(p (e^u - 1)))` to stay accurate near u = 0.
pub fn mgf_binomial(n: u64, p: f64, u: f64) -> f64 {
    (n as f64 * (p * u.exp_m1()).ln_1p()).exp()
}

/// Minimizes `e^(-u w) mgf(u)` over u in [0, u_max] by ternary search on the
/// convex log objective; the bound is clipped at 1 (u = 0 always certifies 1).
pub fn chernoff_generic(mgf: impl Fn(f64) -> f64, w: f64, u_max: f64) -> Result<ChernoffResult> {
    if !(u_max > 0.0) {
        return Err(Error::InvalidArgument(format!("u_max={u_max} must be positive")));
    }
    let objective = |u: f64| -> Result<f64> {
        let m = mgf(u);
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::DomainError(format!("mgf({u}) = {m} is not finite and positive")));
        }
        Ok(-u * w + m.ln())
    };

    let mut lo = 0.0_f64;
    let mut hi = u_max;
    objective(lo)?;
    objective(hi)?;
    while hi - lo > 1e-12 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1)? <= objective(m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let u_mid = 0.5 * (lo + hi);
    let g_mid = objective(u_mid)?;
    let g_zero = objective(0.0)?;
    // Prefer the boundary when it is at least as good; a constant objective
    // (point mass at w) then reports u_star = 0.
    if g_zero <= g_mid {
        Ok(ChernoffResult::from_log(0.0, g_zero))
    } else {
        Ok(ChernoffResult::from_log(u_mid, g_mid))
    }
}

/// Closed-form minimized Chernoff bound for the binomial upper tail.
pub fn chernoff_binomial_closed(params: &BinomialParams) -> Result<ChernoffResult> {
    let BinomialParams { n, p, q } = *params;
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("p={p} and q={q} must lie in [0, 1]")));
    }
    let pq = p + q;
    if pq > 1.0 {
        return Ok(ChernoffResult::empty_tail());
    }
    // Factors with exponent zero contribute nothing to the log.
    let first = if pq == 0.0 {
        0.0
    } else if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        pq * (p / pq).ln()
    };
    let rest = 1.0 - pq;
    let second = if rest <= 0.0 { 0.0 } else { rest * ((1.0 - p) / rest).ln() };
    let log_bound = n as f64 * (first + second);

    let u_star = if q == 0.0 {
        0.0
    } else if pq >= 1.0 || p == 0.0 {
        f64::INFINITY
    } else {
        (pq * (1.0 - p) / (rest * p)).ln()
    };
    Ok(ChernoffResult::from_log(u_star, log_bound))
}

/// The binomial bound asserted for the hypergeometric tail
/// P(S_n >= (p+q)n) with p = a/(a+b).
pub fn hypergeometric_transfer_bound(a: u64, b: u64, n: u64, q: f64) -> Result<ChernoffResult> {
    check_urn(a, b, n)?;
    if q < 0.0 {
        return Err(Error::InvalidArgument(format!("q={q} must be nonnegative")));
    }
    let p = a as f64 / (a + b) as f64;
    chernoff_binomial_closed(&BinomialParams { n, p, q: q.min(1.0) })
}

fn check_urn(a: u64, b: u64, n: u64) -> Result<()> {
    if a + b == 0 {
        return Err(Error::InvalidArgument("urn must contain at least one ball".into()));
    }
    if n == 0 || n > a + b {
        return Err(Error::InvalidArgument(format!(
            "draws n={n} must satisfy 1 <= n <= a+b={}",
            a + b
        )));
    }
    Ok(())
}

/// One exact-versus-bound comparison at threshold w = ceil((p+q)n).
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub a: u64,
    pub b: u64,
    pub n: u64,
    /// The tail offset as supplied, rendered exactly.
    pub q: String,
    pub p: f64,
    /// Integer tail threshold ceil((p+q)n), computed in exact arithmetic.
    pub w: u64,
    pub hyper_exact: f64,
    pub binom_exact: f64,
    pub chernoff_bound: f64,
    /// Both exact tails fall below the bound (within 1e-12).
    pub chernoff_valid: bool,
    /// The hypergeometric MGF stays below the binomial MGF on the u grid.
    pub mgf_ordered: bool,
}

/// Absolute slack allowed when comparing exact tails against the bound.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Computes the exact hypergeometric and binomial tails at w = ceil((p+q)n)
/// together with the closed-form bound, checks both tails against the bound,
/// and checks the MGF ordering that justifies the transfer.
pub fn compare_tails(a: u64, b: u64, n: u64, q: &Rational) -> Result<ComparisonRow> {
    check_urn(a, b, n)?;
    if q < &Rational::zero() || q > &Rational::one() {
        return Err(Error::InvalidArgument(format!("q={q} must lie in [0, 1]")));
    }
    let p_exact = Rational::new(BigInt::from(a), BigInt::from(a + b));
    let threshold = (p_exact.clone() + q) * Rational::from(BigInt::from(n));
    let w_exact = threshold.ceil();

    let hyper_exact = rational_to_f64(&hypergeom_tail(a, b, n, &w_exact)?);
    let binom_exact = rational_to_f64(&binom_tail(n, &p_exact, &w_exact)?);

    let p = rational_to_f64(&p_exact);
    let sum = p_exact + q;
    let bound = if sum > Rational::one() {
        ChernoffResult::empty_tail()
    } else if sum == Rational::one() {
        // Force the exact p+q = 1 branch of the closed form.
        chernoff_binomial_closed(&BinomialParams { n, p, q: 1.0 - p })?
    } else {
        chernoff_binomial_closed(&BinomialParams { n, p, q: rational_to_f64(q) })?
    };

    let dist_s = hypergeometric_dist(a, b, n)?;
    let dist_t = binomial_dist(n, &Rational::new(BigInt::from(a), BigInt::from(a + b)))?;
    let mgf = mgf_ordering_check(&dist_s, &dist_t, &DEFAULT_U_GRID);

    let w = u64::try_from(w_exact.to_integer().max(BigInt::zero())).expect("threshold fits u64");
    Ok(ComparisonRow {
        a,
        b,
        n,
        q: render_decimal(q),
        p,
        w,
        hyper_exact,
        binom_exact,
        chernoff_bound: bound.bound,
        chernoff_valid: hyper_exact <= bound.bound + TAIL_TOLERANCE
            && binom_exact <= bound.bound + TAIL_TOLERANCE,
        mgf_ordered: mgf.passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn mgf_binomial_values() {
        assert_eq!(mgf_binomial(10, 0.3, 0.0), 1.0);
        assert_eq!(mgf_binomial(5, 0.0, 2.0), 1.0);
        let v = mgf_binomial(1, 0.5, 3.0_f64.ln());
        assert!((v - 2.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn generic_bound_is_one_below_the_mean() {
        // w below the mean np: slope at u = 0 is positive, optimum at 0.
        let r = chernoff_generic(|u| mgf_binomial(10, 0.5, u), 4.0, 8.0).unwrap();
        assert_eq!(r.u_star, 0.0);
        assert_eq!(r.bound, 1.0);
    }

    #[test]
    fn generic_bound_point_mass() {
        // Point mass at c with w = c: objective is identically zero.
        let c = 3.0;
        let r = chernoff_generic(|u| (u * c).exp(), c, 4.0).unwrap();
        assert_eq!(r.u_star, 0.0);
        assert_eq!(r.bound, 1.0);
    }

    #[test]
    fn generic_matches_closed_form() {
        let closed = chernoff_binomial_closed(&BinomialParams { n: 10, p: 0.5, q: 0.2 }).unwrap();
        let generic = chernoff_generic(|u| mgf_binomial(10, 0.5, u), 7.0, 8.0).unwrap();
        let rel = (closed.bound - generic.bound).abs() / closed.bound;
        assert!(rel < 1e-10, "closed {} vs generic {}", closed.bound, generic.bound);
        assert!((closed.u_star - (7.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_edges() {
        // q = 0: both factors are 1.
        let r = chernoff_binomial_closed(&BinomialParams { n: 10, p: 0.3, q: 0.0 }).unwrap();
        assert_eq!(r.bound, 1.0);
        assert_eq!(r.u_star, 0.0);
        // p + q = 1: bound is p^n, exactly the point tail, u_star infinite.
        let r = chernoff_binomial_closed(&BinomialParams { n: 2, p: 0.5, q: 0.5 }).unwrap();
        assert!((r.bound - 0.25).abs() < 1e-15);
        assert!(r.u_star.is_infinite());
        // p + q > 1: impossible event.
        let r = chernoff_binomial_closed(&BinomialParams { n: 2, p: 0.8, q: 0.5 }).unwrap();
        assert!(r.tail_empty);
        assert_eq!(r.bound, 0.0);
        // p = 0 with q > 0: the tail is empty as well but the formula stands.
        let r = chernoff_binomial_closed(&BinomialParams { n: 3, p: 0.0, q: 0.5 }).unwrap();
        assert_eq!(r.bound, 0.0);
        assert!(chernoff_binomial_closed(&BinomialParams { n: 1, p: -0.1, q: 0.0 }).is_err());
        assert!(chernoff_binomial_closed(&BinomialParams { n: 1, p: 0.5, q: 1.5 }).is_err());
    }

    #[test]
    fn transfer_bound_is_the_binomial_bound() {
        let transfer = hypergeometric_transfer_bound(2, 2, 2, 0.5).unwrap();
        assert!((transfer.bound - 0.25).abs() < 1e-15);
        let same_p = chernoff_binomial_closed(&BinomialParams { n: 2, p: 0.5, q: 0.5 }).unwrap();
        assert_eq!(transfer.bound, same_p.bound);
        assert!(hypergeometric_transfer_bound(0, 0, 1, 0.1).is_err());
        assert!(hypergeometric_transfer_bound(2, 2, 5, 0.1).is_err());
    }

    #[test]
    fn compare_tails_urn_2_2() {
        let row = compare_tails(2, 2, 2, &rat(1, 2)).unwrap();
        assert_eq!(row.w, 2);
        assert!((row.hyper_exact - 1.0 / 6.0).abs() < 1e-15);
        assert!((row.binom_exact - 0.25).abs() < 1e-15);
        assert!((row.chernoff_bound - 0.25).abs() < 1e-15);
        assert!(row.chernoff_valid);
        assert!(row.mgf_ordered);
    }

    #[test]
    fn compare_tails_q_zero() {
        let row = compare_tails(10, 10, 5, &rat(0, 1)).unwrap();
        assert_eq!(row.chernoff_bound, 1.0);
        assert!(row.hyper_exact <= 1.0 && row.binom_exact <= 1.0);
        assert!(row.chernoff_valid);
    }

    #[test]
    fn compare_tails_degenerate_urn() {
        // All-red urn: p = 1, only q = 0 keeps p + q <= 1.
        let row = compare_tails(3, 0, 2, &rat(0, 1)).unwrap();
        assert_eq!(row.w, 2);
        assert_eq!(row.hyper_exact, 1.0);
        assert_eq!(row.binom_exact, 1.0);
        assert_eq!(row.chernoff_bound, 1.0);
        assert!(row.chernoff_valid);
    }

    #[test]
    fn bound_monotone_in_q() {
        for &(n, p) in &[(5u64, 0.3), (20, 0.5), (40, 0.7)] {
            let mut last = f64::INFINITY;
            let mut q = 0.0;
            while p + q <= 1.0 + 1e-9 {
                let r = chernoff_binomial_closed(&BinomialParams { n, p, q: q.min(1.0 - p) }).unwrap();
                assert!(r.bound <= last + 1e-15, "n={n} p={p} q={q}");
                last = r.bound;
                q += 0.05;
            }
        }
    }
}
