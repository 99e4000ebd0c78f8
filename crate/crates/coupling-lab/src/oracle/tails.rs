//! Exact binomial and hypergeometric tail probabilities.

use num::bigint::BigInt;
use num::{One, Signed, Zero};

use super::dist::{Dist, Rational};
use crate::{Error, Result};

/// Exact binomial coefficient C(n, k).
pub fn binomial_coefficient(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn check_probability(p: &Rational) -> Result<()> {
    if p.is_negative() || *p > Rational::one() {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Smallest integer >= w.
fn ceil_to_int(w: &Rational) -> BigInt {
    let floor = w.floor();
    if &floor == w {
        floor.to_integer()
    } else {
        floor.to_integer() + 1
    }
}

/// Exact pmf of the number of successes in n independent trials with
/// success probability p.
pub fn binomial_dist(n: u64, p: &Rational) -> Result<Dist> {
    check_probability(p)?;
    let q = Rational::one() - p;
    let mut entries = Vec::with_capacity(n as usize + 1);
    for j in 0..=n {
        let coeff = Rational::from(binomial_coefficient(n, j));
        let prob = coeff * pow_rational(p, j) * pow_rational(&q, n - j);
        entries.push((Rational::from(BigInt::from(j)), prob));
    }
    Dist::from_support(entries)
}

/// Exact pmf of the number of red balls among n draws without replacement
/// from an urn of a red and b blue balls.
pub fn hypergeometric_dist(a: u64, b: u64, n: u64) -> Result<Dist> {
    if n > a + b || a + b == 0 {
        return Err(Error::InvalidArgument(format!(
            "hypergeometric draws n={n} must satisfy 0 <= n <= a+b={}",
            a + b
        )));
    }
    let total = binomial_coefficient(a + b, n);
    let lo = n.saturating_sub(b);
    let hi = a.min(n);
    let mut entries = Vec::new();
    for j in lo..=hi {
        let ways = binomial_coefficient(a, j) * binomial_coefficient(b, n - j);
        entries.push((
            Rational::from(BigInt::from(j)),
            Rational::new(ways, total.clone()),
        ));
    }
    Dist::from_support(entries)
}

/// Exact P(T >= w) for T binomial(n, p), by pmf summation.
pub fn binom_tail(n: u64, p: &Rational, w: &Rational) -> Result<Rational> {
    check_probability(p)?;
    let jmin = ceil_to_int(w).max(BigInt::zero());
    if jmin > BigInt::from(n) {
        return Ok(Rational::zero());
    }
    let jmin = u64::try_from(jmin).expect("threshold fits u64");
    let q = Rational::one() - p;
    let mut tail = Rational::zero();
    for j in jmin..=n {
        let coeff = Rational::from(binomial_coefficient(n, j));
        tail += coeff * pow_rational(p, j) * pow_rational(&q, n - j);
    }
    Ok(tail)
}

/// Exact P(S >= w) for S hypergeometric(a, b, n), by pmf summation.
pub fn hypergeom_tail(a: u64, b: u64, n: u64, w: &Rational) -> Result<Rational> {
    if n > a + b || a + b == 0 {
        return Err(Error::InvalidArgument(format!(
            "hypergeometric draws n={n} must satisfy 0 <= n <= a+b={}",
            a + b
        )));
    }
    let jmin = ceil_to_int(w).max(BigInt::from(n.saturating_sub(b)));
    let hi = a.min(n);
    if jmin > BigInt::from(hi) {
        return Ok(Rational::zero());
    }
    let jmin = u64::try_from(jmin).expect("threshold fits u64");
    let total = binomial_coefficient(a + b, n);
    let mut ways = BigInt::zero();
    for j in jmin..=hi {
        ways += binomial_coefficient(a, j) * binomial_coefficient(b, n - j);
    }
    Ok(Rational::new(ways, total))
}

fn pow_rational(r: &Rational, e: u64) -> Rational {
    if e == 0 {
        return Rational::one();
    }
    let mut acc = Rational::one();
    let mut base = r.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn binomial_coefficients() {
        assert_eq!(binomial_coefficient(4, 2), BigInt::from(6));
        assert_eq!(binomial_coefficient(40, 20), "137846528820".parse::<BigInt>().unwrap());
        assert_eq!(binomial_coefficient(3, 5), BigInt::zero());
        assert_eq!(binomial_coefficient(0, 0), BigInt::one());
    }

    #[test]
    fn binom_tail_examples() {
        // All three successes of a fair coin.
        assert_eq!(binom_tail(3, &rat(1, 2), &rat(3, 1)).unwrap(), rat(1, 8));
        // Threshold 0 captures the whole mass.
        assert_eq!(binom_tail(17, &rat(2, 7), &rat(0, 1)).unwrap(), rat(1, 1));
        // Negative threshold likewise.
        assert_eq!(binom_tail(5, &rat(1, 3), &rat(-2, 1)).unwrap(), rat(1, 1));
        // Above n the tail is empty.
        assert_eq!(binom_tail(3, &rat(1, 2), &rat(4, 1)).unwrap(), rat(0, 1));
        // Non-integer threshold rounds up: P(T >= 2.5) = P(T >= 3).
        assert_eq!(binom_tail(3, &rat(1, 2), &rat(5, 2)).unwrap(), rat(1, 8));
        assert!(binom_tail(3, &rat(3, 2), &rat(1, 1)).is_err());
    }

    #[test]
    fn hypergeom_tail_examples() {
        // C(2,2)/C(4,2) = 1/6.
        assert_eq!(hypergeom_tail(2, 2, 2, &rat(2, 1)).unwrap(), rat(1, 6));
        assert_eq!(hypergeom_tail(2, 2, 2, &rat(0, 1)).unwrap(), rat(1, 1));
        assert_eq!(hypergeom_tail(2, 2, 2, &rat(3, 1)).unwrap(), rat(0, 1));
        assert!(hypergeom_tail(2, 2, 5, &rat(0, 1)).is_err());
    }

    #[test]
    fn dists_match_tails() {
        let b = binomial_dist(3, &rat(1, 2)).unwrap();
        assert_eq!(b.upper_tail(&rat(3, 1)), rat(1, 8));
        assert_eq!(b.mean(), rat(3, 2));
        let h = hypergeometric_dist(2, 2, 2).unwrap();
        assert_eq!(h.probability(&rat(1, 1)), rat(4, 6));
        assert_eq!(h.upper_tail(&rat(2, 1)), rat(1, 6));
    }

    #[test]
    fn hypergeometric_respects_support_bounds() {
        // Drawing 3 from 2 red + 1 blue forces at least 2 red.
        let h = hypergeometric_dist(2, 1, 3).unwrap();
        assert_eq!(h.probability(&rat(1, 1)), rat(0, 1));
        assert_eq!(h.probability(&rat(2, 1)), rat(1, 1));
    }
}
