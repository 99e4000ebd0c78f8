//! Exact rational probability distributions.
//!
//! Oracle paths never touch floating point: population values enter as
//! decimal strings or integers and every probability is a reduced
//! `BigRational`. Finite decimal inputs keep all sums finitely decimal, so
//! support points serialize back out as exact decimal strings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::bigint::{BigInt, Sign};
use num::{BigRational, One, Signed, Zero};
use serde::Serialize;

use crate::{Error, Result};

pub type Rational = BigRational;

/// Parses a decimal literal ("2", "-0.25", ".5") into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (sign, digits) = match t.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::InvalidArgument(format!("empty decimal literal {s:?}")));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::InvalidArgument(format!("malformed decimal literal {s:?}")));
    }
    let mut num: BigInt = if int_part.is_empty() { BigInt::zero() } else { int_part.parse().unwrap() };
    let ten = BigInt::from(10);
    for c in frac_part.chars() {
        num = num * &ten + BigInt::from(c.to_digit(10).unwrap());
    }
    let den = ten.pow(frac_part.len() as u32);
    Ok(Rational::new(num * BigInt::from(sign), den))
}

/// Renders a rational whose reduced denominator is of the form 2^a 5^b as an
/// exact decimal string; other denominators fall back to "num/den".
pub fn render_decimal(r: &Rational) -> String {
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let k = twos.max(fives);
    let scaled = r.numer().abs() * two.pow(k - twos.min(k)) * five.pow(k - fives.min(k));
    let mut digits = scaled.to_string();
    if (digits.len() as u32) <= k {
        let pad = k as usize + 1 - digits.len();
        digits = "0".repeat(pad) + &digits;
    }
    let split = digits.len() - k as usize;
    let (int_part, frac_part) = digits.split_at(split);
    let frac_part = frac_part.trim_end_matches('0');
    let mut out = String::new();
    if r.numer().sign() == Sign::Minus {
        out.push('-');
    }
    out.push_str(int_part);
    if !frac_part.is_empty() {
        out.push('.');
        out.push_str(frac_part);
    }
    out
}

/// A population whose values are exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPopulation {
    values: Vec<Rational>,
}

impl ExactPopulation {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPopulation("population must be non-empty".into()));
        }
        Ok(Self { values })
    }

    /// Parses comma-free decimal tokens, e.g. `["0", "1", "2.5"]`.
    pub fn from_decimal_strs<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        let values = tokens.iter().map(|t| parse_decimal(t.as_ref())).collect::<Result<_>>()?;
        Self::new(values)
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Rational::from(BigInt::from(v))).collect())
    }

    pub fn two_color_urn(a: usize, b: usize) -> Result<Self> {
        if a + b == 0 {
            return Err(Error::InvalidPopulation("urn must contain at least one ball".into()));
        }
        let mut values = vec![Rational::one(); a];
        values.extend(std::iter::repeat(Rational::zero()).take(b));
        Ok(Self { values })
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn mean(&self) -> Rational {
        let total: Rational = self.values.iter().sum();
        total / Rational::from(BigInt::from(self.values.len()))
    }

    /// The f64 view used by simulation paths.
    pub fn to_f64_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| rational_to_f64(v)).collect()
    }
}

/// Nearest-f64 conversion (numerator/denominator in float; exact enough for
/// the desk-scale magnitudes the tools handle).
pub fn rational_to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().expect("rational out of f64 range")
}

/// Exact law of a single real-valued quantity on finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    support: BTreeMap<Rational, Rational>,
}

impl Dist {
    pub fn from_support(entries: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        let mut support = BTreeMap::new();
        for (v, p) in entries {
            if p.is_negative() {
                return Err(Error::InvalidArgument("negative probability".into()));
            }
            if !p.is_zero() {
                *support.entry(v).or_insert_with(Rational::zero) += p;
            }
        }
        let dist = Self { support };
        if !dist.total().is_one() {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {}, not 1",
                dist.total()
            )));
        }
        Ok(dist)
    }

    pub fn point_mass(v: Rational) -> Self {
        let mut support = BTreeMap::new();
        support.insert(v, Rational::one());
        Self { support }
    }

    pub fn total(&self) -> Rational {
        self.support.values().sum()
    }

    pub fn mean(&self) -> Rational {
        self.support.iter().map(|(v, p)| v * p).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.support.iter()
    }

    pub fn probability(&self, v: &Rational) -> Rational {
        self.support.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// P(R >= w), summed exactly.
    pub fn upper_tail(&self, w: &Rational) -> Rational {
        self.support.iter().filter(|(v, _)| *v >= w).map(|(_, p)| p).sum()
    }

    /// MGF at u, evaluated in floating point.
    pub fn mgf_f64(&self, u: f64) -> f64 {
        self.support
            .iter()
            .map(|(v, p)| rational_to_f64(p) * (u * rational_to_f64(v)).exp())
            .sum()
    }
}

/// Exact joint law of the coupled pair `(S_n, T_n)` with cached marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    support: BTreeMap<(Rational, Rational), Rational>,
    marginal_s: Dist,
    marginal_t: Dist,
}

impl JointDist {
    pub fn from_support(
        entries: impl IntoIterator<Item = ((Rational, Rational), Rational)>,
    ) -> Result<Self> {
        let mut support: BTreeMap<(Rational, Rational), Rational> = BTreeMap::new();
        for (st, p) in entries {
            if p.is_negative() {
                return Err(Error::InvalidArgument("negative probability".into()));
            }
            if !p.is_zero() {
                *support.entry(st).or_insert_with(Rational::zero) += p;
            }
        }
        let total: Rational = support.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        let mut ms: BTreeMap<Rational, Rational> = BTreeMap::new();
        let mut mt: BTreeMap<Rational, Rational> = BTreeMap::new();
        for ((s, t), p) in &support {
            *ms.entry(s.clone()).or_insert_with(Rational::zero) += p;
            *mt.entry(t.clone()).or_insert_with(Rational::zero) += p;
        }
        Ok(Self {
            support,
            marginal_s: Dist { support: ms },
            marginal_t: Dist { support: mt },
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Rational, Rational), &Rational)> {
        self.support.iter()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn marginal_s(&self) -> &Dist {
        &self.marginal_s
    }

    pub fn marginal_t(&self) -> &Dist {
        &self.marginal_t
    }

    /// JSON support entries: s and t as decimals, probability as num/den
    /// integer strings.
    pub fn support_json(&self) -> Vec<JointSupportEntry> {
        self.support
            .iter()
            .map(|((s, t), p)| JointSupportEntry {
                s: render_decimal(s),
                t: render_decimal(t),
                num: p.numer().to_string(),
                den: p.denom().to_string(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JointSupportEntry {
    pub s: String,
    pub t: String,
    pub num: String,
    pub den: String,
}

/// Renders a distribution as `value:probability` pairs, for report text.
pub fn dist_to_string(d: &Dist) -> String {
    let mut out = String::new();
    for (v, p) in d.iter() {
        if !out.is_empty() {
            out.push_str(", ");
        }
        let _ = write!(out, "{}:{}/{}", render_decimal(v), p.numer(), p.denom());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parse_decimal_exact() {
        assert_eq!(parse_decimal("2.5").unwrap(), rat(5, 2));
        assert_eq!(parse_decimal("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_decimal("3").unwrap(), rat(3, 1));
        assert_eq!(parse_decimal(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_decimal("0.05").unwrap(), rat(1, 20));
        assert!(parse_decimal("").is_err());
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("1e3").is_err());
    }

    #[test]
    fn render_decimal_round_trips() {
        for s in ["0", "1", "-1", "2.5", "-0.25", "0.05", "123.456", "1000"] {
            let r = parse_decimal(s).unwrap();
            let rendered = render_decimal(&r);
            assert_eq!(parse_decimal(&rendered).unwrap(), r, "{s} -> {rendered}");
        }
        assert_eq!(render_decimal(&rat(1, 2)), "0.5");
        assert_eq!(render_decimal(&rat(-3, 4)), "-0.75");
        assert_eq!(render_decimal(&rat(7, 1)), "7");
        assert_eq!(render_decimal(&rat(1, 3)), "1/3");
    }

    #[test]
    fn dist_validates_total() {
        assert!(Dist::from_support(vec![(rat(0, 1), rat(1, 2)), (rat(1, 1), rat(1, 2))]).is_ok());
        assert!(Dist::from_support(vec![(rat(0, 1), rat(1, 2))]).is_err());
        assert!(Dist::from_support(vec![(rat(0, 1), rat(-1, 2)), (rat(1, 1), rat(3, 2))]).is_err());
    }

    #[test]
    fn joint_marginals_cached() {
        let j = JointDist::from_support(vec![
            ((rat(0, 1), rat(1, 1)), rat(1, 2)),
            ((rat(1, 1), rat(0, 1)), rat(1, 2)),
        ])
        .unwrap();
        assert_eq!(j.marginal_s().probability(&rat(0, 1)), rat(1, 2));
        assert_eq!(j.marginal_t().probability(&rat(0, 1)), rat(1, 2));
        assert_eq!(j.marginal_s().total(), rat(1, 1));
    }

    #[test]
    fn exact_population_mean() {
        let p = ExactPopulation::from_decimal_strs(&["0", "1", "2"]).unwrap();
        assert_eq!(p.mean(), rat(1, 1));
        let urn = ExactPopulation::two_color_urn(2, 3).unwrap();
        assert_eq!(urn.mean(), rat(2, 5));
    }
}
