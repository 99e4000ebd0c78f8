//! Exact enumeration of the coupling processes and of the marginal
//! sampling laws, in rational arithmetic.
//!
//! The joint enumerator replays the truncated two-urn process branch by
//! branch: every Y-draw outcome, every triggered X-draw, and every
//! completion draw of the X prefix, multiplying exact branch probabilities
//! along the way. A node budget keeps it honest: past the budget the
//! instance is rejected rather than approximated.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{One, Zero};

use super::dist::{Dist, ExactPopulation, JointDist, Rational};
use crate::coupling::CouplingModel;
use crate::{Error, Result};

/// Default branch budget for exact enumeration.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

fn budget_error(budget: u64) -> Error {
    Error::InstanceTooLarge(format!("exact enumeration exceeded its budget of {budget} branches"))
}

fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

struct Enumerator<'a> {
    values: &'a [Rational],
    n: usize,
    nodes: u64,
    budget: u64,
    acc: BTreeMap<(Rational, Rational), Rational>,
}

impl<'a> Enumerator<'a> {
    fn new(pop: &'a ExactPopulation, n: usize, budget: u64) -> Result<Self> {
        if n == 0 || n > pop.size() {
            return Err(Error::InvalidArgument(format!(
                "sample size n={n} must satisfy 1 <= n <= N={}",
                pop.size()
            )));
        }
        if pop.size() > 64 {
            return Err(budget_error(budget));
        }
        Ok(Self { values: pop.values(), n, nodes: 0, budget, acc: BTreeMap::new() })
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(budget_error(self.budget));
        }
        Ok(())
    }

    /// Residual X-draws that extend the xi prefix to length n, uniformly
    /// without replacement among unused labels.
    fn complete_xi(&mut self, used: u64, a: usize, s: Rational, t: Rational, p: Rational) -> Result<()> {
        self.tick()?;
        if a == self.n {
            *self.acc.entry((s, t)).or_insert_with(Rational::zero) += p;
            return Ok(());
        }
        let remaining = self.values.len() - a;
        let p_each = p / Rational::from(BigInt::from(remaining));
        for l in 0..self.values.len() {
            if used & (1 << l) == 0 {
                self.complete_xi(
                    used | (1 << l),
                    a + 1,
                    s.clone() + &self.values[l],
                    t.clone(),
                    p_each.clone(),
                )?;
            }
        }
        Ok(())
    }

    fn replacement_step(
        &mut self,
        step: usize,
        assigned: &mut Vec<usize>,
        used: u64,
        s: Rational,
        t: Rational,
        p: Rational,
    ) -> Result<()> {
        self.tick()?;
        if step == self.n {
            return self.complete_xi(used, assigned.len(), s, t, p);
        }
        let n_pop = self.values.len();
        // Each labeled Y-ball is hit with probability 1/N; an unlabeled hit
        // combined with the uniform X-draw also lands on each unused label
        // with probability 1/N.
        let p_each = p / Rational::from(BigInt::from(n_pop));
        for idx in 0..assigned.len() {
            let label = assigned[idx];
            self.replacement_step(
                step + 1,
                assigned,
                used,
                s.clone(),
                t.clone() + &self.values[label],
                p_each.clone(),
            )?;
        }
        for l in 0..n_pop {
            if used & (1 << l) == 0 {
                assigned.push(l);
                self.replacement_step(
                    step + 1,
                    assigned,
                    used | (1 << l),
                    s.clone() + &self.values[l],
                    t.clone() + &self.values[l],
                    p_each.clone(),
                )?;
                assigned.pop();
            }
        }
        Ok(())
    }

    fn kfold_step(
        &mut self,
        k: usize,
        step: usize,
        cohorts: &mut Vec<(usize, usize)>,
        used: u64,
        s: Rational,
        t: Rational,
        p: Rational,
    ) -> Result<()> {
        self.tick()?;
        if step == self.n {
            return self.complete_xi(used, cohorts.len(), s, t, p);
        }
        let n_pop = self.values.len();
        let total = k * n_pop - step;
        for idx in 0..cohorts.len() {
            let (label, left) = cohorts[idx];
            if left > 0 {
                let p_branch = p.clone() * ratio(left, total);
                cohorts[idx].1 -= 1;
                self.kfold_step(
                    k,
                    step + 1,
                    cohorts,
                    used,
                    s.clone(),
                    t.clone() + &self.values[label],
                    p_branch,
                )?;
                cohorts[idx].1 += 1;
            }
        }
        // Unlabeled hit (k * untouched balls) plus uniform X-draw: each
        // unused label takes the fresh cohort with probability k/total.
        let p_fresh = p * ratio(k, total);
        for l in 0..n_pop {
            if used & (1 << l) == 0 {
                cohorts.push((l, k - 1));
                self.kfold_step(
                    k,
                    step + 1,
                    cohorts,
                    used | (1 << l),
                    s.clone() + &self.values[l],
                    t.clone() + &self.values[l],
                    p_fresh.clone(),
                )?;
                cohorts.pop();
            }
        }
        Ok(())
    }

    fn surreplacement_step(
        &mut self,
        d: usize,
        step: usize,
        labels: &mut Vec<(usize, usize)>,
        used: u64,
        s: Rational,
        t: Rational,
        p: Rational,
    ) -> Result<()> {
        self.tick()?;
        if step == self.n {
            return self.complete_xi(used, labels.len(), s, t, p);
        }
        let n_pop = self.values.len();
        let total = n_pop + step * (d - 1);
        for idx in 0..labels.len() {
            let (label, hits) = labels[idx];
            let weight = 1 + hits * (d - 1);
            let p_branch = p.clone() * ratio(weight, total);
            labels[idx].1 += 1;
            self.surreplacement_step(
                d,
                step + 1,
                labels,
                used,
                s.clone(),
                t.clone() + &self.values[label],
                p_branch,
            )?;
            labels[idx].1 -= 1;
        }
        // Unlabeled-ball hit then uniform X-draw: 1/total per unused label.
        let p_fresh = p * ratio(1, total);
        for l in 0..n_pop {
            if used & (1 << l) == 0 {
                labels.push((l, 1));
                self.surreplacement_step(
                    d,
                    step + 1,
                    labels,
                    used | (1 << l),
                    s.clone() + &self.values[l],
                    t.clone() + &self.values[l],
                    p_fresh.clone(),
                )?;
                labels.pop();
            }
        }
        Ok(())
    }
}

/// Exact joint law of `(S_n, T_n)` under the given coupling model.
pub fn enumerate_joint(pop: &ExactPopulation, model: &CouplingModel, n: usize) -> Result<JointDist> {
    enumerate_joint_with_budget(pop, model, n, ENUMERATION_BUDGET)
}

/// Provable lower bound on enumeration nodes: the Y-phase alone branches at
/// least this often (replacement and surreplacement branch exactly N ways
/// per step; k-fold at least N - step ways via the fresh-cohort labels).
fn node_lower_bound(model: &CouplingModel, n_pop: usize, n: usize) -> u128 {
    let mut bound: u128 = 1;
    for step in 0..n {
        let branches = match model {
            CouplingModel::KFold { .. } => n_pop - step,
            _ => n_pop,
        };
        bound = bound.saturating_mul(branches as u128);
    }
    bound
}

pub fn enumerate_joint_with_budget(
    pop: &ExactPopulation,
    model: &CouplingModel,
    n: usize,
    budget: u64,
) -> Result<JointDist> {
    model.validate()?;
    let mut e = Enumerator::new(pop, n, budget)?;
    if node_lower_bound(model, pop.size(), n) > budget as u128 {
        return Err(budget_error(budget));
    }
    let s0 = Rational::zero();
    let t0 = Rational::zero();
    let p0 = Rational::one();
    match *model {
        CouplingModel::Replacement => {
            e.replacement_step(0, &mut Vec::new(), 0, s0, t0, p0)?;
        }
        CouplingModel::KFold { k } => {
            e.kfold_step(k, 0, &mut Vec::new(), 0, s0, t0, p0)?;
        }
        CouplingModel::Surreplacement { d } => {
            e.surreplacement_step(d, 0, &mut Vec::new(), 0, s0, t0, p0)?;
        }
    }
    JointDist::from_support(e.acc)
}

/// Exact law of the sum of a uniform random n-subset of the population.
pub fn exact_without_replacement(pop: &ExactPopulation, n: usize) -> Result<Dist> {
    exact_kfold_sample(pop, 1, n)
}

/// Exact law of the sum of n draws without replacement from the k-fold
/// multiplied population (each label contributes 0..k copies).
pub fn exact_kfold_sample(pop: &ExactPopulation, k: usize, n: usize) -> Result<Dist> {
    if k == 0 {
        return Err(Error::InvalidArgument("multiplicity k must be >= 1".into()));
    }
    let n_pop = pop.size();
    if n == 0 || n > k * n_pop {
        return Err(Error::InvalidArgument(format!(
            "sample size n={n} must satisfy 1 <= n <= kN={}",
            k * n_pop
        )));
    }
    let budget = ENUMERATION_BUDGET;
    let mut nodes: u64 = 0;
    // ways[c][sum] = number of ways to pick c balls among the labels seen so
    // far with value total `sum`.
    let mut ways: Vec<BTreeMap<Rational, BigInt>> = vec![BTreeMap::new(); n + 1];
    ways[0].insert(Rational::zero(), BigInt::one());
    let take_weights: Vec<BigInt> = (0..=k).map(|j| super::tails::binomial_coefficient(k as u64, j as u64)).collect();
    for v in pop.values() {
        for c in (0..n).rev() {
            if ways[c].is_empty() {
                continue;
            }
            let snapshot: Vec<(Rational, BigInt)> =
                ways[c].iter().map(|(s, w)| (s.clone(), w.clone())).collect();
            for j in 1..=k.min(n - c) {
                let jv = &self_times(v, j);
                for (sum, w) in &snapshot {
                    nodes += 1;
                    if nodes > budget {
                        return Err(budget_error(budget));
                    }
                    let entry = ways[c + j].entry(sum.clone() + jv).or_insert_with(BigInt::zero);
                    *entry += w * &take_weights[j];
                }
            }
        }
    }
    let total = super::tails::binomial_coefficient((k * n_pop) as u64, n as u64);
    let entries = std::mem::take(&mut ways[n])
        .into_iter()
        .map(|(sum, w)| (sum, Rational::new(w, total.clone())));
    Dist::from_support(entries)
}

fn self_times(v: &Rational, j: usize) -> Rational {
    v * Rational::from(BigInt::from(j))
}

/// Exact law of the sum of n i.i.d. uniform picks, by n-fold convolution of
/// the single-draw law.
pub fn exact_with_replacement(pop: &ExactPopulation, n: usize) -> Result<Dist> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size n must be >= 1".into()));
    }
    let n_pop = pop.size();
    let mut single: BTreeMap<Rational, Rational> = BTreeMap::new();
    let p_each = ratio(1, n_pop);
    for v in pop.values() {
        *single.entry(v.clone()).or_insert_with(Rational::zero) += &p_each;
    }
    let budget = ENUMERATION_BUDGET;
    let mut nodes: u64 = 0;
    let mut acc = BTreeMap::new();
    acc.insert(Rational::zero(), Rational::one());
    for _ in 0..n {
        let mut next: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (s, p) in &acc {
            for (v, q) in &single {
                nodes += 1;
                if nodes > budget {
                    return Err(budget_error(budget));
                }
                *next.entry(s.clone() + v).or_insert_with(Rational::zero) += p * q;
            }
        }
        acc = next;
    }
    Dist::from_support(acc)
}

/// Exact law of the surreplacement sum: at step i (1-based) a label with j
/// prior hits is drawn with probability (1 + j(d-1)) / (N + (i-1)(d-1)).
pub fn exact_surreplacement_sample(pop: &ExactPopulation, d: usize, n: usize) -> Result<Dist> {
    if d == 0 {
        return Err(Error::InvalidArgument("surreplacement requires d >= 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample size n must be >= 1".into()));
    }
    let n_pop = pop.size();
    let budget = ENUMERATION_BUDGET;
    let mut nodes: u64 = 0;
    let mut hits = vec![0usize; n_pop];
    let mut acc: BTreeMap<Rational, Rational> = BTreeMap::new();

    fn rec(
        values: &[Rational],
        d: usize,
        n: usize,
        step: usize,
        hits: &mut [usize],
        t: Rational,
        p: Rational,
        acc: &mut BTreeMap<Rational, Rational>,
        nodes: &mut u64,
        budget: u64,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > budget {
            return Err(budget_error(budget));
        }
        if step == n {
            *acc.entry(t).or_insert_with(Rational::zero) += p;
            return Ok(());
        }
        let total = values.len() + step * (d - 1);
        for l in 0..values.len() {
            let weight = 1 + hits[l] * (d - 1);
            let p_branch = p.clone() * ratio(weight, total);
            hits[l] += 1;
            rec(values, d, n, step + 1, hits, t.clone() + &values[l], p_branch, acc, nodes, budget)?;
            hits[l] -= 1;
        }
        Ok(())
    }

    rec(pop.values(), d, n, 0, &mut hits, Rational::zero(), Rational::one(), &mut acc, &mut nodes, budget)?;
    Dist::from_support(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn pop(strs: &[&str]) -> ExactPopulation {
        ExactPopulation::from_decimal_strs(strs).unwrap()
    }

    #[test]
    fn replacement_joint_marginals_012() {
        let j = enumerate_joint(&pop(&["0", "1", "2"]), &CouplingModel::Replacement, 2).unwrap();
        // S is the sum of a uniform 2-subset: uniform on {1, 2, 3}.
        for s in 1..=3 {
            assert_eq!(j.marginal_s().probability(&rat(s, 1)), rat(1, 3));
        }
        // T is the sum of two i.i.d. uniform picks.
        let expected = [(0, 1), (1, 2), (2, 3), (3, 2), (4, 1)];
        for (t, num) in expected {
            assert_eq!(j.marginal_t().probability(&rat(t, 1)), rat(num, 9));
        }
    }

    #[test]
    fn point_mass_for_singleton() {
        for model in [
            CouplingModel::Replacement,
            CouplingModel::KFold { k: 2 },
            CouplingModel::Surreplacement { d: 3 },
        ] {
            let j = enumerate_joint(&pop(&["5"]), &model, 1).unwrap();
            assert_eq!(j.len(), 1);
            assert_eq!(j.iter().next().unwrap().0, &(rat(5, 1), rat(5, 1)));
        }
    }

    #[test]
    fn kfold_joint_t_marginal_is_hypergeometric() {
        let j = enumerate_joint(&pop(&["0", "1"]), &CouplingModel::KFold { k: 2 }, 2).unwrap();
        // Drawing 2 from {0,0,1,1}: P(T=1) = 2/3.
        assert_eq!(j.marginal_t().probability(&rat(1, 1)), rat(2, 3));
        assert_eq!(j.marginal_t().probability(&rat(0, 1)), rat(1, 6));
        assert_eq!(j.marginal_t().probability(&rat(2, 1)), rat(1, 6));
    }

    #[test]
    fn surreplacement_joint_t_marginal() {
        let j = enumerate_joint(&pop(&["0", "1"]), &CouplingModel::Surreplacement { d: 2 }, 2).unwrap();
        for t in 0..=2 {
            assert_eq!(j.marginal_t().probability(&rat(t, 1)), rat(1, 3), "t={t}");
        }
    }

    #[test]
    fn marginal_laws_match_enumerated_joint() {
        let p = pop(&["0", "1", "2"]);
        for n in 1..=3 {
            let j = enumerate_joint(&p, &CouplingModel::Replacement, n).unwrap();
            assert_eq!(j.marginal_s(), &exact_without_replacement(&p, n).unwrap());
            assert_eq!(j.marginal_t(), &exact_with_replacement(&p, n).unwrap());

            let j = enumerate_joint(&p, &CouplingModel::KFold { k: 2 }, n).unwrap();
            assert_eq!(j.marginal_s(), &exact_without_replacement(&p, n).unwrap());
            assert_eq!(j.marginal_t(), &exact_kfold_sample(&p, 2, n).unwrap());

            for d in [2, 3] {
                let j = enumerate_joint(&p, &CouplingModel::Surreplacement { d }, n).unwrap();
                assert_eq!(j.marginal_s(), &exact_without_replacement(&p, n).unwrap());
                assert_eq!(j.marginal_t(), &exact_surreplacement_sample(&p, d, n).unwrap());
            }
        }
    }

    #[test]
    fn without_replacement_examples() {
        let d = exact_without_replacement(&pop(&["0", "1", "2"]), 2).unwrap();
        for s in 1..=3 {
            assert_eq!(d.probability(&rat(s, 1)), rat(1, 3));
        }
        // n = N is the deterministic full sum.
        let d = exact_without_replacement(&pop(&["0", "1", "2"]), 3).unwrap();
        assert_eq!(d, Dist::point_mass(rat(3, 1)));
        // Two-color urn: hypergeometric counts.
        let urn = ExactPopulation::two_color_urn(2, 2).unwrap();
        let d = exact_without_replacement(&urn, 2).unwrap();
        assert_eq!(d.probability(&rat(0, 1)), rat(1, 6));
        assert_eq!(d.probability(&rat(1, 1)), rat(4, 6));
        assert_eq!(d.probability(&rat(2, 1)), rat(1, 6));
    }

    #[test]
    fn with_replacement_examples() {
        let d = exact_with_replacement(&pop(&["0", "1", "2"]), 1).unwrap();
        for v in 0..=2 {
            assert_eq!(d.probability(&rat(v, 1)), rat(1, 3));
        }
        // Urn(1,1) with 3 draws is Binomial(3, 1/2).
        let urn = ExactPopulation::two_color_urn(1, 1).unwrap();
        let d = exact_with_replacement(&urn, 3).unwrap();
        let b = super::super::tails::binomial_dist(3, &rat(1, 2)).unwrap();
        assert_eq!(d, b);
    }

    #[test]
    fn kfold_sample_examples() {
        let p = pop(&["0", "1"]);
        let d = exact_kfold_sample(&p, 2, 2).unwrap();
        assert_eq!(d.probability(&rat(0, 1)), rat(1, 6));
        assert_eq!(d.probability(&rat(1, 1)), rat(4, 6));
        assert_eq!(d.probability(&rat(2, 1)), rat(1, 6));
        // k = 1 reduces to plain sampling without replacement.
        assert_eq!(
            exact_kfold_sample(&pop(&["0", "1", "2"]), 1, 2).unwrap(),
            exact_without_replacement(&pop(&["0", "1", "2"]), 2).unwrap()
        );
        // n = kN forces the full multiplied sum.
        let d = exact_kfold_sample(&p, 2, 4).unwrap();
        assert_eq!(d, Dist::point_mass(rat(2, 1)));
    }

    #[test]
    fn surreplacement_sample_examples() {
        let p = pop(&["0", "1"]);
        let d = exact_surreplacement_sample(&p, 2, 2).unwrap();
        for t in 0..=2 {
            assert_eq!(d.probability(&rat(t, 1)), rat(1, 3));
        }
        // d = 1 is sampling with replacement.
        let p3 = pop(&["0", "1", "2"]);
        assert_eq!(
            exact_surreplacement_sample(&p3, 1, 3).unwrap(),
            exact_with_replacement(&p3, 3).unwrap()
        );
        // First draw is uniform for any d.
        let d = exact_surreplacement_sample(&p3, 7, 1).unwrap();
        for v in 0..=2 {
            assert_eq!(d.probability(&rat(v, 1)), rat(1, 3));
        }
    }

    #[test]
    fn budget_guard_rejects_large_instances() {
        let urn = ExactPopulation::two_color_urn(20, 20).unwrap();
        let err = enumerate_joint(&urn, &CouplingModel::Replacement, 10).unwrap_err();
        assert!(matches!(err, Error::InstanceTooLarge(_)));
    }

    #[test]
    fn joint_invariant_under_value_permutation() {
        let a = pop(&["0", "1", "2.5"]);
        let b = pop(&["2.5", "0", "1"]);
        for model in [
            CouplingModel::Replacement,
            CouplingModel::KFold { k: 2 },
            CouplingModel::Surreplacement { d: 2 },
        ] {
            assert_eq!(
                enumerate_joint(&a, &model, 2).unwrap(),
                enumerate_joint(&b, &model, 2).unwrap()
            );
        }
    }

    #[test]
    fn repeated_values_are_legal() {
        let p = pop(&["1", "1", "0"]);
        let j = enumerate_joint(&p, &CouplingModel::Replacement, 2).unwrap();
        // S: pairs {1,1}=2, {1,0}=1 (x2): P(S=2)=1/3, P(S=1)=2/3.
        assert_eq!(j.marginal_s().probability(&rat(2, 1)), rat(1, 3));
        assert_eq!(j.marginal_s().probability(&rat(1, 1)), rat(2, 3));
    }
}
