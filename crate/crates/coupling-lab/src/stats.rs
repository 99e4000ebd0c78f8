//! Monte Carlo estimators and hypothesis tests for the coupling laws.
//!
//! Trials are embarrassingly parallel: each trial owns the RNG stream whose
//! id is its trial index, workers emit integer count increments, and
//! aggregation is a commutative merge, so every report is identical across
//! reruns and worker counts. Thresholds are deliberately loose (4 sigma per
//! bin, chi-square at alpha = 1e-6) to keep suite-level false failures
//! negligible.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::coupling::{run_model, run_surreplacement, CouplingModel};
use crate::oracle::{rational_to_f64, Dist};
use crate::population::Population;
use crate::rng::RngStream;
use crate::{Error, Result};

/// Per-bin tolerance multiplier.
pub const SIGMA: f64 = 4.0;
/// Bins below this sample count are reported but not enforced.
pub const MIN_BIN_SAMPLES: u64 = 100;
/// Chi-square significance level.
pub const GOF_ALPHA: f64 = 1e-6;
/// Cells are pooled until their expected count reaches this value.
pub const GOF_MIN_EXPECTED: f64 = 5.0;

/// Environment variable capping the rayon worker count.
pub const THREADS_ENV: &str = "COUPLING_LAB_THREADS";

/// Bin key for floating-point sums: rounded to 12 significant digits so
/// permuted addition orders of the same sample collide onto one key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumKey(f64);

impl SumKey {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl Eq for SumKey {}

impl PartialOrd for SumKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SumKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for SumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Rounds to 12 significant digits and normalizes -0.
pub fn sum_key(x: f64) -> SumKey {
    if x == 0.0 {
        return SumKey(0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(11 - magnitude);
    let rounded = (x * factor).round() / factor;
    SumKey(if rounded == 0.0 { 0.0 } else { rounded })
}

/// Monte Carlo counts of coupled `(S, T)` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalJoint {
    counts: BTreeMap<(SumKey, SumKey), u64>,
    pub trials: u64,
    pub master_seed: u64,
    pub model: CouplingModel,
    pub n: usize,
}

impl EmpiricalJoint {
    /// Assembles a joint from raw cell counts (used by tests to build
    /// adversarial inputs).
    pub fn from_counts(
        counts: BTreeMap<(SumKey, SumKey), u64>,
        master_seed: u64,
        model: CouplingModel,
        n: usize,
    ) -> Self {
        let trials = counts.values().sum();
        Self { counts, trials, master_seed, model, n }
    }

    pub fn cells(&self) -> impl Iterator<Item = (&(SumKey, SumKey), &u64)> {
        self.counts.iter()
    }

    pub fn cell_count(&self) -> usize {
        self.counts.len()
    }

    pub fn marginal_s(&self) -> BTreeMap<SumKey, u64> {
        let mut m = BTreeMap::new();
        for (&(s, _), &c) in &self.counts {
            *m.entry(s).or_insert(0) += c;
        }
        m
    }

    pub fn marginal_t(&self) -> BTreeMap<SumKey, u64> {
        let mut m = BTreeMap::new();
        for (&(_, t), &c) in &self.counts {
            *m.entry(t).or_insert(0) += c;
        }
        m
    }

    /// CSV with columns s,t,count in ascending key order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,count\n");
        for (&(s, t), &c) in &self.counts {
            out.push_str(&format!("{s},{t},{c}\n"));
        }
        out
    }

    pub fn summary(&self) -> Summary {
        let trials = self.trials as f64;
        let mut mean_s = 0.0;
        let mut mean_t = 0.0;
        for (&(s, t), &c) in &self.counts {
            mean_s += s.value() * c as f64;
            mean_t += t.value() * c as f64;
        }
        mean_s /= trials;
        mean_t /= trials;
        let mut var_s = 0.0;
        let mut var_t = 0.0;
        for (&(s, t), &c) in &self.counts {
            var_s += c as f64 * (s.value() - mean_s).powi(2);
            var_t += c as f64 * (t.value() - mean_t).powi(2);
        }
        if self.trials > 1 {
            var_s /= trials - 1.0;
            var_t /= trials - 1.0;
        }
        Summary { trials: self.trials, cells: self.counts.len(), mean_s, mean_t, var_s, var_t }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub trials: u64,
    pub cells: usize,
    pub mean_s: f64,
    pub mean_t: f64,
    pub var_s: f64,
    pub var_t: f64,
}

fn merge_counts(
    mut a: BTreeMap<(SumKey, SumKey), u64>,
    b: BTreeMap<(SumKey, SumKey), u64>,
) -> BTreeMap<(SumKey, SumKey), u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Runs `f` inside a rayon pool capped by `COUPLING_LAB_THREADS` when set.
fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(threads) if threads >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("worker pool")
            .install(f),
        _ => f(),
    }
}

/// Runs `trials` independent trajectories on per-trial streams and
/// aggregates the `(S, T)` counts. Deterministic for fixed inputs.
pub fn collect(
    pop: &Population,
    model: &CouplingModel,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<EmpiricalJoint> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    // Surface InvalidArgument before fanning out.
    run_model(pop, model, n, RngStream::new(master_seed, 0))?;
    let counts = with_thread_cap(|| {
        (0..trials)
            .into_par_iter()
            .fold(BTreeMap::new, |mut m: BTreeMap<(SumKey, SumKey), u64>, trial| {
                let tr = run_model(pop, model, n, RngStream::new(master_seed, trial))
                    .expect("inputs validated");
                *m.entry((sum_key(tr.s), sum_key(tr.t))).or_insert(0) += 1;
                m
            })
            .reduce(BTreeMap::new, merge_counts)
    });
    Ok(EmpiricalJoint { counts, trials, master_seed, model: *model, n })
}

/// One line of a test report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub label: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub count: u64,
    /// Rows below the minimum sample count are informational only.
    pub mandatory: bool,
    pub passed: bool,
}

/// Outcome of one statistical test, with per-bin detail.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub rows: Vec<ReportRow>,
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} [{}]  {} = {:.6e}  threshold {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.statistic,
            self.value,
            self.threshold
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "  {} {:<28} observed {:>14.8} expected {:>14.8} tol {:>12.6e} count {:>9}{}",
                if row.passed { "ok  " } else { "FAIL" },
                row.label,
                row.observed,
                row.expected,
                row.tolerance,
                row.count,
                if row.mandatory { "" } else { " (informational)" },
            )?;
        }
        Ok(())
    }
}

fn weighted_mean_se(pairs: &[(f64, u64)]) -> (f64, f64, u64) {
    let total: u64 = pairs.iter().map(|&(_, c)| c).sum();
    let tf = total as f64;
    let mean = pairs.iter().map(|&(v, c)| v * c as f64).sum::<f64>() / tf;
    let ss = pairs.iter().map(|&(v, c)| c as f64 * (v - mean).powi(2)).sum::<f64>();
    let var = if total > 1 { (ss / (tf - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / tf).sqrt(), total)
}

/// Tests E[T | S = s] = s bin by bin plus the pooled mean of T - S.
pub fn martingale_test(emp: &EmpiricalJoint) -> TestReport {
    let mut by_s: BTreeMap<SumKey, Vec<(f64, u64)>> = BTreeMap::new();
    let mut diffs: Vec<(f64, u64)> = Vec::new();
    for (&(s, t), &c) in emp.cells() {
        by_s.entry(s).or_default().push((t.value(), c));
        diffs.push((t.value() - s.value(), c));
    }

    let mut rows = Vec::new();
    let mut all_bins_pass = true;
    for (s, ts) in &by_s {
        let (mean_t, se, count) = weighted_mean_se(ts);
        let deviation = (mean_t - s.value()).abs();
        let tolerance = SIGMA * se;
        let mandatory = count >= MIN_BIN_SAMPLES;
        let passed = deviation <= tolerance;
        if mandatory && !passed {
            all_bins_pass = false;
        }
        rows.push(ReportRow {
            label: format!("S={s}"),
            observed: mean_t,
            expected: s.value(),
            tolerance,
            count,
            mandatory,
            passed,
        });
    }

    let (mean_diff, se_diff, _) = weighted_mean_se(&diffs);
    let pooled_pass = mean_diff.abs() <= SIGMA * se_diff;
    TestReport {
        name: "martingale".into(),
        statistic: "pooled |mean(T - S)|".into(),
        value: mean_diff.abs(),
        threshold: SIGMA * se_diff,
        passed: pooled_pass && all_bins_pass,
        rows,
    }
}

fn chi_square_pvalue(stat: f64, df: u64) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

struct PooledCell {
    label: String,
    observed: f64,
    expected: f64,
}

/// Pools expected/observed cells in support order until each group's
/// expected count reaches the minimum; a light tail is merged backwards.
fn pool_cells(cells: &[(SumKey, f64, u64)], trials: f64) -> Vec<PooledCell> {
    let mut pooled: Vec<PooledCell> = Vec::new();
    let mut lo: Option<SumKey> = None;
    let mut exp_acc = 0.0;
    let mut obs_acc = 0.0;
    for &(key, prob, obs) in cells {
        if lo.is_none() {
            lo = Some(key);
        }
        exp_acc += prob * trials;
        obs_acc += obs as f64;
        if exp_acc >= GOF_MIN_EXPECTED {
            let label = match lo {
                Some(l) if l == key => format!("{key}"),
                Some(l) => format!("{l}..{key}"),
                None => unreachable!(),
            };
            pooled.push(PooledCell { label, observed: obs_acc, expected: exp_acc });
            lo = None;
            exp_acc = 0.0;
            obs_acc = 0.0;
        }
    }
    if exp_acc > 0.0 || obs_acc > 0.0 {
        if let Some(last) = pooled.last_mut() {
            last.observed += obs_acc;
            last.expected += exp_acc;
            last.label = format!("{}+", last.label);
        } else {
            pooled.push(PooledCell { label: "all".into(), observed: obs_acc, expected: exp_acc });
        }
    }
    pooled
}

fn gof_side(
    side: &str,
    empirical: &BTreeMap<SumKey, u64>,
    expected: &Dist,
    trials: u64,
) -> Result<(f64, Vec<ReportRow>)> {
    let mut expected_keys: BTreeMap<SumKey, f64> = BTreeMap::new();
    for (v, p) in expected.iter() {
        *expected_keys.entry(sum_key(rational_to_f64(v))).or_insert(0.0) += rational_to_f64(p);
    }
    for key in empirical.keys() {
        if !expected_keys.contains_key(key) {
            return Err(Error::SupportMismatch(format!(
                "observed {side} value {key} has expected probability zero"
            )));
        }
    }
    let cells: Vec<(SumKey, f64, u64)> = expected_keys
        .iter()
        .map(|(&k, &p)| (k, p, empirical.get(&k).copied().unwrap_or(0)))
        .collect();
    let pooled = pool_cells(&cells, trials as f64);
    let df = pooled.len().saturating_sub(1) as u64;
    let stat: f64 = pooled
        .iter()
        .map(|c| (c.observed - c.expected).powi(2) / c.expected)
        .sum();
    let pvalue = chi_square_pvalue(stat, df);
    let rows = pooled
        .into_iter()
        .map(|c| ReportRow {
            label: format!("{side} {}", c.label),
            observed: c.observed,
            expected: c.expected,
            tolerance: 0.0,
            count: c.observed as u64,
            mandatory: true,
            passed: pvalue >= GOF_ALPHA,
        })
        .collect();
    Ok((pvalue, rows))
}

/// Chi-square goodness of fit of both empirical marginals against their
/// exact laws, with cells pooled to expected count >= 5.
pub fn marginal_gof_test(
    emp: &EmpiricalJoint,
    expected_s: &Dist,
    expected_t: &Dist,
) -> Result<TestReport> {
    let (p_s, rows_s) = gof_side("S", &emp.marginal_s(), expected_s, emp.trials)?;
    let (p_t, rows_t) = gof_side("T", &emp.marginal_t(), expected_t, emp.trials)?;
    let mut rows = rows_s;
    rows.extend(rows_t);
    let value = p_s.min(p_t);
    Ok(TestReport {
        name: "marginal-gof".into(),
        statistic: "min chi-square p-value".into(),
        value,
        threshold: GOF_ALPHA,
        passed: value >= GOF_ALPHA,
        rows,
    })
}

/// Per-(step, prior-hit-count) tally of the surreplacement conditional law.
pub fn surreplacement_law_test(
    pop: &Population,
    d: usize,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<TestReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    run_surreplacement(pop, d, n, RngStream::new(master_seed, 0))?;
    let n_pop = pop.size();
    // tally[i][k] = (attempts, successes) for labels with k prior hits at step i.
    let zero = || vec![vec![(0u64, 0u64); n]; n];
    let tally = with_thread_cap(|| {
        (0..trials)
            .into_par_iter()
            .fold(zero, |mut acc, trial| {
                let tr = run_surreplacement(pop, d, n, RngStream::new(master_seed, trial))
                    .expect("inputs validated");
                let mut hits = vec![0usize; n_pop];
                for (i, &drawn) in tr.eta.iter().enumerate() {
                    for (label, &k) in hits.iter().enumerate() {
                        let cell = &mut acc[i][k];
                        cell.0 += 1;
                        if label == drawn {
                            cell.1 += 1;
                        }
                    }
                    hits[drawn] += 1;
                }
                acc
            })
            .reduce(zero, |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (ca, cb) in ra.iter_mut().zip(rb) {
                        ca.0 += cb.0;
                        ca.1 += cb.1;
                    }
                }
                a
            })
    });

    let mut rows = Vec::new();
    let mut max_z: f64 = 0.0;
    let mut passed = true;
    for (i, row) in tally.iter().enumerate() {
        for (k, &(attempts, successes)) in row.iter().enumerate() {
            if attempts == 0 {
                continue;
            }
            let expected = (1 + k * (d - 1)) as f64 / (n_pop + i * (d - 1)) as f64;
            let freq = successes as f64 / attempts as f64;
            let se = (expected * (1.0 - expected) / attempts as f64).sqrt();
            let tolerance = SIGMA * se;
            let mandatory = attempts >= MIN_BIN_SAMPLES;
            let row_pass = (freq - expected).abs() <= tolerance;
            if mandatory {
                if !row_pass {
                    passed = false;
                }
                if se > 0.0 {
                    max_z = max_z.max((freq - expected).abs() / se);
                }
            }
            rows.push(ReportRow {
                label: format!("step={} prior-hits={}", i + 1, k),
                observed: freq,
                expected,
                tolerance,
                count: attempts,
                mandatory,
                passed: row_pass,
            });
        }
    }
    Ok(TestReport {
        name: "surreplacement-law".into(),
        statistic: "max |freq - p| / se".into(),
        value: max_z,
        threshold: SIGMA,
        passed,
        rows,
    })
}

/// A named convex test function.
pub struct ConvexTestFunction {
    pub name: String,
    pub f: Box<dyn Fn(f64) -> f64 + Sync>,
}

impl ConvexTestFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Sync + 'static) -> Self {
        Self { name: name.into(), f: Box::new(f) }
    }
}

/// Default battery: hinges at the observed S-support points, the square,
/// and exponentials scaled by the observed data range.
pub fn default_convex_functions(emp: &EmpiricalJoint) -> Vec<ConvexTestFunction> {
    let mut fns: Vec<ConvexTestFunction> = Vec::new();
    for &s in emp.marginal_s().keys() {
        let a = s.value();
        fns.push(ConvexTestFunction::new(format!("hinge(a={a})"), move |x| (x - a).max(0.0)));
    }
    fns.push(ConvexTestFunction::new("square", |x| x * x));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&(s, t), _) in emp.cells() {
        lo = lo.min(s.value()).min(t.value());
        hi = hi.max(s.value()).max(t.value());
    }
    let range = hi - lo;
    if range > 0.0 {
        let u = 1.0 / range;
        fns.push(ConvexTestFunction::new(format!("exp(+{u:.6}x)"), move |x| (u * x).exp()));
        fns.push(ConvexTestFunction::new(format!("exp(-{u:.6}x)"), move |x| (-u * x).exp()));
    }
    fns
}

/// One-sided paired test: for each convex f the coupled difference
/// f(T) - f(S) has nonnegative mean, so its estimate may not fall more than
/// 4 standard errors below zero.
pub fn convex_function_test(emp: &EmpiricalJoint, functions: &[ConvexTestFunction]) -> TestReport {
    let mut rows = Vec::new();
    let mut passed = true;
    let mut worst = f64::INFINITY;
    for cf in functions {
        let diffs: Vec<(f64, u64)> = emp
            .cells()
            .map(|(&(s, t), &c)| ((cf.f)(t.value()) - (cf.f)(s.value()), c))
            .collect();
        let (mean, se, count) = weighted_mean_se(&diffs);
        let tolerance = SIGMA * se;
        let row_pass = mean >= -tolerance;
        if !row_pass {
            passed = false;
        }
        worst = worst.min(mean + tolerance);
        rows.push(ReportRow {
            label: cf.name.clone(),
            observed: mean,
            expected: 0.0,
            tolerance,
            count,
            mandatory: true,
            passed: row_pass,
        });
    }
    TestReport {
        name: "convex-order".into(),
        statistic: "min (mean diff + 4 se)".into(),
        value: if worst.is_finite() { worst } else { 0.0 },
        threshold: 0.0,
        passed,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{
        exact_with_replacement, exact_without_replacement, ExactPopulation,
    };

    fn pop012() -> Population {
        Population::from_values(vec![0.0, 1.0, 2.0]).unwrap()
    }

    fn exact012() -> ExactPopulation {
        ExactPopulation::from_decimal_strs(&["0", "1", "2"]).unwrap()
    }

    #[test]
    fn sum_key_rounds_to_12_digits() {
        assert_eq!(sum_key(0.1 + 0.2), sum_key(0.3));
        assert_eq!(sum_key(-0.0).value(), 0.0);
        assert_ne!(sum_key(1.0), sum_key(1.000001));
        assert_eq!(sum_key(3.0).value(), 3.0);
    }

    #[test]
    fn collect_is_deterministic() {
        let p = pop012();
        let a = collect(&p, &CouplingModel::Replacement, 2, 2000, 42).unwrap();
        let b = collect(&p, &CouplingModel::Replacement, 2, 2000, 42).unwrap();
        assert_eq!(a, b);
        let c = collect(&p, &CouplingModel::Replacement, 2, 2000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn collect_degenerate_population() {
        let p = Population::from_values(vec![7.0]).unwrap();
        let e = collect(&p, &CouplingModel::Surreplacement { d: 3 }, 1, 1000, 9).unwrap();
        assert_eq!(e.cell_count(), 1);
        let (&(s, t), &c) = e.cells().next().unwrap();
        assert_eq!((s.value(), t.value(), c), (7.0, 7.0, 1000));
    }

    #[test]
    fn martingale_and_gof_pass_on_replacement() {
        let p = pop012();
        let emp = collect(&p, &CouplingModel::Replacement, 2, 100_000, 7).unwrap();
        let report = martingale_test(&emp);
        assert!(report.passed, "{report}");

        let s = exact_without_replacement(&exact012(), 2).unwrap();
        let t = exact_with_replacement(&exact012(), 2).unwrap();
        let gof = marginal_gof_test(&emp, &s, &t).unwrap();
        assert!(gof.passed, "{gof}");

        let convex = convex_function_test(&emp, &default_convex_functions(&emp));
        assert!(convex.passed, "{convex}");
    }

    #[test]
    fn adversarial_shift_fails_martingale() {
        // T = S + 1 identically.
        let mut counts = BTreeMap::new();
        counts.insert((sum_key(0.0), sum_key(1.0)), 500u64);
        counts.insert((sum_key(1.0), sum_key(2.0)), 500u64);
        let emp = EmpiricalJoint::from_counts(counts, 0, CouplingModel::Replacement, 1);
        let report = martingale_test(&emp);
        assert!(!report.passed);
    }

    #[test]
    fn wrong_model_fails_gof() {
        // T drawn without replacement (kfold k=1) versus the
        // with-replacement law: P(T=0) is 1/9 expected but never observed.
        let p = pop012();
        let emp = collect(&p, &CouplingModel::KFold { k: 1 }, 2, 100_000, 11).unwrap();
        let s = exact_without_replacement(&exact012(), 2).unwrap();
        let t = exact_with_replacement(&exact012(), 2).unwrap();
        let gof = marginal_gof_test(&emp, &s, &t).unwrap();
        assert!(!gof.passed);
    }

    #[test]
    fn support_mismatch_is_an_error() {
        let mut counts = BTreeMap::new();
        counts.insert((sum_key(1.0), sum_key(99.0)), 100u64);
        let emp = EmpiricalJoint::from_counts(counts, 0, CouplingModel::Replacement, 2);
        let s = exact_without_replacement(&exact012(), 2).unwrap();
        let t = exact_with_replacement(&exact012(), 2).unwrap();
        assert!(matches!(marginal_gof_test(&emp, &s, &t), Err(Error::SupportMismatch(_))));
    }

    #[test]
    fn surreplacement_law_replacement_case() {
        // d = 1: every cell's conditional probability is 1/N.
        let p = pop012();
        let report = surreplacement_law_test(&p, 1, 3, 30_000, 3).unwrap();
        assert!(report.passed, "{report}");
        for row in &report.rows {
            assert!((row.expected - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn surreplacement_law_small_urn() {
        let p = Population::from_values(vec![0.0, 1.0]).unwrap();
        let report = surreplacement_law_test(&p, 2, 2, 50_000, 5).unwrap();
        assert!(report.passed, "{report}");
        // Step 2 with one prior hit: (1 + 1)/(2 + 1) = 2/3.
        let cell = report
            .rows
            .iter()
            .find(|r| r.label == "step=2 prior-hits=1")
            .expect("cell present");
        assert!((cell.expected - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_means_near_population_mean() {
        let p = Population::two_color_urn(5, 5).unwrap();
        for model in [
            CouplingModel::Replacement,
            CouplingModel::KFold { k: 2 },
            CouplingModel::Surreplacement { d: 2 },
        ] {
            let emp = collect(&p, &model, 4, 50_000, 13).unwrap();
            let sm = emp.summary();
            let expected = 4.0 * p.mean();
            let se_s = (sm.var_s / emp.trials as f64).sqrt();
            let se_t = (sm.var_t / emp.trials as f64).sqrt();
            assert!((sm.mean_s - expected).abs() <= SIGMA * se_s, "{model:?} S");
            assert!((sm.mean_t - expected).abs() <= SIGMA * se_t, "{model:?} T");
        }
    }

    #[test]
    fn csv_shape() {
        let p = Population::from_values(vec![7.0]).unwrap();
        let emp = collect(&p, &CouplingModel::Replacement, 1, 10, 0).unwrap();
        assert_eq!(emp.to_csv(), "s,t,count\n7,7,10\n");
    }
}
