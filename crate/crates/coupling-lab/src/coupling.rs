//! Two-urn coupling processes.
//!
//! Each process drives a Y-urn draw sequence (with replacement, without
//! replacement from the k-fold urn, or with surreplacement) and labels the
//! Y-balls lazily from an X-urn that is always drawn without replacement.
//! Running n Y-steps and then completing the X-side prefix to length n gives
//! one coupled trajectory whose sums `(S_n, T_n)` have the two schemes'
//! marginal laws and satisfy the martingale identity in expectation.
//!
//! Urn state is kept as counts (assigned labels plus per-label weight), so a
//! step costs O(N) even though the surreplacement urn grows by d-1 balls per
//! draw. Every Y-step consumes exactly one uniform integer; every X-draw one
//! more. With d = 1 the surreplacement weights collapse to the replacement
//! weights, so the two implementations consume the stream identically and
//! produce identical trajectories, not merely identical laws.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::population::Population;
use crate::rng::{uniform_index, RngStream};
use crate::{Error, Result};

/// Which Y-side sampling scheme is coupled against sampling without
/// replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CouplingModel {
    /// Independent uniform draws (Y-balls replaced after each step).
    Replacement,
    /// Draws without replacement from the k-fold multiplied population.
    KFold { k: usize },
    /// Each draw returned together with d-1 fresh copies of itself.
    Surreplacement { d: usize },
}

impl CouplingModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CouplingModel::Replacement => Ok(()),
            CouplingModel::KFold { k } if k >= 1 => Ok(()),
            CouplingModel::KFold { .. } => {
                Err(Error::InvalidArgument("kfold requires k >= 1".into()))
            }
            CouplingModel::Surreplacement { d } if d >= 1 => Ok(()),
            CouplingModel::Surreplacement { .. } => {
                Err(Error::InvalidArgument("surreplacement requires d >= 1".into()))
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            CouplingModel::Replacement => "replacement".into(),
            CouplingModel::KFold { k } => format!("kfold(k={k})"),
            CouplingModel::Surreplacement { d } => format!("surreplacement(d={d})"),
        }
    }
}

/// One realized run of a coupling process.
///
/// `xi_prefix` holds the first n labels drawn from the X-urn (0-based,
/// pairwise distinct); `eta[i]` is the label of the Y-ball drawn at step i
/// and always equals some `xi_prefix[j]` with `j <= i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub xi_prefix: Vec<usize>,
    pub eta: Vec<usize>,
    /// X-draws triggered during the n Y-steps, before prefix completion.
    pub x_draw_count: usize,
    pub s: f64,
    pub t: f64,
    pub n: usize,
    pub seed: RngStream,
}

/// Returns `(S_n, T_n)` as stored on the trajectory.
pub fn coupled_sums(traj: &Trajectory) -> (f64, f64) {
    (traj.s, traj.t)
}

fn check_n(pop: &Population, n: usize) -> Result<()> {
    if n == 0 || n > pop.size() {
        return Err(Error::InvalidArgument(format!(
            "sample size n={n} must satisfy 1 <= n <= N={}",
            pop.size()
        )));
    }
    Ok(())
}

/// Uniform draw without replacement from the not-yet-used X labels.
fn draw_x(rng: &mut ChaCha8Rng, remaining: &mut Vec<usize>) -> usize {
    let i = uniform_index(rng, remaining.len());
    remaining.swap_remove(i)
}

fn finish(
    pop: &Population,
    n: usize,
    seed: RngStream,
    rng: &mut ChaCha8Rng,
    mut assigned: Vec<usize>,
    eta: Vec<usize>,
    remaining_x: &mut Vec<usize>,
) -> Trajectory {
    let x_draw_count = assigned.len();
    while assigned.len() < n {
        assigned.push(draw_x(rng, remaining_x));
    }
    let s = assigned.iter().map(|&i| pop.value(i)).sum();
    let t = eta.iter().map(|&i| pop.value(i)).sum();
    debug_assert!(eta.len() == n && assigned.len() == n);
    debug_assert!(eta.iter().enumerate().all(|(i, l)| assigned[..=i.min(n - 1)].contains(l)));
    Trajectory { xi_prefix: assigned, eta, x_draw_count, s, t, n, seed }
}

/// Coupled run of sampling with replacement against sampling without
/// replacement: n Y-steps over N balls, labeling each freshly touched ball
/// from the X-urn, then completion of the X prefix.
pub fn run_replacement(pop: &Population, n: usize, seed: RngStream) -> Result<Trajectory> {
    check_n(pop, n)?;
    let n_pop = pop.size();
    let mut rng = seed.rng();
    let mut remaining_x: Vec<usize> = (0..n_pop).collect();
    let mut assigned: Vec<usize> = Vec::with_capacity(n);
    let mut eta: Vec<usize> = Vec::with_capacity(n);

    for _ in 0..n {
        let v = uniform_index(&mut rng, n_pop);
        if v < assigned.len() {
            // Hit a labeled ball; it goes straight back.
            eta.push(assigned[v]);
        } else {
            let label = draw_x(&mut rng, &mut remaining_x);
            assigned.push(label);
            eta.push(label);
        }
    }
    Ok(finish(pop, n, seed, &mut rng, assigned, eta, &mut remaining_x))
}

/// Coupled run of sampling without replacement from the k-fold urn.
///
/// Cohort state is a remaining-ball count per touched cohort plus the number
/// of untouched cohorts; a freshly touched cohort takes the next X label for
/// all k of its balls.
pub fn run_kfold(pop: &Population, k: usize, n: usize, seed: RngStream) -> Result<Trajectory> {
    CouplingModel::KFold { k }.validate()?;
    check_n(pop, n)?;
    let n_pop = pop.size();
    let mut rng = seed.rng();
    let mut remaining_x: Vec<usize> = (0..n_pop).collect();
    let mut assigned: Vec<usize> = Vec::with_capacity(n);
    let mut cohort_left: Vec<usize> = Vec::with_capacity(n);
    let mut eta: Vec<usize> = Vec::with_capacity(n);

    for step in 0..n {
        let total = k * n_pop - step;
        let mut v = uniform_index(&mut rng, total);
        let mut hit = None;
        for (j, &left) in cohort_left.iter().enumerate() {
            if v < left {
                hit = Some(j);
                break;
            }
            v -= left;
        }
        match hit {
            Some(j) => {
                eta.push(assigned[j]);
                cohort_left[j] -= 1;
            }
            None => {
                // One of the k * untouched unlabeled balls.
                let label = draw_x(&mut rng, &mut remaining_x);
                assigned.push(label);
                cohort_left.push(k - 1);
                eta.push(label);
            }
        }
    }
    Ok(finish(pop, n, seed, &mut rng, assigned, eta, &mut remaining_x))
}

/// Coupled run of sampling with surreplacement: after each draw the ball
/// returns together with d-1 new copies of its label, so a label hit j times
/// carries weight 1 + j(d-1) out of N + (i-1)(d-1) at step i.
pub fn run_surreplacement(pop: &Population, d: usize, n: usize, seed: RngStream) -> Result<Trajectory> {
    CouplingModel::Surreplacement { d }.validate()?;
    check_n(pop, n)?;
    let n_pop = pop.size();
    let mut rng = seed.rng();
    let mut remaining_x: Vec<usize> = (0..n_pop).collect();
    let mut assigned: Vec<usize> = Vec::with_capacity(n);
    let mut hits: Vec<usize> = Vec::with_capacity(n);
    let mut eta: Vec<usize> = Vec::with_capacity(n);

    for step in 0..n {
        let total = n_pop + step * (d - 1);
        let mut v = uniform_index(&mut rng, total);
        let mut hit = None;
        for (j, &h) in hits.iter().enumerate() {
            let weight = 1 + h * (d - 1);
            if v < weight {
                hit = Some(j);
                break;
            }
            v -= weight;
        }
        match hit {
            Some(j) => {
                eta.push(assigned[j]);
                hits[j] += 1;
            }
            None => {
                let label = draw_x(&mut rng, &mut remaining_x);
                assigned.push(label);
                hits.push(1);
                eta.push(label);
            }
        }
    }
    Ok(finish(pop, n, seed, &mut rng, assigned, eta, &mut remaining_x))
}

/// Dispatches on the model kind.
pub fn run_model(pop: &Population, model: &CouplingModel, n: usize, seed: RngStream) -> Result<Trajectory> {
    match *model {
        CouplingModel::Replacement => run_replacement(pop, n, seed),
        CouplingModel::KFold { k } => run_kfold(pop, k, n, seed),
        CouplingModel::Surreplacement { d } => run_surreplacement(pop, d, n, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pop(values: &[f64]) -> Population {
        Population::from_values(values.to_vec()).unwrap()
    }

    fn stream(i: u64) -> RngStream {
        RngStream::new(0xC0FFEE, i)
    }

    #[test]
    fn rejects_bad_sizes() {
        let p = pop(&[0.0, 1.0]);
        assert!(matches!(run_replacement(&p, 0, stream(0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(run_replacement(&p, 3, stream(0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(run_kfold(&p, 0, 1, stream(0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(run_surreplacement(&p, 0, 1, stream(0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn singleton_population_forces_equal_sums() {
        let p = pop(&[7.0]);
        for i in 0..32 {
            let tr = run_replacement(&p, 1, stream(i)).unwrap();
            assert_eq!(coupled_sums(&tr), (7.0, 7.0));
            let tr = run_surreplacement(&p, 5, 1, stream(i)).unwrap();
            assert_eq!(coupled_sums(&tr), (7.0, 7.0));
            let tr = run_kfold(&p, 3, 1, stream(i)).unwrap();
            assert_eq!(coupled_sums(&tr), (7.0, 7.0));
        }
    }

    #[test]
    fn full_sample_sums_whole_population() {
        let p = pop(&[0.0, 1.0, 2.0]);
        for i in 0..32 {
            let tr = run_replacement(&p, 3, stream(i)).unwrap();
            assert_eq!(tr.s, 3.0);
        }
    }

    #[test]
    fn kfold_k1_mirrors_x_sampling() {
        // With k = 1 every Y-step touches a fresh cohort, so eta repeats the
        // xi prefix exactly and S = T at every n.
        let p = pop(&[0.5, -1.0, 2.0, 4.0]);
        for i in 0..64 {
            for n in 1..=4 {
                let tr = run_kfold(&p, 1, n, stream(i)).unwrap();
                assert_eq!(tr.eta, tr.xi_prefix);
                assert_eq!(tr.s, tr.t);
            }
        }
    }

    #[test]
    fn surreplacement_d1_identical_to_replacement() {
        let p = pop(&[0.0, 1.0, 2.0]);
        for i in 0..256 {
            let a = run_replacement(&p, 3, stream(i)).unwrap();
            let b = run_surreplacement(&p, 1, 3, stream(i)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn eta_occurrences_bounded_by_k() {
        let p = pop(&[0.0, 1.0, 2.0]);
        for i in 0..128 {
            let tr = run_kfold(&p, 2, 3, stream(i)).unwrap();
            for &l in &tr.xi_prefix {
                let occurrences = tr.eta.iter().filter(|&&e| e == l).count();
                assert!(occurrences <= 2);
            }
        }
    }

    proptest! {
        #[test]
        fn trajectory_invariants(seed in 0u64..1024, model_pick in 0usize..3, n in 1usize..=4) {
            let p = pop(&[0.0, 1.0, 2.0, 5.5]);
            let model = match model_pick {
                0 => CouplingModel::Replacement,
                1 => CouplingModel::KFold { k: 2 },
                _ => CouplingModel::Surreplacement { d: 3 },
            };
            let tr = run_model(&p, &model, n, stream(seed)).unwrap();

            // xi prefix is a distinct n-prefix of a permutation.
            prop_assert_eq!(tr.xi_prefix.len(), n);
            let mut seen = std::collections::HashSet::new();
            for &l in &tr.xi_prefix {
                prop_assert!(l < p.size());
                prop_assert!(seen.insert(l));
            }
            // Containment: eta(i) is among the first i xi labels.
            for (i, &e) in tr.eta.iter().enumerate() {
                prop_assert!(tr.xi_prefix[..=i].contains(&e));
            }
            // Stored sums match recomputation from the label sequences.
            let s: f64 = tr.xi_prefix.iter().map(|&i| p.value(i)).sum();
            let t: f64 = tr.eta.iter().map(|&i| p.value(i)).sum();
            prop_assert_eq!(s, tr.s);
            prop_assert_eq!(t, tr.t);
            prop_assert_eq!(coupled_sums(&tr), (tr.s, tr.t));
            prop_assert!(tr.x_draw_count <= n);
        }
    }
}
