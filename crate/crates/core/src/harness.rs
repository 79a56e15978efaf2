//! Sequential-measurement oracle, random generators and verification suites.
//!
//! The oracle simply performs the observers' bare measurements one after the
//! other on the maximally mixed state. Every pooling rule is checked against
//! the state this chain produces.

use std::ops::RangeInclusive;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, ensure_same_dim, frobenius_distance, hermitian_inv_sqrt, hermitian_part,
    validate_density, ComplexMatrix, DensityMatrix,
};
use crate::measurement::{
    bare_update, posterior_from_outcome, sample_outcome, validate_povm, Povm, COMPLETENESS_TOL,
};
use crate::par::Execution;
use crate::pooling::{
    classical_pool, pool_ordered, pool_ordered_multi, pool_symmetric, pool_symmetric_multi_with,
    NormMode, ProbabilityVector,
};

/// Distance above which a pooled state disagrees with the oracle.
pub const ORACLE_TOL: f64 = 1e-10;

/// Re-draws of a sampled outcome chain that hit a zero-probability update.
pub const MAX_RESAMPLES: usize = 32;

/// Fresh draws attempted by [`random_povm`] when the effect sum is singular.
pub const POVM_ATTEMPTS: usize = 8;

const SINGULAR_SUM: f64 = 1e-10;
const TRIAL_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
const OUTCOMES: RangeInclusive<usize> = 2..=4;

/// Seed of trial `trial`: the base seed advanced by a fixed stride per trial.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed.wrapping_add(trial.wrapping_mul(TRIAL_STRIDE))
}

/// Deterministic random stream for a seed.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `G G† / Tr[G G†]` with `G` a `dim × rank` complex Gaussian matrix.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let g = gaussian_matrix(dim, rank, rng);
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    validate_density(&hermitian_part(&gg.unscale(tr)), 1e-9)
}

/// Random full-rank POVM: `E_i = S^{-1/2} G_i S^{-1/2}` with `G_i = X_i X_i†`
/// and `S = Σ G_i`.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, n_outcomes: usize, rng: &mut R) -> Result<Povm> {
    if n_outcomes < 2 {
        return Err(Error::TooFewOutcomes {
            outcomes: n_outcomes,
        });
    }
    let mut last = Error::SingularSum {
        min_eigenvalue: 0.0,
    };
    for _ in 0..POVM_ATTEMPTS {
        let raw: Vec<ComplexMatrix> = (0..n_outcomes)
            .map(|_| {
                let x = gaussian_matrix(dim, dim, rng);
                &x * x.adjoint()
            })
            .collect();
        let sum = raw
            .iter()
            .fold(ComplexMatrix::zeros(dim, dim), |acc, g| acc + g);
        let inv_sqrt = match hermitian_inv_sqrt(&sum, SINGULAR_SUM) {
            Ok(m) => m,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let elements: Vec<ComplexMatrix> = raw
            .iter()
            .map(|g| hermitian_part(&(&inv_sqrt * g * &inv_sqrt)))
            .collect();
        return validate_povm(&elements, COMPLETENESS_TOL);
    }
    Err(last)
}

/// Random POVM whose effects are all diagonal (a classical measurement).
pub fn random_diagonal_povm<R: Rng + ?Sized>(dim: usize, n_outcomes: usize, rng: &mut R) -> Result<Povm> {
    if n_outcomes < 2 {
        return Err(Error::TooFewOutcomes {
            outcomes: n_outcomes,
        });
    }
    // Each diagonal entry is split across outcomes by normalized exponentials.
    let weights: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            let w: Vec<f64> = (0..n_outcomes).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect()
        })
        .collect();
    let elements: Vec<ComplexMatrix> = (0..n_outcomes)
        .map(|k| {
            ComplexMatrix::from_diagonal(&DVector::from_iterator(
                dim,
                weights.iter().map(|row| c64(row[k], 0.0)),
            ))
        })
        .collect();
    validate_povm(&elements, COMPLETENESS_TOL)
}

/// A multi-observer experiment: POVMs in measurement order, a seed, and the
/// outcomes once sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub dim: usize,
    pub povms: Vec<Povm>,
    pub seed: u64,
    pub sampled_outcomes: Vec<usize>,
}

impl Scenario {
    pub fn new(povms: Vec<Povm>, seed: u64) -> Result<Self> {
        let dim = povms.first().map(Povm::dim).ok_or(Error::TooFewStates { count: 0 })?;
        for p in &povms {
            ensure_same_dim(dim, p.dim())?;
        }
        Ok(Scenario {
            dim,
            povms,
            seed,
            sampled_outcomes: Vec::new(),
        })
    }

    /// Samples the outcome chain from a stream seeded with `self.seed`.
    pub fn run(&mut self) -> Result<usize> {
        let mut rng = stream(self.seed);
        self.run_with(&mut rng)
    }

    /// Samples each observer's outcome from the state left by the previous
    /// observers, re-drawing chains that hit a zero-probability update.
    /// Returns the number of re-draws.
    pub fn run_with<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        let mut last = None;
        for attempt in 0..=MAX_RESAMPLES {
            match self.sample_chain(rng) {
                Ok(outcomes) => {
                    self.sampled_outcomes = outcomes;
                    return Ok(attempt);
                }
                Err(e @ Error::ZeroProbability { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn sample_chain<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        let mut rho = DensityMatrix::maximally_mixed(self.dim);
        let mut outcomes = Vec::with_capacity(self.povms.len());
        for povm in &self.povms {
            let k = sample_outcome(povm, &rho, rng)?;
            rho = bare_update(povm.element(k), &rho)?;
            outcomes.push(k);
        }
        Ok(outcomes)
    }

    fn check_sampled(&self) -> Result<()> {
        if self.sampled_outcomes.len() != self.povms.len() {
            return Err(Error::NotSampled {
                sampled: self.sampled_outcomes.len(),
                observers: self.povms.len(),
            });
        }
        Ok(())
    }

    /// Each observer's own state of knowledge `E_k / Tr[E_k]`.
    pub fn posteriors(&self) -> Result<Vec<DensityMatrix>> {
        self.check_sampled()?;
        self.povms
            .iter()
            .zip(&self.sampled_outcomes)
            .map(|(p, &k)| posterior_from_outcome(p.element(k)))
            .collect()
    }
}

/// State of an observer holding every record: the sampled bare measurements
/// applied in order to `I / dim`.
pub fn oracle_pool(scenario: &Scenario) -> Result<DensityMatrix> {
    scenario.check_sampled()?;
    scenario
        .povms
        .iter()
        .zip(&scenario.sampled_outcomes)
        .try_fold(DensityMatrix::maximally_mixed(scenario.dim), |rho, (p, &k)| {
            bare_update(p.element(k), &rho)
        })
}

/// Probability of observing `outcomes` when the POVMs are measured in order
/// on `I / dim`.
pub fn chain_probability(povms: &[Povm], outcomes: &[usize]) -> Result<f64> {
    let dim = povms.first().map(Povm::dim).ok_or(Error::TooFewStates { count: 0 })?;
    let mut rho = DensityMatrix::maximally_mixed(dim);
    let mut prob = 1.0;
    for (p, &k) in povms.iter().zip(outcomes) {
        let e = p.element(k);
        let pk = e.probability(&rho)?;
        prob *= pk;
        if prob == 0.0 {
            return Ok(0.0);
        }
        rho = bare_update(e, &rho)?;
    }
    Ok(prob)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Failure {
    pub seed: u64,
    /// `null` in JSON when the trial could not be evaluated at all.
    pub distance: f64,
}

/// Aggregate of a verification suite. Maxima and failures are merged in
/// trial-index order, so the report does not depend on execution order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub trials: usize,
    pub tolerance: f64,
    pub resamples: usize,
    pub max_oracle_distance: f64,
    pub max_norm_discrepancy: f64,
    pub mean_norm_discrepancy: f64,
    /// Three-observer suite only: paper-vs-trace normalizer gap on commuting triples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_commuting_discrepancy: Option<f64>,
    /// Three-observer suite only: symmetric outputs failing density validation.
    pub invalid_outputs: usize,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.invalid_outputs == 0
    }

    /// Combines reports of the same suite run over several dimensions.
    pub fn merge(reports: Vec<VerificationReport>) -> Option<VerificationReport> {
        let mut iter = reports.into_iter();
        let mut acc = iter.next()?;
        for r in iter {
            let total = acc.trials + r.trials;
            acc.mean_norm_discrepancy = if total == 0 {
                0.0
            } else {
                (acc.mean_norm_discrepancy * acc.trials as f64
                    + r.mean_norm_discrepancy * r.trials as f64)
                    / total as f64
            };
            acc.trials = total;
            acc.resamples += r.resamples;
            acc.max_oracle_distance = acc.max_oracle_distance.max(r.max_oracle_distance);
            acc.max_norm_discrepancy = acc.max_norm_discrepancy.max(r.max_norm_discrepancy);
            acc.max_commuting_discrepancy = match (acc.max_commuting_discrepancy, r.max_commuting_discrepancy) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
            acc.invalid_outputs += r.invalid_outputs;
            acc.failures.extend(r.failures);
        }
        Some(acc)
    }
}

#[derive(Debug, Clone, Default)]
struct TrialOutcome {
    seed: u64,
    resamples: usize,
    oracle_distance: f64,
    norm_discrepancy: f64,
    commuting_discrepancy: Option<f64>,
    invalid_output: bool,
    failed: bool,
}

impl TrialOutcome {
    fn errored(seed: u64) -> Self {
        TrialOutcome {
            seed,
            oracle_distance: f64::INFINITY,
            failed: true,
            ..Default::default()
        }
    }
}

fn summarize(suite: &str, tolerance: f64, outcomes: Vec<TrialOutcome>) -> VerificationReport {
    let trials = outcomes.len();
    let mut report = VerificationReport {
        suite: suite.to_string(),
        trials,
        tolerance,
        resamples: 0,
        max_oracle_distance: 0.0,
        max_norm_discrepancy: 0.0,
        mean_norm_discrepancy: 0.0,
        max_commuting_discrepancy: None,
        invalid_outputs: 0,
        failures: Vec::new(),
    };
    let mut sum = 0.0;
    for t in outcomes {
        report.resamples += t.resamples;
        report.max_oracle_distance = report.max_oracle_distance.max(t.oracle_distance);
        report.max_norm_discrepancy = report.max_norm_discrepancy.max(t.norm_discrepancy);
        sum += t.norm_discrepancy;
        if let Some(c) = t.commuting_discrepancy {
            report.max_commuting_discrepancy =
                Some(report.max_commuting_discrepancy.unwrap_or(0.0).max(c));
        }
        if t.invalid_output {
            report.invalid_outputs += 1;
        }
        if t.failed {
            report.failures.push(Failure {
                seed: t.seed,
                distance: t.oracle_distance,
            });
        }
    }
    if trials > 0 {
        report.mean_norm_discrepancy = sum / trials as f64;
    }
    report
}

fn sampled_scenario<R: Rng + ?Sized>(povms: Vec<Povm>, seed: u64, rng: &mut R) -> Result<(Scenario, usize)> {
    let mut scenario = Scenario::new(povms, seed)?;
    let resamples = scenario.run_with(rng)?;
    Ok((scenario, resamples))
}

fn dist(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    frobenius_distance(a.as_matrix(), b.as_matrix()).unwrap_or(f64::INFINITY)
}

/// Two observers with random POVMs: the ordered rule on their posteriors must
/// reproduce the sequential chain. Runs `trials` trials for every dimension
/// in `dims`.
pub fn verify_two_observer(
    trials: usize,
    dims: RangeInclusive<usize>,
    tol: f64,
    seed: u64,
) -> VerificationReport {
    verify_two_observer_with(Execution::default(), trials, dims, tol, seed)
}

pub fn verify_two_observer_with(
    exec: Execution,
    trials: usize,
    dims: RangeInclusive<usize>,
    tol: f64,
    seed: u64,
) -> VerificationReport {
    let dim_list: Vec<usize> = dims.collect();
    let outcomes = exec.map_indexed(trials * dim_list.len(), |i| {
        let dim = dim_list[i / trials];
        let s = trial_seed(seed, i as u64);
        two_observer_trial(dim, s, tol).unwrap_or_else(|_| TrialOutcome::errored(s))
    });
    summarize("two", tol, outcomes)
}

fn two_observer_trial(dim: usize, seed: u64, tol: f64) -> Result<TrialOutcome> {
    let mut rng = stream(seed);
    let alice = random_povm(dim, rng.random_range(OUTCOMES), &mut rng)?;
    let bob = random_povm(dim, rng.random_range(OUTCOMES), &mut rng)?;
    let (scenario, resamples) = sampled_scenario(vec![alice, bob], seed, &mut rng)?;
    let posts = scenario.posteriors()?;
    let report = pool_ordered(&posts[0], &posts[1])?;
    let distance = dist(&report.pooled, &oracle_pool(&scenario)?);
    Ok(TrialOutcome {
        seed,
        resamples,
        oracle_distance: distance,
        norm_discrepancy: report.norm_discrepancy,
        failed: !(distance <= tol),
        ..Default::default()
    })
}

/// Diagonal POVMs: the symmetric rule must collapse to the classical product rule.
pub fn verify_commuting_reduction(trials: usize, dim: usize, tol: f64, seed: u64) -> VerificationReport {
    verify_commuting_reduction_with(Execution::default(), trials, dim, tol, seed)
}

pub fn verify_commuting_reduction_with(
    exec: Execution,
    trials: usize,
    dim: usize,
    tol: f64,
    seed: u64,
) -> VerificationReport {
    let outcomes = exec.map_indexed(trials, |i| {
        let s = trial_seed(seed, i as u64);
        commuting_trial(dim, s, tol).unwrap_or_else(|_| TrialOutcome::errored(s))
    });
    summarize("commuting", tol, outcomes)
}

fn diag_probs(rho: &DensityMatrix) -> Result<ProbabilityVector> {
    let d = rho.diagonal();
    let total: f64 = d.iter().sum();
    ProbabilityVector::new(d.into_iter().map(|p| p.max(0.0) / total).collect())
}

fn classical_state(p: &ProbabilityVector) -> Result<DensityMatrix> {
    DensityMatrix::from_diagonal(p.probs())
}

fn commuting_trial(dim: usize, seed: u64, tol: f64) -> Result<TrialOutcome> {
    let mut rng = stream(seed);
    let alice = random_diagonal_povm(dim, rng.random_range(OUTCOMES), &mut rng)?;
    let bob = random_diagonal_povm(dim, rng.random_range(OUTCOMES), &mut rng)?;
    let (scenario, resamples) = sampled_scenario(vec![alice, bob], seed, &mut rng)?;
    let posts = scenario.posteriors()?;
    let report = pool_symmetric(&posts[0], &posts[1])?;
    let classical = classical_pool(&diag_probs(&posts[0])?, &diag_probs(&posts[1])?)?;
    let distance = dist(&report.pooled, &classical_state(&classical)?);
    Ok(TrialOutcome {
        seed,
        resamples,
        oracle_distance: distance,
        norm_discrepancy: report.norm_discrepancy,
        failed: !(distance <= tol),
        ..Default::default()
    })
}

/// Three observers: ordered rule against the three-step oracle, validity of
/// the symmetric rule, and the survey of its two normalizers. Non-commuting
/// normalizer gaps are data; on commuting triples they must vanish.
pub fn verify_three_observer(trials: usize, dim: usize, seed: u64) -> VerificationReport {
    verify_three_observer_with(Execution::default(), trials, dim, seed)
}

pub fn verify_three_observer_with(
    exec: Execution,
    trials: usize,
    dim: usize,
    seed: u64,
) -> VerificationReport {
    let outcomes = exec.map_indexed(trials, |i| {
        let s = trial_seed(seed, i as u64);
        three_observer_trial(dim, s).unwrap_or_else(|_| TrialOutcome::errored(s))
    });
    summarize("three", ORACLE_TOL, outcomes)
}

fn three_observer_trial(dim: usize, seed: u64) -> Result<TrialOutcome> {
    let mut rng = stream(seed);
    let povms = (0..3)
        .map(|_| random_povm(dim, rng.random_range(OUTCOMES), &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let (scenario, mut resamples) = sampled_scenario(povms, seed, &mut rng)?;
    let posts = scenario.posteriors()?;
    let ordered = pool_ordered_multi(&posts)?;
    let mut distance = dist(&ordered.pooled, &oracle_pool(&scenario)?);
    let symmetric = pool_symmetric_multi_with(Execution::Sequential, &posts, NormMode::Trace)?;
    let invalid_output = validate_density(&symmetric.output(), 1e-9).is_err();

    let povms = (0..3)
        .map(|_| random_diagonal_povm(dim, rng.random_range(OUTCOMES), &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let (commuting, extra) = sampled_scenario(povms, seed, &mut rng)?;
    resamples += extra;
    let cposts = commuting.posteriors()?;
    let creport = pool_symmetric_multi_with(Execution::Sequential, &cposts, NormMode::Paper)?;
    let probs = cposts.iter().map(diag_probs).collect::<Result<Vec<_>>>()?;
    let classical = classical_pool(&classical_pool(&probs[0], &probs[1])?, &probs[2])?;
    distance = distance.max(dist(&creport.pooled, &classical_state(&classical)?));

    Ok(TrialOutcome {
        seed,
        resamples,
        oracle_distance: distance,
        norm_discrepancy: symmetric.norm_discrepancy,
        commuting_discrepancy: Some(creport.norm_discrepancy),
        invalid_output,
        failed: !(distance <= ORACLE_TOL) || !(creport.norm_discrepancy <= ORACLE_TOL),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use crate::measurement::outcome_probabilities;

    #[test]
    fn random_density_pure_and_full_rank() {
        let mut rng = stream(1);
        let pure = random_density(2, 1, &mut rng).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        let full = random_density(4, 4, &mut rng).unwrap();
        assert!(hermitian_eigen(full.as_matrix()).unwrap().min() > 0.0);
        assert!(matches!(
            random_density(2, 3, &mut rng),
            Err(Error::BadRank { .. })
        ));
        assert!(matches!(
            random_density(2, 0, &mut rng),
            Err(Error::BadRank { .. })
        ));
    }

    #[test]
    fn random_generators_are_deterministic() {
        let a = random_density(3, 2, &mut stream(9)).unwrap();
        let b = random_density(3, 2, &mut stream(9)).unwrap();
        assert_eq!(a, b);
        let p = random_povm(2, 2, &mut stream(9)).unwrap();
        let q = random_povm(2, 2, &mut stream(9)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn random_povm_is_complete() {
        let mut rng = stream(5);
        for dim in 1..=5 {
            let m = random_povm(dim, 4, &mut rng).unwrap();
            let p = outcome_probabilities(&m, &DensityMatrix::maximally_mixed(dim)).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(matches!(
            random_povm(2, 1, &mut rng),
            Err(Error::TooFewOutcomes { .. })
        ));
    }

    #[test]
    fn repeated_projection_oracle() {
        let z = Povm::computational_basis(2);
        let mut s = Scenario::new(vec![z.clone(), z], 0).unwrap();
        s.sampled_outcomes = vec![0, 0];
        let rho = oracle_pool(&s).unwrap();
        assert_eq!(rho.diagonal(), vec![1.0, 0.0]);
        s.sampled_outcomes = vec![0, 1];
        assert!(matches!(oracle_pool(&s), Err(Error::ZeroProbability { .. })));
    }

    #[test]
    fn unsampled_scenario_rejected() {
        let z = Povm::computational_basis(2);
        let s = Scenario::new(vec![z], 0).unwrap();
        assert!(matches!(oracle_pool(&s), Err(Error::NotSampled { .. })));
        assert!(Scenario::new(vec![Povm::computational_basis(2), Povm::computational_basis(3)], 0).is_err());
    }

    #[test]
    fn projective_chain_never_picks_impossible_outcome() {
        let z = Povm::computational_basis(2);
        for seed in 0..200 {
            let mut s = Scenario::new(vec![z.clone(), z.clone()], seed).unwrap();
            assert_eq!(s.run().unwrap(), 0);
            assert_eq!(s.sampled_outcomes[0], s.sampled_outcomes[1]);
        }
    }

    #[test]
    fn commuting_scenario_matches_classical_pool() {
        let mut rng = stream(3);
        let a = random_diagonal_povm(4, 3, &mut rng).unwrap();
        let b = random_diagonal_povm(4, 2, &mut rng).unwrap();
        let mut s = Scenario::new(vec![a, b], 3).unwrap();
        s.run().unwrap();
        let posts = s.posteriors().unwrap();
        let c = classical_pool(&diag_probs(&posts[0]).unwrap(), &diag_probs(&posts[1]).unwrap())
            .unwrap();
        let oracle = oracle_pool(&s).unwrap();
        for (x, y) in oracle.diagonal().iter().zip(c.probs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dim_two_projective_commuting() {
        let z = Povm::computational_basis(2);
        let mut s = Scenario::new(vec![z.clone(), z], 17).unwrap();
        s.run().unwrap();
        let posts = s.posteriors().unwrap();
        assert_eq!(posts[0], posts[1]);
        let r = pool_symmetric(&posts[0], &posts[1]).unwrap();
        assert!(dist(&r.pooled, &posts[0]) < 1e-15);
    }

    #[test]
    fn suites_small_runs_pass_and_are_deterministic() {
        let a = verify_two_observer(20, 2..=3, ORACLE_TOL, 42);
        assert!(a.passed(), "{a:?}");
        assert_eq!(a.trials, 40);
        assert_eq!(a, verify_two_observer(20, 2..=3, ORACLE_TOL, 42));
        let seq = verify_two_observer_with(Execution::Sequential, 20, 2..=3, ORACLE_TOL, 42);
        assert_eq!(a, seq);

        let c = verify_commuting_reduction(20, 5, ORACLE_TOL, 1);
        assert!(c.passed(), "{c:?}");
        let t = verify_three_observer(20, 2, 1);
        assert!(t.passed(), "{t:?}");
        assert!(t.max_commuting_discrepancy.unwrap() <= ORACLE_TOL);
    }

    #[test]
    fn merge_combines_maxima_and_means() {
        let a = verify_commuting_reduction(5, 2, ORACLE_TOL, 1);
        let b = verify_commuting_reduction(15, 3, ORACLE_TOL, 2);
        let m = VerificationReport::merge(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(m.trials, 20);
        assert_eq!(
            m.max_oracle_distance,
            a.max_oracle_distance.max(b.max_oracle_distance)
        );
        let mean = (a.mean_norm_discrepancy * 5.0 + b.mean_norm_discrepancy * 15.0) / 20.0;
        assert!((m.mean_norm_discrepancy - mean).abs() < 1e-30);
        assert!(VerificationReport::merge(vec![]).is_none());
    }
}
