//! Knowledge-pooling rules.
//!
//! Every quantum rule here starts from the same object: the nested
//! conjugation `√ρ_n ⋯ √ρ_2 · ρ_1 · √ρ_2 ⋯ √ρ_n` of observers' states, with the
//! observer who measured last outermost. The ordered rules use a single
//! ordering, the symmetric rules average over all of them.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_same_dim, hermitian_sqrt, identity, trace, trace_product, ComplexMatrix, DensityMatrix,
};
use crate::measurement::renormalize;
use crate::par::Execution;

/// Normalizers at or below this make the pooled state undefined.
pub const INCOMPATIBLE: f64 = 1e-12;

/// Largest observer count accepted by [`pool_symmetric_multi`] (720 orderings).
pub const MAX_SYMMETRIC_STATES: usize = 6;

const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// A discrete probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbabilities {
                reason: "empty".into(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidProbabilities {
                reason: format!("entry {p} is negative or not finite"),
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidProbabilities {
                reason: format!("sum is {sum}"),
            });
        }
        Ok(ProbabilityVector(probs))
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `P_A(x) P_B(x) / Σ_x P_A(x) P_B(x)`.
pub fn classical_pool(a: &ProbabilityVector, b: &ProbabilityVector) -> Result<ProbabilityVector> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let product: Vec<f64> = a.0.iter().zip(&b.0).map(|(x, y)| x * y).collect();
    let norm: f64 = product.iter().sum();
    if !(norm > INCOMPATIBLE) {
        return Err(Error::Incompatible { overlap: norm });
    }
    Ok(ProbabilityVector(product.into_iter().map(|p| p / norm).collect()))
}

/// How the symmetric N-observer numerator is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// Divide by the numerator's own trace; always yields a density matrix.
    #[default]
    Trace,
    /// Divide by `n! · Re Tr[ρ_1 ⋯ ρ_n]`.
    Paper,
}

/// A pooled state and the normalization diagnostics behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolReport {
    /// Always trace-normalized, whatever the norm mode.
    pub pooled: DensityMatrix,
    /// Clamped to `[0, 1]`.
    pub compatibility: f64,
    /// `Tr[ρ_A ρ_B]`-style product-trace normalizer (real part).
    pub paper_norm: f64,
    pub paper_norm_imag: f64,
    /// Trace of the numerator actually divided out.
    pub trace_norm: f64,
    pub norm_discrepancy: f64,
    pub norm_mode: NormMode,
}

impl PoolReport {
    fn new(
        pooled: DensityMatrix,
        compatibility: f64,
        paper: nalgebra::Complex<f64>,
        trace_norm: f64,
        norm_mode: NormMode,
    ) -> Self {
        PoolReport {
            pooled,
            compatibility: compatibility.clamp(0.0, 1.0),
            paper_norm: paper.re,
            paper_norm_imag: paper.im,
            trace_norm,
            norm_discrepancy: (paper.re - trace_norm).abs(),
            norm_mode,
        }
    }

    /// The numerator divided by the normalizer selected by `norm_mode`. In
    /// paper mode the trace is `trace_norm / paper_norm`, which differs from
    /// one whenever `norm_discrepancy` is nonzero.
    pub fn output(&self) -> ComplexMatrix {
        match self.norm_mode {
            NormMode::Trace => self.pooled.as_matrix().clone(),
            NormMode::Paper => self
                .pooled
                .as_matrix()
                .scale(self.trace_norm / self.paper_norm),
        }
    }
}

/// `Tr[ρ_A ρ_B]`: how likely the two states of knowledge are to arise together.
pub fn compatibility(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    trace_product(a, b)
}

fn common_dim(states: &[&DensityMatrix]) -> Result<usize> {
    let dim = states[0].dim();
    for s in &states[1..] {
        ensure_same_dim(dim, s.dim())?;
    }
    Ok(dim)
}

fn check_overlap(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let overlap = trace_product(a, b)?;
    if !(overlap > INCOMPATIBLE) {
        return Err(Error::Incompatible { overlap });
    }
    Ok(overlap)
}

/// Nested conjugation for one measurement order; `order[0]` measured first.
fn nested(states: &[&DensityMatrix], sqrts: &[ComplexMatrix], order: &[usize]) -> ComplexMatrix {
    let mut acc = states[order[0]].as_matrix().clone();
    for &i in &order[1..] {
        acc = &sqrts[i] * acc * &sqrts[i];
    }
    acc
}

/// `Tr[ρ_1 ρ_2 ⋯ ρ_n]` in the given order.
fn product_trace(states: &[&DensityMatrix]) -> nalgebra::Complex<f64> {
    let dim = states[0].dim();
    let product = states
        .iter()
        .fold(identity(dim), |acc, s| acc * s.as_matrix());
    trace(&product)
}

fn sqrts_of(states: &[&DensityMatrix]) -> Result<Vec<ComplexMatrix>> {
    states.iter().map(|s| hermitian_sqrt(s.as_matrix())).collect()
}

/// Ordered two-observer rule `√ρ_B ρ_A √ρ_B / Tr[ρ_A ρ_B]`, `first` having
/// measured earlier.
pub fn pool_ordered(first: &DensityMatrix, second: &DensityMatrix) -> Result<PoolReport> {
    ensure_same_dim(first.dim(), second.dim())?;
    let overlap = check_overlap(first, second)?;
    let mut report = ordered_nested(&[first, second])?;
    report.compatibility = overlap.clamp(0.0, 1.0);
    Ok(report)
}

/// Ordered rule for any number of observers, listed in measurement order.
pub fn pool_ordered_multi(states: &[DensityMatrix]) -> Result<PoolReport> {
    let refs: Vec<&DensityMatrix> = states.iter().collect();
    if refs.len() < 2 {
        return Err(Error::TooFewStates { count: refs.len() });
    }
    common_dim(&refs)?;
    ordered_nested(&refs)
}

fn ordered_nested(states: &[&DensityMatrix]) -> Result<PoolReport> {
    let sqrts = sqrts_of(states)?;
    let order: Vec<usize> = (0..states.len()).collect();
    let numerator = nested(states, &sqrts, &order);
    let trace_norm = trace(&numerator).re;
    if !(trace_norm > INCOMPATIBLE) {
        return Err(Error::Incompatible {
            overlap: trace_norm,
        });
    }
    let pooled = renormalize(numerator, trace_norm)?;
    let paper = product_trace(states);
    Ok(PoolReport::new(
        pooled,
        trace_norm,
        paper,
        trace_norm,
        NormMode::Trace,
    ))
}

/// Symmetric two-observer rule
/// `(√ρ_A ρ_B √ρ_A + √ρ_B ρ_A √ρ_B) / 2Tr[ρ_A ρ_B]`.
pub fn pool_symmetric(a: &DensityMatrix, b: &DensityMatrix) -> Result<PoolReport> {
    ensure_same_dim(a.dim(), b.dim())?;
    let overlap = check_overlap(a, b)?;
    let sa = hermitian_sqrt(a.as_matrix())?;
    let sb = hermitian_sqrt(b.as_matrix())?;
    let b_after_a = &sa * b.as_matrix() * &sa;
    let a_after_b = &sb * a.as_matrix() * &sb;
    let numerator = b_after_a + a_after_b;
    let trace_norm = trace(&numerator).re;
    let pooled = renormalize(numerator, trace_norm)?;
    let paper = nalgebra::Complex::new(2.0 * overlap, 0.0);
    Ok(PoolReport::new(
        pooled,
        overlap,
        paper,
        trace_norm,
        NormMode::Trace,
    ))
}

/// Symmetric rule for `2..=6` observers: the nested conjugation summed over
/// all `n!` measurement orders.
pub fn pool_symmetric_multi(states: &[DensityMatrix], norm_mode: NormMode) -> Result<PoolReport> {
    pool_symmetric_multi_with(Execution::default(), states, norm_mode)
}

pub fn pool_symmetric_multi_with(
    exec: Execution,
    states: &[DensityMatrix],
    norm_mode: NormMode,
) -> Result<PoolReport> {
    let n = states.len();
    if n < 2 {
        return Err(Error::TooFewStates { count: n });
    }
    if n > MAX_SYMMETRIC_STATES {
        return Err(Error::TooManyStates {
            count: n,
            max: MAX_SYMMETRIC_STATES,
        });
    }
    let refs: Vec<&DensityMatrix> = states.iter().collect();
    let dim = common_dim(&refs)?;
    let sqrts = sqrts_of(&refs)?;
    let orders: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let terms = exec.map_indexed(orders.len(), |i| nested(&refs, &sqrts, &orders[i]));
    let numerator = terms
        .into_iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, t| acc + t);
    let trace_norm = trace(&numerator).re;
    if !(trace_norm > INCOMPATIBLE) {
        return Err(Error::Incompatible {
            overlap: trace_norm,
        });
    }
    let orderings = orders.len() as f64;
    let paper = product_trace(&refs) * orderings;
    if norm_mode == NormMode::Paper && !(paper.re > INCOMPATIBLE) {
        return Err(Error::Incompatible { overlap: paper.re });
    }
    let pooled = renormalize(numerator, trace_norm)?;
    let compat = if n == 2 {
        trace_product(refs[0], refs[1])?
    } else {
        trace_norm / orderings
    };
    Ok(PoolReport::new(pooled, compat, paper, trace_norm, norm_mode))
}
