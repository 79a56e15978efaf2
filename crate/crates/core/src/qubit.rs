//! Closed-form symmetric pooling for a single qubit in Bloch coordinates.
//!
//! With `ρ = (I + v·σ)/2`, symmetric pooling of `a` and `b` gives the Bloch
//! vector `(α a + β b) / Tr[ρ_A ρ_B]` where `Tr[ρ_A ρ_B] = (1 + a·b)/2` and
//!
//! ```text
//! α = 1/2 + (a·b / f(|a|) - |b|² / f(|b|)) / 4
//! β = 1/2 + (a·b / f(|b|) - |a|² / f(|a|)) / 4
//! f(x) = 1 + √(1 - x²)
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{BlochVector, ZERO_EIGEN_FLOOR};
use crate::pooling::INCOMPATIBLE;

const DOMAIN_SLACK: f64 = 1e-12;

// Dividing by a small compatibility amplifies rounding in the numerator.
const POOLED_NORM_SLACK: f64 = 1e-9;

// A qubit's smaller eigenvalue is (1 - |v|)/2 ≈ (1 - |v|²)/4. Below this
// floor `1 - x²` is snapped to zero, matching the eigenvalue floor used by
// the dense square root so both routes treat numerically pure states alike.
const PURE_FLOOR: f64 = 4.0 * ZERO_EIGEN_FLOOR;

fn check_unit_interval(x: f64) -> Result<f64> {
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x) {
        return Err(Error::DomainError { x });
    }
    Ok(x.clamp(0.0, 1.0))
}

/// `1 + √(1 - x²)`, in `[1, 2]`.
pub fn purity_factor(x: f64) -> Result<f64> {
    let x = check_unit_interval(x)?;
    let gap = 1.0 - x * x;
    Ok(if gap <= PURE_FLOOR { 1.0 } else { 1.0 + gap.sqrt() })
}

/// `x / (1 + √(1 - x²))`, monotonically increasing on `[0, 1]`.
pub fn certainty_weight(x: f64) -> Result<f64> {
    let x = check_unit_interval(x)?;
    Ok(x / purity_factor(x)?)
}

/// Weights on `a` and `b` in the pooled Bloch vector (before dividing by the
/// compatibility).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

pub fn alpha_beta(a: &BlochVector, b: &BlochVector) -> Result<AlphaBeta> {
    let (na, nb) = (a.norm().min(1.0), b.norm().min(1.0));
    let (fa, fb) = (purity_factor(na)?, purity_factor(nb)?);
    let ab = a.dot(b);
    Ok(AlphaBeta {
        alpha: 0.5 + 0.25 * (ab / fa - nb * nb / fb),
        beta: 0.5 + 0.25 * (ab / fb - na * na / fa),
    })
}

/// Result of qubit pooling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitPool {
    pub pooled: BlochVector,
    #[serde(flatten)]
    pub weights: AlphaBeta,
    /// `(1 + a·b)/2`.
    pub compatibility: f64,
    /// `α + β`; generally not equal to the compatibility, so the pooled
    /// vector is a weighted sum rather than a weighted average.
    pub weight_sum: f64,
}

pub fn pool_bloch(a: &BlochVector, b: &BlochVector) -> Result<QubitPool> {
    let compat = 0.5 * (1.0 + a.dot(b));
    if !(compat > INCOMPATIBLE) {
        return Err(Error::Incompatible { overlap: compat });
    }
    let w = alpha_beta(a, b)?;
    let (ca, cb) = (a.components(), b.components());
    let v: [f64; 3] = std::array::from_fn(|i| (w.alpha * ca[i] + w.beta * cb[i]) / compat);
    Ok(QubitPool {
        pooled: BlochVector::with_slack(v, POOLED_NORM_SLACK)?,
        weights: w,
        compatibility: compat,
        weight_sum: w.alpha + w.beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(x: f64, y: f64, z: f64) -> BlochVector {
        BlochVector::new(x, y, z).unwrap()
    }

    #[test]
    fn purity_factor_values() {
        assert_eq!(purity_factor(0.0).unwrap(), 2.0);
        assert_eq!(purity_factor(1.0).unwrap(), 1.0);
        assert!((purity_factor(0.6).unwrap() - 1.8).abs() < 1e-15);
        assert!(matches!(purity_factor(1.1), Err(Error::DomainError { .. })));
        assert!(matches!(purity_factor(-0.1), Err(Error::DomainError { .. })));
        assert_eq!(purity_factor(1.0 + 1e-13).unwrap(), 1.0);
    }

    #[test]
    fn certainty_weight_values() {
        assert_eq!(certainty_weight(0.0).unwrap(), 0.0);
        assert_eq!(certainty_weight(1.0).unwrap(), 1.0);
        assert!((certainty_weight(0.6).unwrap() - 0.6 / 1.8).abs() < 1e-15);
    }

    #[test]
    fn certainty_weight_monotone_on_grid() {
        let n = 10_000;
        let g: Vec<f64> = (0..=n)
            .map(|i| certainty_weight(i as f64 / n as f64).unwrap())
            .collect();
        assert!(g.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn identical_vectors_give_half_weights() {
        let a = bv(0.2, -0.4, 0.5);
        let w = alpha_beta(&a, &a).unwrap();
        assert!((w.alpha - 0.5).abs() < 1e-15 && (w.beta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_pure_states() {
        let w = alpha_beta(&bv(0.0, 0.0, 1.0), &bv(1.0, 0.0, 0.0)).unwrap();
        assert_eq!((w.alpha, w.beta), (0.25, 0.25));
        let p = pool_bloch(&bv(0.0, 0.0, 1.0), &bv(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(p.pooled.components(), [0.5, 0.0, 0.5]);
        assert_eq!(p.compatibility, 0.5);
        assert_eq!(p.weight_sum, 0.5);
    }

    #[test]
    fn equal_lengths_equal_weights() {
        let a = bv(0.6, 0.0, 0.0);
        let b = bv(0.0, 0.36, 0.48);
        let w = alpha_beta(&a, &b).unwrap();
        assert!((w.alpha - w.beta).abs() < 1e-15);
    }

    #[test]
    fn zero_vectors_pool_to_zero() {
        let p = pool_bloch(&BlochVector::zero(), &BlochVector::zero()).unwrap();
        assert_eq!(p.pooled.components(), [0.0; 3]);
    }

    #[test]
    fn identical_mixed_states_sharpen() {
        for r in [0.1, 0.5, 0.9, 1.0] {
            let a = bv(0.0, 0.0, r);
            let p = pool_bloch(&a, &a).unwrap();
            let expected = 2.0 * r / (1.0 + r * r);
            assert!((p.pooled.components()[2] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn antipodal_pure_states_incompatible() {
        assert!(matches!(
            pool_bloch(&bv(0.0, 0.0, 1.0), &bv(0.0, 0.0, -1.0)),
            Err(Error::Incompatible { .. })
        ));
        // antipodal but mixed is fine
        assert!(pool_bloch(&bv(0.0, 0.0, 0.9), &bv(0.0, 0.0, -0.9)).is_ok());
    }
}
