//! POVMs, the bare and efficient measurement-update rules, and outcome sampling.
//!
//! Classical measurements are not a separate type: a POVM whose elements are
//! diagonal acting on a diagonal state reproduces Bayesian updating exactly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_same_dim, hermitian_deviation, hermitian_eigen, hermitian_part, hermitian_sqrt,
    identity, max_abs_diff, square_dim, trace, trace_of_product, validate_density, ComplexMatrix,
    DensityMatrix, EIGEN_CLIP,
};

/// Tolerance on `Σ_k E_k = I` and on `U†U = I`.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Outcomes with `Tr[Eρ]` at or below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-12;

const PROBABILITY_CLIP: f64 = 1e-12;

/// A positive operator together with its principal square root.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    op: ComplexMatrix,
    sqrt: ComplexMatrix,
}

impl PovmElement {
    /// Hermitian PSD within 1e-10.
    pub fn new(op: ComplexMatrix) -> Result<Self> {
        Self::with_tol(op, EIGEN_CLIP)
    }

    fn with_tol(op: ComplexMatrix, tol: f64) -> Result<Self> {
        square_dim(&op)?;
        let deviation = hermitian_deviation(&op);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        let op = hermitian_part(&op);
        let min = hermitian_eigen(&op)?.min();
        if min < -tol {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let sqrt = hermitian_sqrt(&op)?;
        Ok(PovmElement { op, sqrt })
    }

    pub fn dim(&self) -> usize {
        self.op.nrows()
    }

    pub fn op(&self) -> &ComplexMatrix {
        &self.op
    }

    pub fn sqrt(&self) -> &ComplexMatrix {
        &self.sqrt
    }

    pub fn trace(&self) -> f64 {
        trace(&self.op).re
    }

    /// `Re Tr[E ρ]`.
    pub fn probability(&self, rho: &DensityMatrix) -> Result<f64> {
        ensure_same_dim(self.dim(), rho.dim())?;
        Ok(trace_of_product(&self.op, rho.as_matrix()).re)
    }
}

/// A complete set of positive operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, k: usize) -> &PovmElement {
        &self.elements[k]
    }

    /// Projective measurement in the computational basis.
    pub fn computational_basis(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|k| {
                let mut op = ComplexMatrix::zeros(dim, dim);
                op[(k, k)] = crate::linalg::c64(1.0, 0.0);
                PovmElement::new(op).expect("projectors are positive")
            })
            .collect();
        Povm { dim, elements }
    }
}

/// Checks that every element is Hermitian PSD and that they sum to the identity.
pub fn validate_povm(elements: &[ComplexMatrix], tol: f64) -> Result<Povm> {
    let first = elements.first().ok_or(Error::EmptyPovm)?;
    let dim = square_dim(first)?;
    let mut sum = ComplexMatrix::zeros(dim, dim);
    let mut checked = Vec::with_capacity(elements.len());
    for e in elements {
        ensure_same_dim(dim, square_dim(e)?)?;
        let element = PovmElement::with_tol(e.clone(), tol)?;
        sum += element.op();
        checked.push(element);
    }
    let deviation = max_abs_diff(&sum, &identity(dim));
    if deviation > tol {
        return Err(Error::NotComplete { deviation });
    }
    Ok(Povm {
        dim,
        elements: checked,
    })
}

/// `p_k = Re Tr[E_k ρ]`, tiny negatives clipped to zero.
pub fn outcome_probabilities(m: &Povm, rho: &DensityMatrix) -> Result<Vec<f64>> {
    ensure_same_dim(m.dim(), rho.dim())?;
    m.elements
        .iter()
        .map(|e| {
            let p = e.probability(rho)?;
            Ok(if p < 0.0 && p >= -PROBABILITY_CLIP { 0.0 } else { p.max(0.0) })
        })
        .collect()
}

/// `√E ρ √E / Tr[Eρ]`.
pub fn bare_update(e: &PovmElement, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let p = e.probability(rho)?;
    if !(p > ZERO_PROBABILITY) {
        return Err(Error::ZeroProbability { probability: p });
    }
    let s = e.sqrt();
    let conjugated = s * rho.as_matrix() * s;
    renormalize(conjugated, p)
}

/// Divides by `norm` and re-projects onto the density matrices.
pub(crate) fn renormalize(m: ComplexMatrix, norm: f64) -> Result<DensityMatrix> {
    let scaled = hermitian_part(&m.unscale(norm));
    // Tr of the scaled matrix can drift from one by the rounding in `norm`;
    // validate_density renormalizes exactly.
    validate_density(&scaled, 1e-9)
}

/// Kraus operator in polar form `U √E`.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficientKraus {
    effect: PovmElement,
    unitary: Option<ComplexMatrix>,
}

impl EfficientKraus {
    pub fn bare(effect: PovmElement) -> Self {
        EfficientKraus {
            effect,
            unitary: None,
        }
    }

    pub fn new(effect: PovmElement, unitary: Option<ComplexMatrix>) -> Result<Self> {
        if let Some(u) = &unitary {
            let n = square_dim(u)?;
            ensure_same_dim(effect.dim(), n)?;
            let deviation = max_abs_diff(&(u.adjoint() * u), &identity(n));
            if deviation > COMPLETENESS_TOL {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(EfficientKraus { effect, unitary })
    }

    pub fn effect(&self) -> &PovmElement {
        &self.effect
    }

    pub fn unitary(&self) -> Option<&ComplexMatrix> {
        self.unitary.as_ref()
    }
}

/// `U √E ρ √E U† / Tr[Eρ]`. Without a unitary this is [`bare_update`].
pub fn efficient_update(k: &EfficientKraus, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let post = bare_update(&k.effect, rho)?;
    match &k.unitary {
        None => Ok(post),
        Some(u) => {
            let rotated = u * post.as_matrix() * u.adjoint();
            validate_density(&hermitian_part(&rotated), 1e-9)
        }
    }
}

/// `E / Tr[E]`, the state after outcome `E` starting from no information.
pub fn posterior_from_outcome(e: &PovmElement) -> Result<DensityMatrix> {
    let tr = e.trace();
    if !(tr > ZERO_PROBABILITY) {
        return Err(Error::ZeroEffect { trace: tr });
    }
    renormalize(e.op().clone(), tr)
}

/// Draws an outcome index by inverse CDF over the renormalized probabilities.
pub fn sample_outcome<R: Rng + ?Sized>(m: &Povm, rho: &DensityMatrix, rng: &mut R) -> Result<usize> {
    let probs = outcome_probabilities(m, rho)?;
    Ok(inverse_cdf(&probs, rng.random::<f64>()))
}

fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = k;
        }
        acc += p;
        if target < acc {
            return k;
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, frobenius_distance, pauli};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> ComplexMatrix {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| c64(v, 0.0)));
        ComplexMatrix::from_diagonal(&d)
    }

    fn elem(values: &[f64]) -> PovmElement {
        PovmElement::new(diag(values)).unwrap()
    }

    #[test]
    fn povm_validation() {
        assert!(validate_povm(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])], 1e-9).is_ok());
        assert!(validate_povm(&[diag(&[0.5, 0.5]), diag(&[0.5, 0.5])], 1e-9).is_ok());
        assert!(matches!(
            validate_povm(&[diag(&[0.6, 0.0]), diag(&[0.4, 0.9])], 1e-9),
            Err(Error::NotComplete { .. })
        ));
        assert!(matches!(
            validate_povm(&[diag(&[1.2, 0.5]), diag(&[-0.2, 0.5])], 1e-9),
            Err(Error::NotPositive { .. })
        ));
        assert!(matches!(validate_povm(&[], 1e-9), Err(Error::EmptyPovm)));
    }

    #[test]
    fn probabilities_of_projective_measurement() {
        let z = Povm::computational_basis(2);
        let p = outcome_probabilities(&z, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
        let up = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(outcome_probabilities(&z, &up).unwrap(), vec![1.0, 0.0]);
        assert!(outcome_probabilities(&z, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn bare_update_examples() {
        let half = DensityMatrix::maximally_mixed(2);
        let post = bare_update(&elem(&[1.0, 0.0]), &half).unwrap();
        assert_eq!(post.diagonal(), vec![1.0, 0.0]);

        let rho = DensityMatrix::pure(&[c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap();
        let post = bare_update(&elem(&[0.5, 0.5]), &rho).unwrap();
        assert!(frobenius_distance(post.as_matrix(), rho.as_matrix()).unwrap() < 1e-15);

        let post = bare_update(&elem(&[0.8, 0.2]), &half).unwrap();
        assert!((post.diagonal()[0] - 0.8).abs() < 1e-15);
        assert!((post.diagonal()[1] - 0.2).abs() < 1e-15);

        let down = DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            bare_update(&elem(&[1.0, 0.0]), &down),
            Err(Error::ZeroProbability { .. })
        ));
    }

    #[test]
    fn classical_bayes_rule() {
        let prior = [0.1, 0.2, 0.3, 0.4];
        let likelihood = [0.9, 0.5, 0.25, 0.05];
        let post = bare_update(
            &elem(&likelihood),
            &DensityMatrix::from_diagonal(&prior).unwrap(),
        )
        .unwrap();
        let z: f64 = prior.iter().zip(&likelihood).map(|(p, l)| p * l).sum();
        for (i, d) in post.diagonal().iter().enumerate() {
            assert!((d - prior[i] * likelihood[i] / z).abs() < 1e-15);
        }
    }

    #[test]
    fn efficient_update_with_flip() {
        let [sx, _, _] = pauli();
        let k = EfficientKraus::new(elem(&[1.0, 0.0]), Some(sx)).unwrap();
        let post = efficient_update(&k, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(post.diagonal(), vec![0.0, 1.0]);
    }

    #[test]
    fn efficient_update_without_unitary_is_bare() {
        let e = elem(&[0.7, 0.3]);
        let rho = DensityMatrix::pure(&[c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap();
        let a = efficient_update(&EfficientKraus::bare(e.clone()), &rho).unwrap();
        let b = bare_update(&e, &rho).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn classical_permutation_update() {
        // Diagonal state, diagonal effect and a permutation reproduce the
        // classical update followed by relabelling.
        let perm = ComplexMatrix::from_row_slice(
            3,
            3,
            &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0].map(|v| c64(v, 0.0)),
        );
        let k = EfficientKraus::new(elem(&[0.5, 0.25, 1.0]), Some(perm)).unwrap();
        let rho = DensityMatrix::from_diagonal(&[0.2, 0.4, 0.4]).unwrap();
        let post = efficient_update(&k, &rho).unwrap();
        let z = 0.1 + 0.1 + 0.4;
        let bayes = [0.1 / z, 0.1 / z, 0.4 / z];
        let expected = [bayes[2], bayes[0], bayes[1]];
        for (d, e) in post.diagonal().iter().zip(expected) {
            assert!((d - e).abs() < 1e-15);
        }
        assert!(post.is_diagonal(0.0));
    }

    #[test]
    fn rejects_non_unitary() {
        assert!(matches!(
            EfficientKraus::new(elem(&[1.0, 0.0]), Some(diag(&[1.0, 0.5]))),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn posterior_examples() {
        let p = posterior_from_outcome(&elem(&[1.0, 0.0])).unwrap();
        assert_eq!(p.diagonal(), vec![1.0, 0.0]);
        let p = posterior_from_outcome(&elem(&[0.5, 0.5])).unwrap();
        assert_eq!(p, DensityMatrix::maximally_mixed(2));
        assert!(matches!(
            posterior_from_outcome(&elem(&[0.0, 0.0])),
            Err(Error::ZeroEffect { .. })
        ));
    }

    #[test]
    fn certain_outcome_always_sampled() {
        let z = Povm::computational_basis(2);
        let up = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            assert_eq!(sample_outcome(&z, &up, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn fair_coin_frequency() {
        let z = Povm::computational_basis(2);
        let half = DensityMatrix::maximally_mixed(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| sample_outcome(&z, &half, &mut rng).unwrap() == 0)
            .count();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn sampling_is_deterministic() {
        let z = Povm::computational_basis(3);
        let rho = DensityMatrix::maximally_mixed(3);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64)
                .map(|_| sample_outcome(&z, &rho, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
    }

    #[test]
    fn inverse_cdf_ties_and_edges() {
        assert_eq!(inverse_cdf(&[0.5, 0.5], 0.0), 0);
        assert_eq!(inverse_cdf(&[0.5, 0.5], 0.5), 1);
        assert_eq!(inverse_cdf(&[0.0, 1.0], 0.0), 1);
        assert_eq!(inverse_cdf(&[0.3, 0.7, 0.0], 0.999_999_999_999), 1);
    }
}
