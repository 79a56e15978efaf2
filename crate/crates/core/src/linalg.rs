//! Complex Hermitian matrix machinery shared by every other module.
//!
//! Matrices are dense `nalgebra` matrices of `Complex<f64>`. Every spectral
//! operation symmetrizes its input to `(M + M†)/2` first, so rounding noise in
//! the anti-Hermitian part never reaches the eigensolver.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Default tolerance for Hermiticity, positivity and trace checks.
pub const DENSITY_TOL: f64 = 1e-10;

/// Eigenvalues below `-EIGEN_CLIP` are a hard error; those in
/// `[-EIGEN_CLIP, 0)` are rounding noise and clipped to zero.
pub const EIGEN_CLIP: f64 = 1e-10;

/// Eigenvalues at or below `ZERO_EIGEN_FLOOR * max(1, λ_max)` are treated as
/// exact zeros by [`hermitian_sqrt`]. A backward-stable eigensolver only
/// resolves eigenvalues to a few ulps of the spectral radius, and taking the
/// square root of such noise would turn a 1e-16 error into a 1e-8 one.
pub const ZERO_EIGEN_FLOOR: f64 = 1e-14;

const TRACE_IMAG_TOL: f64 = 1e-12;

pub(crate) fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Dimension of a square matrix, or an error for non-square / empty input.
pub fn square_dim(m: &ComplexMatrix) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(rows)
}

pub(crate) fn ensure_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, found })
    }
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise modulus of `M - M†`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub(crate) fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigendecomposition of the Hermitian part of a matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// `V · diag(h(λ)) · V†`, symmetrized.
    pub fn reconstruct(&self, mut h: impl FnMut(f64) -> f64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = h(lambda);
            scaled.column_mut(j).scale_mut(w);
        }
        hermitian_part(&(scaled * self.vectors.adjoint()))
    }
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    square_dim(m)?;
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = ComplexMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(HermitianEigen { values, vectors })
}

/// Principal square root of a Hermitian positive semidefinite matrix.
pub fn hermitian_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m)?;
    if eig.min() < -EIGEN_CLIP {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.min(),
        });
    }
    let floor = ZERO_EIGEN_FLOOR * eig.max().abs().max(1.0);
    Ok(eig.reconstruct(|l| if l <= floor { 0.0 } else { l.sqrt() }))
}

/// `M^{-1/2}` for a Hermitian matrix whose eigenvalues all exceed `min_eigenvalue`.
pub(crate) fn hermitian_inv_sqrt(m: &ComplexMatrix, min_eigenvalue: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m)?;
    if eig.min() < min_eigenvalue {
        return Err(Error::SingularSum {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(eig.reconstruct(|l| l.sqrt().recip()))
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr[A·B]` without forming the product.
pub(crate) fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    // Tr[AB] = Σ_ij A_ij B_ji
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let n = square_dim(a)?;
    ensure_same_dim(n, square_dim(b)?)?;
    Ok((a - b).norm())
}

/// Identity matrix of dimension `dim`.
pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// `I / dim`, the state of no information.
    pub fn maximally_mixed(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        DensityMatrix(identity(dim).unscale(dim as f64))
    }

    /// Diagonal (classical) state from a probability list.
    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let diag = DVector::from_iterator(probs.len(), probs.iter().map(|&p| c64(p, 0.0)));
        validate_density(&ComplexMatrix::from_diagonal(&diag), DENSITY_TOL)
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let psi = DVector::from_column_slice(amplitudes);
        let norm2 = psi.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::BadTrace { trace: 0.0 });
        }
        validate_density(&(&psi * psi.adjoint()).unscale(norm2), DENSITY_TOL)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    /// `Tr[ρ²]`.
    pub fn purity(&self) -> f64 {
        trace_of_product(&self.0, &self.0).re
    }

    /// Real parts of the diagonal entries.
    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn sqrt(&self) -> ComplexMatrix {
        hermitian_sqrt(&self.0).expect("density matrices are positive")
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)].norm() <= tol))
    }
}

/// Checks the density-matrix invariants within `tol` and re-projects the
/// input onto the valid set: the Hermitian part is taken, eigenvalues in
/// `[-tol, 0)` are clipped to zero and the trace is renormalized to one.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    square_dim(m)?;
    let deviation = hermitian_deviation(m);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let h = hermitian_part(m);
    let tr = trace(&h).re;
    if !tr.is_finite() || (tr - 1.0).abs() > tol {
        return Err(Error::BadTrace { trace: tr });
    }
    let eig = hermitian_eigen(&h)?;
    let min = eig.min();
    if min < -tol {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    let projected = if min < 0.0 {
        eig.reconstruct(|l| l.max(0.0))
    } else {
        h
    };
    let tr = trace(&projected).re;
    Ok(DensityMatrix(projected.unscale(tr)))
}

/// `Re Tr[A·B]` for two density matrices.
pub fn trace_product(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    ensure_same_dim(a.dim(), b.dim())?;
    let t = trace_of_product(a.as_matrix(), b.as_matrix());
    debug_assert!(t.im.abs() <= TRACE_IMAG_TOL, "Tr[AB] has imaginary part {}", t.im);
    Ok(t.re)
}

/// Pauli matrices `(σx, σy, σz)`.
pub fn pauli() -> [ComplexMatrix; 3] {
    let z = c64(0.0, 0.0);
    let one = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    [
        ComplexMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        ComplexMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

/// Slack allowed on a Bloch vector's norm before it is rejected.
pub const BLOCH_NORM_SLACK: f64 = 1e-12;

/// Real 3-vector of length at most one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    /// Lengths in `(1, 1 + 1e-12]` are rescaled to exactly one.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::with_slack([x, y, z], BLOCH_NORM_SLACK)
    }

    pub(crate) fn with_slack(v: [f64; 3], slack: f64) -> Result<Self> {
        let norm = norm3(&v);
        if !norm.is_finite() || norm > 1.0 + slack {
            return Err(Error::BlochTooLong { norm });
        }
        if norm > 1.0 {
            return Ok(BlochVector(v.map(|c| c / norm)));
        }
        Ok(BlochVector(v))
    }

    pub fn zero() -> Self {
        BlochVector([0.0; 3])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm3(&self.0)
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        BlochVector::new(v[0], v[1], v[2])
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(v: BlochVector) -> Self {
        v.0
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `(I + v·σ) / 2`.
pub fn bloch_to_density(v: &BlochVector) -> DensityMatrix {
    let [x, y, z] = v.0;
    let m = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            c64(0.5 * (1.0 + z), 0.0),
            c64(0.5 * x, -0.5 * y),
            c64(0.5 * x, 0.5 * y),
            c64(0.5 * (1.0 - z), 0.0),
        ],
    );
    DensityMatrix(m)
}

/// `v_i = Re Tr[ρ σ_i]`.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    ensure_same_dim(2, rho.dim())?;
    let [sx, sy, sz] = pauli();
    let m = rho.as_matrix();
    let v = [
        trace_of_product(m, &sx).re,
        trace_of_product(m, &sy).re,
        trace_of_product(m, &sz).re,
    ];
    BlochVector::new(v[0], v[1], v[2])
}
