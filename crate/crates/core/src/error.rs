use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must have dimension at least 1")]
    EmptyMatrix,
    #[error("not Hermitian: max |M - M†| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("not positive: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("bad trace: Tr M = {trace}")]
    BadTrace { trace: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("Bloch vector too long: |v| = {norm}")]
    BlochTooLong { norm: f64 },
    #[error("POVM has no elements")]
    EmptyPovm,
    #[error("POVM not complete: max |Σ E_k - I| = {deviation:e}")]
    NotComplete { deviation: f64 },
    #[error("not unitary: max |U†U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },
    #[error("zero probability outcome: Tr[Eρ] = {probability:e}")]
    ZeroProbability { probability: f64 },
    #[error("zero effect: Tr[E] = {trace:e}")]
    ZeroEffect { trace: f64 },
    #[error("incompatible states: Tr[ρAρB] ≈ 0 ({overlap:e})")]
    Incompatible { overlap: f64 },
    #[error("invalid probability vector: {reason}")]
    InvalidProbabilities { reason: String },
    #[error("at least 2 states are required, got {count}")]
    TooFewStates { count: usize },
    #[error("at most {max} states are supported, got {count}")]
    TooManyStates { count: usize, max: usize },
    #[error("argument {x} outside [0, 1]")]
    DomainError { x: f64 },
    #[error("rank {rank} not in 1..={dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("need at least 2 outcomes, got {outcomes}")]
    TooFewOutcomes { outcomes: usize },
    #[error("sum of random effects is singular: smallest eigenvalue {min_eigenvalue:e}")]
    SingularSum { min_eigenvalue: f64 },
    #[error("scenario has not been run: {sampled} of {observers} outcomes sampled")]
    NotSampled { sampled: usize, observers: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
