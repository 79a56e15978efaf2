//! Pooling independent observers' quantum states of knowledge.
//!
//! Two observers who each performed a bare measurement on a system they both
//! started out knowing nothing about can combine their density matrices into
//! the state of an observer holding both records:
//!
//! * ordered, when the measurement order is known: `√ρ_B ρ_A √ρ_B / Tr[ρ_A ρ_B]`
//! * symmetric, averaging over both orders
//! * N observers, summing the nested form over all orderings
//! * a closed form for qubits in Bloch coordinates
//!
//! [`harness`] checks every rule against a direct simulation of the
//! sequential measurement chain.

pub mod cli;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod measurement;
pub mod par;
pub mod pooling;
pub mod qubit;

pub use error::{Error, Result};
pub use linalg::{BlochVector, ComplexMatrix, DensityMatrix};
pub use measurement::{Povm, PovmElement};
pub use par::Execution;
pub use pooling::{NormMode, PoolReport, ProbabilityVector};
