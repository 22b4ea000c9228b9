//! Hermitian operator Schmidt decompositions and twin observables of
//! bipartite mixed states, with the full two-qubit Bell-mixture analysis.

pub mod error;
pub mod linalg;
pub mod random;
pub mod schmidt;
pub mod twins;
pub mod bell;
pub mod info;

pub use error::{Error, Result};
pub use linalg::{BipartiteState, CMatrix, CVector, Factor, HermOp};
