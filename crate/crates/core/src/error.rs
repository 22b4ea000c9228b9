use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not a state: {reason}")]
    InvalidState {
        reason: String,
        /// Spectrum of the offending matrix, descending, when it was computed.
        eigenvalues: Option<Vec<f64>>,
    },

    #[error("subspace is not invariant under the involution (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("operator is not a projector (defect {defect:.3e})")]
    NotAProjector { defect: f64 },

    #[error("not a twin pair: {0}")]
    NotATwin(String),

    #[error("twin pair is not strong (largest projector commutator {commutator:.3e})")]
    NotStrong { commutator: f64 },

    #[error("observable does not commute with the reduced state (commutator {norm:.3e})")]
    CommutationViolated { norm: f64 },

    #[error("outcomes are not perfectly correlated: {0}")]
    NotPerfectlyCorrelated(String),

    #[error("correlation vector lies outside the tetrahedron: {name} = {value}")]
    OutsideTetrahedron { name: &'static str, value: f64 },

    #[error("state does not have maximally disordered subsystems (deviation {deviation:.3e})")]
    NotMds { deviation: f64 },

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
}

impl Error {
    /// True for errors raised by a failing numerical routine or a
    /// post-condition check, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalFailure(_) | Error::NotInvariant { .. })
    }
}
