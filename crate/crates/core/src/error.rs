use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Magnitudes are carried as `f64` regardless of the scalar type so that the
/// error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |H - H^dag| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace is not one (got {trace})")]
    TraceNotOne { trace: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has {0} entries that are NaN or infinite")]
    NonFinite(usize),

    #[error("rank {rank} is outside 1..={dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary (max |U^dag U - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("priors sum to {sum}, expected 1")]
    PriorsSum { sum: f64 },

    #[error("prior {index} is negative ({value})")]
    NegativePrior { index: usize, value: f64 },

    #[error("ensemble has no members")]
    EmptyEnsemble,

    #[error("{effects} effects for {members} ensemble members")]
    CountMismatch { effects: usize, members: usize },

    #[error("expected {expected} ensemble members, found {found}")]
    WrongMemberCount { expected: usize, found: usize },

    #[error("Kraus operators violate completeness (max |sum K^dag K - I| = {defect:e})")]
    IncompleteKraus { defect: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("state is not an X-state: entry ({row}, {col}) is nonzero")]
    NotXPattern { row: usize, col: usize },

    #[error("state is not invertible (min eigenvalue {min_eigenvalue:e})")]
    NotInvertible { min_eigenvalue: f64 },

    #[error("excluded branch mass {mass:e} exceeds the renormalization limit")]
    ExcludedMass { mass: f64 },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True when the error reflects bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NoConvergence(_) | Error::ExcludedMass { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
