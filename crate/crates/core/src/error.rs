use alloc::string::String;

use crate::sdp::SolveStatus;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),
    #[error("invalid quasiprobability decomposition: {0}")]
    InvalidQpd(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("malformed problem: {0}")]
    MalformedProblem(String),
    #[error("solver finished with status {0:?}")]
    Solver(SolveStatus),
    #[error("infeasible: {0}")]
    Infeasible(String),
}
