use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported subproblem: {0}")]
    UnsupportedCombination(String),

    #[error("subproblem is unbounded below: {0}")]
    Unbounded(String),

    #[error("correction matrix M is singular (tau + s = {0})")]
    SingularM(f64),

    #[error("non-finite iterate at iteration {0}")]
    NonFiniteIterate(usize),

    #[error("stepsizes (tau, s) = ({tau}, {s}) lie outside the certified region D")]
    RegionNotCertified { tau: f64, s: f64 },

    #[error("trace too short for a rate fit: {0} usable points, need at least 20")]
    InsufficientTrace(usize),

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("reference solution is not unique: {0}")]
    NonUniqueSolution(String),

    #[error("active-set enumeration over {0} variables exceeds the cap of {1}")]
    PatternExplosion(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),

    #[error("malformed document: {0}")]
    Document(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
