use thiserror::Error;

use crate::inverse::ReconstructionReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Numerical and structural failures raised by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("eigensolver did not converge")]
    EigensolverFailure,

    #[error("degree overflow: need scalar moment of degree {needed}, functional stores up to {available}")]
    DegreeOverflow { needed: usize, available: usize },

    #[error("cannot normalize: U(P0) is numerically singular (|det| = {det:e})")]
    SingularNormalization { det: f64 },

    #[error("series not converged: {0}")]
    SeriesNotConverged(String),

    #[error("C_{index} is numerically singular")]
    SingularC { index: usize },

    #[error("zI - J is numerically singular at z = {re}{im:+}i")]
    SingularResolvent { re: f64, im: f64 },

    #[error("functional is not quasi-definite at order {order}")]
    QuasiDefiniteViolation {
        order: usize,
        partial: Option<Box<ReconstructionReport>>,
    },

    #[error("Delta_{order} is numerically singular")]
    SingularDelta { order: usize },

    #[error("step rejected at t = {time}: coefficient magnitude {magnitude:e} exceeds guard {guard:e}")]
    StepRejected { time: f64, magnitude: f64, guard: f64 },

    #[error("N(t) is numerically singular at t = {time}")]
    SingularN { time: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
