use thiserror::Error;

use crate::teng::TengReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain [{a}, {b}) with {n} points")]
    InvalidDomain { a: f64, b: f64, n: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("parameter vector has {actual} entries, network expects {expected}")]
    ParamLength { expected: usize, actual: usize },

    #[error("implicit tableau `{0}` passed to the explicit stage driver")]
    ImplicitTableau(String),

    #[error("relaxation requires an invariant of degree >= 2, `{0}` is linear")]
    LinearRelaxation(String),

    #[error("relaxation factor {gamma} is outside [0.9, 1.1]; shrink the step")]
    RelaxationOutOfRange { gamma: f64 },

    #[error("relaxation root solve failed: residual {residual:e} after {iterations} iterations")]
    RelaxationFailed { residual: f64, iterations: usize },

    #[error("least-squares update made no progress (residual {:e})", .0.final_residual)]
    NoProgress(TengReport),

    #[error("constraint Gram matrix is singular (condition number {cond:e})")]
    SingularGram { cond: f64 },

    #[error("projection did not converge: max residual {max_residual:e} after {iterations} iterations")]
    ProjectionNotConverged { max_residual: f64, iterations: usize },

    #[error("reference solution diverged at t = {t}")]
    ReferenceDiverged { t: f64 },

    #[error("reference solution is identically zero")]
    ZeroReference,

    #[error("nearest reference snapshot to t = {t} is {gap:e} away (limit {limit:e})")]
    MisalignedTimes { t: f64, gap: f64, limit: f64 },

    #[error("initial fit failed: best relative error {best:e} (floor {floor:e})")]
    FitFailed { best: f64, floor: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("malformed parameter snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
