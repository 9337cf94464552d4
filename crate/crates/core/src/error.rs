use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-real residue {residue:.3e} exceeds tolerance")]
    NonRealResidue { residue: f64 },

    #[error("unsupported order: {0}")]
    Unsupported(String),

    #[error("quadrature with {q} points cannot resolve gauge grade {grade}")]
    QuadratureTooSmall { q: usize, grade: i64 },

    #[error("step rejected at t = {t}: relative Hamiltonian drift {drift:.3e} exceeds guard {guard:.3e}")]
    StepRejected { t: f64, drift: f64, guard: f64 },

    #[error("substep refinement did not converge after {refinements} refinements (last change {change:.3e})")]
    NonConvergence { refinements: usize, change: f64 },

    #[error("normal-form hypothesis violated at c = {c}: {reason}")]
    HypothesisViolated { c: f64, reason: String },

    #[error("slope fit failed: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
