use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("geometry has no non-void material")]
    EmptyGeometry,
    #[error("mesh is not 2:1 balanced: cells {a} and {b} differ by {diff} levels")]
    Unbalanced { a: usize, b: usize, diff: u8 },
    #[error("surface element {element} of cell {cell}: non-positive Jacobian determinant {det}")]
    BadJacobian { cell: usize, element: usize, det: f64 },
    #[error("cell {cell}: {reason}")]
    Eigen { cell: usize, reason: String },
    #[error("cell {cell}: displacement modes near-defective (condition {cond:.3e})")]
    NearDefective { cell: usize, cond: f64 },
    #[error("cell {cell}: stiffness asymmetry {asym:.3e} exceeds tolerance")]
    Asymmetric { cell: usize, asym: f64 },
    #[error("cell {cell}: mass matrix not positive definite")]
    NotPositiveDefinite { cell: usize },
    #[error("cell {cell}: non-positive lumped mass {value:.3e} at dof {dof}")]
    NonPositiveLumped { cell: usize, dof: usize, value: f64 },
    #[error("no catalog entry for pattern {canonical_id} at nu={nu}")]
    MissingPattern { canonical_id: u8, nu: f64 },
    #[error("divergence at step {step} (last stable step {last_stable})")]
    Divergence { step: usize, last_stable: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("part count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("worker {worker} failed: {reason}")]
    Worker { worker: usize, reason: String },
    #[error("integration did not converge: {0}")]
    Integration(String),
    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

pub(crate) fn format_err(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Format { what, reason: reason.into() }
}
