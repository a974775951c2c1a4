//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not match what the operation supports.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix handed to the eigensolver is not Hermitian within tolerance.
    #[error("matrix is not Hermitian (max |M - M^dagger| = {residual:.3e})")]
    NotHermitian { residual: f64 },

    /// Eigensolver failed to reach the off-diagonal target.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diag:.3e})")]
    NoConvergence { sweeps: usize, off_diag: f64 },

    /// A matrix that should be a density operator is not one.
    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    /// A flat parameter vector has the wrong length or violates the simplex.
    #[error("invalid parameter vector: {0}")]
    BadVector(String),

    /// Orthonormal basis construction produced a Gram residual above tolerance.
    #[error("basis construction failed (Gram residual {residual:.3e})")]
    BasisConstruction { residual: f64 },

    /// A Bell expression name not present in the registry.
    #[error("unknown Bell expression `{0}` (known: chsh, modchsh, bc3, bc5, i1, i2)")]
    UnknownExpression(String),

    /// Optimizer was configured inconsistently.
    #[error("optimizer setup: {0}")]
    Optimizer(String),

    /// Run-file or config content could not be understood.
    #[error("run file: {0}")]
    RunFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
