use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{field} must be strictly positive and finite, got {value}")]
    InvalidRate { field: &'static str, value: f64 },

    #[error("jump probabilities must sum to 1, got {sum}")]
    NotNormalized { sum: f64 },

    /// A modelling assumption required by the harmonic machinery is violated.
    /// `flag` names the failing field of [`crate::model::AssumptionReport`].
    #[error("assumption failed: {flag}")]
    Assumption { flag: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate conjugate pair at beta = {beta}: the two alpha roots coincide")]
    DegeneratePair { beta: String },

    #[error("singular projection system for anchors {anchors}")]
    Singular { anchors: String },

    #[error("basis function is not boundary-determined: {0}")]
    NotBoundaryDetermined(String),

    #[error("harmonicity spot check failed: residual {residual:e} at ({y1}, {y2})")]
    NotHarmonic { residual: f64, y1: i64, y2: i64 },

    #[error("certificate impossible: diagonal mode with modulus {modulus} does not contract")]
    NoCertificate { modulus: f64 },

    #[error("Gauss-Seidel did not converge after {sweeps} sweeps (last relative change {change:e})")]
    NotConverged { sweeps: u64, change: f64 },

    #[error("wedge truncation reached {m} without convergence (last relative change {change:e})")]
    TruncationLimit { m: usize, change: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Assumption { .. } => 2,
            _ => 1,
        }
    }
}
