use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("signature violation: {0}")]
    Signature(String),

    #[error("singular metric (|det g| = {0:e})")]
    SingularMetric(f64),

    #[error("metric family mismatch: {0}")]
    Family(String),

    #[error("operator not representable on this grid: {0}")]
    UnsupportedGrid(String),

    #[error("assembled operator is not symmetric (relative defect {0:e})")]
    NonSymmetricAssembly(f64),

    #[error("operator has negative spectrum (lowest eigenvalue {lowest:e}, norm {norm:e})")]
    NegativeSpectrum { lowest: f64, norm: f64 },

    #[error("eigensolver failed: {0}")]
    ConvergenceFailure(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("integrator diverged at step {step}: {message}")]
    IntegratorDivergence { step: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
