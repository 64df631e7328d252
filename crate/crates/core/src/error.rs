use thiserror::Error;

/// Errors raised by evaluators, verifiers and the harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QmplError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A difference quotient or integrand was asked for at a pole.
    #[error("singular point: {0}")]
    SingularPoint(String),

    /// A Jackson lattice point hit a pole of the integrand under the `Error` policy.
    #[error("integrand is singular at lattice point index {index}")]
    SingularLatticePoint { index: usize },

    #[error("unsupported q-regime: {0}")]
    UnsupportedRegime(String),

    /// Arguments lie outside the absolute-convergence domain of the series.
    #[error("convergence domain violation: {0}")]
    Domain(String),

    #[error("divergent series: {0}")]
    DivergentSeries(String),

    /// Exact and floating scalars were combined in one expression.
    #[error("scalar mode mismatch: {0}")]
    ModeMismatch(String),

    /// A value cannot be represented in the requested scalar mode.
    #[error("unrepresentable in scalar mode: {0}")]
    Unrepresentable(String),

    #[error("mismatched truncation: {0}")]
    Truncation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl QmplError {
    /// Stable machine-readable tag used in structured CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            QmplError::InvalidParameter(_) => "invalid_parameter",
            QmplError::SingularPoint(_) => "singular_point",
            QmplError::SingularLatticePoint { .. } => "singular_lattice_point",
            QmplError::UnsupportedRegime(_) => "unsupported_regime",
            QmplError::Domain(_) => "domain",
            QmplError::DivergentSeries(_) => "divergent_series",
            QmplError::ModeMismatch(_) => "mode_mismatch",
            QmplError::Unrepresentable(_) => "unrepresentable",
            QmplError::Truncation(_) => "truncation",
            QmplError::Parse(_) => "parse",
            QmplError::Usage(_) => "usage",
            QmplError::Io(_) => "io",
        }
    }
}

pub type Result<T, E = QmplError> = std::result::Result<T, E>;
