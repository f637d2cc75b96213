use thiserror::Error;

/// One failed density-operator check together with the measured value.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Violation {
    pub check: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: measured {:.3e} (tolerance {:.1e}){}",
            self.check,
            self.value,
            self.tolerance,
            if self.detail.is_empty() {
                String::new()
            } else {
                format!(", {}", self.detail)
            }
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: entry ({row}, {col}) deviates by {deviation:.3e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("operator is not a projector: max |P^2 - P| = {deviation:.3e}")]
    NotProjector { deviation: f64 },

    #[error("invalid density operator: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidState(Vec<Violation>),

    #[error("state is not pure: 1 - Tr rho^2 = {impurity:.3e}")]
    NotPure { impurity: f64 },

    #[error("unknown catalog state '{0}'")]
    UnknownCatalog(String),

    #[error("parameter '{name}' = {value} out of range: {reason}")]
    Parameter {
        name: String,
        value: f64,
        reason: String,
    },

    #[error("invalid party structure: {0}")]
    Party(String),

    #[error("total dimension {dim} exceeds optimizer cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("infeasible size: {0}")]
    Infeasible(String),

    #[error("protocol step {step}: {reason}")]
    Step { step: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
