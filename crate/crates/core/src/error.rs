use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max |A - A†| = {0:e})")]
    Hermiticity(f64),

    #[error("non-finite entry")]
    NonFinite,

    #[error("invalid effect: {0}")]
    Effect(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid measurement model: {0}")]
    InvalidModel(String),

    #[error("outcome {outcome} has probability {probability:e}; update undefined{}", context.as_ref().map(|c| format!(" (event {c})")).unwrap_or_default())]
    ZeroProbabilityOutcome {
        outcome: String,
        probability: f64,
        context: Option<String>,
    },

    #[error("incompatible measurements: {0}")]
    Compatibility(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
}

impl Error {
    /// Attaches the label of the measurement event that produced the error.
    pub fn at_event(self, label: &str) -> Self {
        match self {
            Error::ZeroProbabilityOutcome {
                outcome,
                probability,
                ..
            } => Error::ZeroProbabilityOutcome {
                outcome,
                probability,
                context: Some(label.to_string()),
            },
            other => other,
        }
    }
}
