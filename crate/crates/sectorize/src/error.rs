use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A segment runs along a polygon edge; the intersection is a contact
    /// interval rather than a point. Callers perturb and retry.
    #[error("grazing contact between segment and polygon edge {edge}")]
    GrazingContact { edge: usize },

    #[error("entry/exit events for flight {flight} remain ambiguous after perturbation")]
    EventAmbiguity { flight: String },

    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("infeasible adjustment applied: {0}")]
    ContractViolation(String),

    #[error("subdivision validation failed:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    InvalidSubdivision(Vec<crate::subdivision::Violation>),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}
