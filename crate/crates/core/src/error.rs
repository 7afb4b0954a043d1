use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Pauli index {0} out of range (expected 0..=3)")]
    PauliIndex(usize),

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("not a unit vector (norm {0})")]
    NotUnit(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("degenerate polytope (volume {0:.3e})")]
    DegeneratePolytope(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
