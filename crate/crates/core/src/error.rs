use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid kaon physics: {0}")]
    InvalidPhysics(String),

    #[error("quasi-spin or state is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("integration step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("decay matrix is indefinite (minimum eigenvalue {min_eigenvalue:e})")]
    IndefiniteDecayMatrix { min_eigenvalue: f64 },

    #[error("Lindblad generator `{0}` has support outside the surviving sector")]
    GeneratorOnFinalSpace(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("integration accuracy failure: minimum eigenvalue {min_eigenvalue:e} below tolerance")]
    IntegrationAccuracy { min_eigenvalue: f64 },

    #[error("invalid optimizer configuration: {0}")]
    InvalidOptimizer(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
