//! Experiment harness: reproduces each registered claim with deterministic
//! seeds and writes CSV / markdown reports.

pub mod claims;
pub mod config;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown claim {0}")]
    UnknownClaim(String),
    #[error("claim {claim}: unknown parameter {key}")]
    UnknownParameter { claim: String, key: String },
    #[error("claim {claim}: bad value for {key}: {value}")]
    BadParameter {
        claim: String,
        key: String,
        value: String,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Run(String),
}

impl From<countable_games::solver::SolveError> for HarnessError {
    fn from(e: countable_games::solver::SolveError) -> Self {
        HarnessError::Run(e.to_string())
    }
}

impl From<countable_games::engine::EngineError> for HarnessError {
    fn from(e: countable_games::engine::EngineError) -> Self {
        HarnessError::Run(e.to_string())
    }
}

impl From<countable_games::catalog::strategies::CatalogError> for HarnessError {
    fn from(e: countable_games::catalog::strategies::CatalogError) -> Self {
        HarnessError::Run(e.to_string())
    }
}
