use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("signal needs at least one other player")]
    EmptyOthers,

    #[error("grim trigger is not a subgame-perfect equilibrium at x = {cost}, delta = {continuation}")]
    NotSpe { cost: f64, continuation: f64 },

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("supergame length exceeded the cap of {cap} rounds")]
    LengthCap { cap: u32 },

    #[error("metric window selects no data: {0}")]
    EmptyWindow(String),

    #[error("perfect separation: {0}")]
    Separation(String),

    #[error("probit did not converge after {iterations} iterations (gradient max-norm {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },

    #[error("clustered inference needs at least 2 clusters, found {found}")]
    TooFewClusters { found: usize },

    #[error("design cell `{0}` has no observations")]
    MissingCell(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("row {row}, column `{column}`: {reason}")]
    Schema {
        row: usize,
        column: String,
        reason: String,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
