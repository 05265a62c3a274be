use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the sampler, the oracles and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("inner minimization did not converge after {iterations} iterations (gradient residual {residual:.3e})")]
    Convergence {
        iterate: Vec<f64>,
        residual: f64,
        iterations: usize,
    },

    #[error("acceptance probability {probability} exceeds 1: declared strong convexity or minimizer is wrong")]
    ContractViolation { probability: f64 },

    #[error("rejection sampler exceeded {cap} trials without acceptance")]
    RunawayRejection { cap: usize },

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("numeric range error: {0}")]
    NumericRange(String),

    #[error("support violation: {0}")]
    Support(String),

    #[error("undefined bound: {0}")]
    UndefinedBound(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("chain {index}: {source}")]
    Chain {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Whether this is a user-input problem (exit code 1) rather than a
    /// numerical failure (exit code 2).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::Validation(_)
            | Error::Capability(_)
            | Error::UndefinedBound(_)
            | Error::UndefinedRatio(_)
            | Error::Domain(_)
            | Error::Io { .. } => true,
            Error::Chain { source, .. } | Error::Context { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            1
        } else {
            2
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
