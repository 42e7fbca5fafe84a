use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::solvers::simplex::SimplexError;

/// Itemized report produced when a raw model fails validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub issues: Vec<String>,
}

impl ValidationError {
    pub(crate) fn single(issue: impl Into<String>) -> Self {
        Self {
            issues: vec![issue.into()],
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid model: {}", self.issues.join("; "))
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("state-action space too large for enumeration: {policies} policies (limit {limit})")]
    TooLarge { policies: f64, limit: u64 },

    #[error("analytic engine requires two states and two actions")]
    NotTwoByTwo,

    #[error("two-state model violates ordering: {0}")]
    TwoStateOrdering(String),

    #[error("linear program failed: {0}")]
    Lp(#[from] SimplexError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver cross-check failed: {0}")]
    CrossCheck(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
