use thiserror::Error;

use crate::syntax::{SyntaxError, ValidationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid behaviour: {0}")]
    Validation(#[from] ValidationError),
    #[error("state space exceeds the limit of {limit} nodes")]
    ResourceLimit { limit: usize },
}

/// Bounds on graph construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_nodes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_nodes: 100_000 }
    }
}
