use alloc::string::String;

use crate::grid::GridSpec;

/// Errors raised by the physics and training core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {left:?} vs {right:?}")]
    GridMismatch { left: GridSpec, right: GridSpec },

    #[error("dimension mismatch: expected {expected} samples, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("contract violation: {0}")]
    Contract(&'static str),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_same_grid(left: &GridSpec, right: &GridSpec) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            left: *left,
            right: *right,
        })
    }
}
