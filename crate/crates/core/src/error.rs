//! Error type shared by every module in the crate.

use alloc::string::String;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation needs a regular code tuple (a unique stationary
    /// distribution) and the input has none.
    #[error("code tuple is not regular")]
    NotRegular,

    /// A guard against combinatorial blow-up was hit.
    #[error("resource guard exceeded: {0}")]
    Resource(String),

    /// The reduced code tuple does not satisfy the flags required here.
    #[error("invalid reduced code tuple: {0}")]
    InvalidRct(String),

    /// No flush tail can terminate a stream from this state.
    #[error("flush unavailable: {0}")]
    Flush(String),

    /// The input stream cannot have been produced by the given machine.
    #[error("corrupt input at bit offset {offset}")]
    CorruptInput { offset: usize },

    /// Two symbols matched during decoding; the machine is not actually
    /// delay-decodable.
    #[error("decodability violated: {0}")]
    InvalidCode(String),

    /// An internal invariant failed; this is a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
