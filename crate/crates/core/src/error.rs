//! Input validation errors shared by all modules.

use thiserror::Error;

/// Rejected input. Every constructor and operation validates its
/// arguments before doing any work; a malformed object never circulates.
#[derive(Debug, Error)]
pub enum Error {
    /// A graph literal was malformed (self-loop, unknown endpoint, ...).
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// A relation system literal was malformed.
    #[error("invalid relation system: {0}")]
    InvalidSystem(String),

    /// A function family literal was malformed.
    #[error("invalid family: {0}")]
    InvalidFamily(String),

    /// A labelled structure literal was malformed.
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    /// An argument refers to objects outside the domain it was paired with.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// An argument has the right domain but an impossible shape
    /// (not a permutation, parts overlap, index out of range, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
