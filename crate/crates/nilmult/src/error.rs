use thiserror::Error;

/// Errors surfaced by every module in this crate.
///
/// The four variants map onto distinct failure classes so callers (the CLI in
/// particular) can translate them into exit codes without string matching:
/// `Domain` and `Precondition` are invalid-input failures, `ResourceCap` means
/// a configurable size guard tripped, and `Unsupported` marks documented
/// limitations rather than bugs.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the function's domain (empty list, zero weight, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A mathematical hypothesis the computation relies on does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A size guard tripped before the computation exhausted memory or time.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    /// Valid input the implementation deliberately does not handle.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
