use thiserror::Error;

/// Errors surfaced by algebra, module, and operator computations.
#[derive(Debug, Error)]
pub enum CsipError {
    /// Two elements of structurally different descriptors were mixed.
    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),

    /// Payload shape does not match its descriptor.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Input outside the operation's domain (non-positive element, bad scalar, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition does not hold for the given inputs.
    #[error("precondition not met: {0}")]
    Precondition(String),

    /// A JSON literal could not be interpreted.
    #[error("invalid literal: {0}")]
    Literal(String),
}

pub type Result<T> = std::result::Result<T, CsipError>;
