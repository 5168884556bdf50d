use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported interface topology in element {element}: {reason}")]
    UnsupportedTopology { element: usize, reason: String },

    /// The barrier law was evaluated at a non-positive gap.
    #[error("interface penetration: gap {gap:e} m is not positive")]
    Penetration { gap: f64 },

    #[error("argument outside the domain of definition: {0}")]
    Domain(String),

    #[error("singular element {element}: jacobian determinant {det:e}")]
    SingularElement { element: usize, det: f64 },

    #[error("singular linear system: {0}")]
    SingularSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
