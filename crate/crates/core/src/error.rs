use thiserror::Error;

/// Error taxonomy shared across the crate.
///
/// `Input` covers malformed arguments, `Geometry` covers degenerate bodies
/// (e.g. singular cone normal matrices), `Numeric` covers failed numerical
/// kernels, and `Divergence` covers a blown-up time integration.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn divergence(msg: impl Into<String>) -> Self {
        Error::Divergence(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
