use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no finite Luxemburg gauge: the modular is infinite for every scale")]
    NonIntegrable,
    #[error("function vanishes identically")]
    ZeroFunction,
    #[error("cube holds {cells} grid cells, fewer than the {needed} basis polynomials")]
    DegenerateCube { cells: usize, needed: usize },
    #[error("grid resolution {resolution} cannot resolve Fourier modes up to {max_mode} (need at least {required})")]
    AliasError { resolution: usize, max_mode: usize, required: usize },
    #[error("weight function takes negative values")]
    NegativeWeight,
    #[error("function takes negative values")]
    NegativeFunction,
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("homogeneous seminorm vanishes; test function is a polynomial on the cube")]
    ZeroSeminorm,
    #[error("evaluation at |t| = {radius} lies inside the masked origin cell")]
    OriginSingularity { radius: f64 },
    #[error("box half-width {half_width} is too small; need at least {required}")]
    BoxTooSmall { half_width: f64, required: f64 },
    #[error("grids do not match")]
    GridMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
