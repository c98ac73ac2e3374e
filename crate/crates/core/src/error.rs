use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gamma pole at {re} + {im}i")]
    Pole { re: f64, im: f64 },
    #[error("argument outside the supported domain: {0}")]
    Domain(String),
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("clamped spectral mass fraction {fraction:.3e} exceeds {limit:.1e}")]
    Clamp { fraction: f64, limit: f64 },
    #[error("degenerate window with L2 norm {0:.3e}")]
    DegenerateWindow(f64),
    #[error("linear algebra failure: {0}")]
    LinAlg(String),
    #[error("cache file: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Cache(e.to_string())
    }
}
