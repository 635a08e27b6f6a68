use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape parameters: {0}")]
    Parameter(String),
    #[error("point outside the admissible domain: {0}")]
    Domain(String),
    #[error("grid spacing {h} too coarse, must be at most {max}")]
    Resolution { h: f64, max: f64 },
    #[error("no valid stencil at cell ({i}, {j})")]
    Stencil { i: usize, j: usize },
    #[error("inside mask is not 4-connected ({components} components)")]
    Topology { components: usize },
    #[error("degenerate domain: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("exclusion band {band} leaves no cells to evaluate")]
    BandTooWide { band: f64 },
    #[error("trajectory integration failed: {0}")]
    Integration(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
