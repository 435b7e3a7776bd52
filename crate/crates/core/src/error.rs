use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has {len} observations, at least 2 are required")]
    EmptyOrTooShort { len: usize },

    #[error("non-finite value at index {index}")]
    NonFiniteInput { index: usize },

    #[error("series lengths differ: x has {x_len}, y has {y_len}")]
    LengthMismatch { x_len: usize, y_len: usize },

    #[error("log-log fit needs at least 3 positive points, {found} available")]
    InsufficientPoints { found: usize },

    #[error("{name} = {value} is outside the open interval (-0.5, 0.5)")]
    DomainError { name: &'static str, value: f64 },

    #[error("invalid scale grid: {0}")]
    InvalidGrid(String),

    #[error("box size {scale} exceeds series length {len}")]
    ScaleTooLarge { scale: usize, len: usize },

    #[error("box size {scale} is below the minimum of 4")]
    DegenerateBox { scale: usize },

    #[error("moving-average window {window} is even; centered windows must be odd")]
    EvenWindow { window: usize },

    #[error("moving-average window {window} exceeds series length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("lag {lag} outside 1..={max}")]
    LagOutOfRange { lag: usize, max: usize },

    #[error("series is degenerate: detrended variance is zero at every scale")]
    DegenerateSeries,

    #[error("all {attempted} jackknife sub-fits failed")]
    AllFitsFailed { attempted: usize },

    #[error("all {failures} repetitions failed")]
    AllRepetitionsFailed { failures: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
