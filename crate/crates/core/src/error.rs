use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tolerance error: {0}")]
    Tolerance(String),

    #[error("profile does not decay at the grid ends: edge max {edge:.3e} vs overall max {overall:.3e}")]
    Decay { edge: f64, overall: f64 },

    #[error("evolved profile reached the periodic domain edge at T = {time}: edge max {edge:.3e} vs overall max {overall:.3e}; enlarge the domain")]
    WrapAround { time: f64, edge: f64, overall: f64 },

    #[error("Newton iteration did not converge in {iters} iterations (residual {residual:.3e})")]
    NewtonDivergence { iters: usize, residual: f64 },

    #[error("non-positive height {value:.3e} at cell {index}")]
    PositivityLoss { index: usize, value: f64 },

    #[error("perturbation reached the boundary: |H - 1| = {deviation:.3e} at cell {index}")]
    Boundary { index: usize, deviation: f64 },

    #[error("time step fell below dt_min = {dt_min:.3e} at T = {time}")]
    StepFailure { time: f64, dt_min: f64 },

    #[error("algebraic volume {volume:.3e} is zero within tolerance; use the first-moment normalisation")]
    ZeroVolume { volume: f64 },

    #[error("rescaled profiles have disjoint U ranges")]
    NoOverlap,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// `location` is `line N` for config files or `--flag` for overrides.
    #[error("config error ({location}): {msg}")]
    Config { location: String, msg: String },

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
