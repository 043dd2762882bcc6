use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An adaptive quadrature ran out of budget. `value` is the best partial
    /// estimate and `residual` the error estimate it could not push below target.
    #[error(
        "quadrature did not converge: value {value:e}, residual {residual:e} (target {target:e})"
    )]
    NotConverged {
        value: f64,
        residual: f64,
        target: f64,
    },

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    /// Initial data carry too much energy near the Nyquist frequency.
    #[error("grid too coarse: spectral tail fraction {tail_fraction:e} exceeds {limit:e}")]
    Unresolved { tail_fraction: f64, limit: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::Unresolved { .. } | Error::Fit(_)
        )
    }
}
