use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    /// The drift matrix has an eigenvalue with real part at or above the
    /// stability margin.
    #[error("unstable dynamics (max real eigenvalue part {max_real:e})")]
    Unstable { max_real: f64 },

    #[error("matrix is not a passive transformation (deviation {deviation:e})")]
    NotPassive { deviation: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("Riccati integration did not converge (last residual {residual:e} at t = {time})")]
    Divergence { residual: f64, time: f64 },

    #[error("search produced no stable samples out of {trials}")]
    Inconclusive { trials: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}
