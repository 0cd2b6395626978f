use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-positive density {0}")]
    NonPositiveDensity(f64),
    #[error("non-positive pressure {0}")]
    NonPositivePressure(f64),
    #[error("face normal is not a unit vector (|n| = {0})")]
    NonUnitNormal(f64),
    #[error("Roe-averaged sound speed squared is non-positive ({0})")]
    ImaginarySoundSpeed(f64),
    #[error("non-positive vortex temperature {0}")]
    NonPositiveTemperature(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(
        "observed order undefined: errors ({e1}, {e2}) must be positive and spacings distinct"
    )]
    UndefinedOrder { e1: f64, e2: f64 },
    #[error("2*h*omega = {0} is outside the false-accuracy regime (must be < 1)")]
    OutOfRegime(f64),
    #[error("no convergence after {iterations} iterations (residual ratio {ratio:e})")]
    NotConverged { iterations: usize, ratio: f64 },
    #[error("solver diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: usize, reason: String },
}
