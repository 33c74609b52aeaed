use thiserror::Error;

/// Errors raised by the measure algebra, the transforms and the numerical engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("integrability estimate is not finite: {0}")]
    NonFinite(String),

    #[error("logarithmic moment diverges ({0})")]
    LogMomentDiverges(String),

    #[error("quadrature failed to converge (error estimate {estimate:.3e})")]
    QuadratureFailure { estimate: f64 },

    #[error("numerical differentiation unstable (Richardson disagreement {disagreement:.3e})")]
    DifferentiationUnstable { disagreement: f64 },

    #[error("time grid too coarse (refinement changed the result by {change:.3e})")]
    GridTooCoarse { change: f64 },

    #[error("unsupported seed: {0}")]
    UnsupportedSeed(String),

    #[error("malformed document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, LevyError>;
