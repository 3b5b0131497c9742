use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("invalid fusion weights: {0}")]
    InvalidWeights(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unnormalized density (integral {0})")]
    UnnormalizedDensity(f64),

    #[error("GA undefined for non-positive values (got {0})")]
    NonPositiveValue(f64),

    #[error("GA undefined: disjoint supports")]
    DisjointSupports,

    #[error("grids do not share x_min/x_max/n_points")]
    GridMismatch,

    #[error("target correlation {target} is infeasible; attainable range is [{low}, {high}]")]
    InfeasibleCorrelation { target: f64, low: f64, high: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, FusionError>;
