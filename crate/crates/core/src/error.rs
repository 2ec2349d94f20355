//! Error types for every layer of the simulator.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("{0} has non-finite coordinates")]
    NonFinite(&'static str),
    #[error("reflecting plane normal has zero length")]
    ZeroNormal,
    #[error("reflection gain magnitude {0} exceeds 1")]
    ActiveReflector(f64),
    #[error("array must have at least one element in each direction")]
    EmptyArray,
    #[error("{0} must be positive, got {1}")]
    NonPositive(&'static str, f64),
    #[error("lattice axes must be orthonormal")]
    NonOrthonormalAxes,
    #[error("room max corner must exceed min corner on every axis")]
    EmptyRoom,
    #[error("reflecting plane {plane} passes within {distance:e} m of the array center")]
    PlaneThroughArray { plane: usize, distance: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StochasticError {
    #[error("scatterer density must be non-negative and finite, got {0}")]
    NegativeDensity(f64),
    #[error("mean RCS must be positive, got {0}")]
    NonPositiveRcsMean(f64),
    #[error("RCS standard deviation must be non-negative, got {0}")]
    NegativeRcsStd(f64),
    #[error("ellipsoid semi-axes must be positive")]
    DegenerateEllipsoid,
    #[error("at least one beam phase is required")]
    NoBeams,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("zero distance between {0}")]
    ZeroDistance(&'static str),
    #[error("vector length {got} does not match array size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("transmit power must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("noise variance must be non-negative, got {0}")]
    NegativeNoise(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrecodingError {
    #[error("channel vector has zero norm")]
    ZeroChannel,
    #[error("beam {0} has zero norm")]
    ZeroBeam(usize),
    #[error("beam sum cancels (norm {0:e})")]
    VanishingBeamSum(f64),
    #[error("{beams} beams but {phases} phases")]
    PhaseCount { beams: usize, phases: usize },
    #[error("no beams given")]
    NoBeams,
    #[error("weight vector is not unit norm (norm {0})")]
    NotUnitNorm(f64),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluationError {
    #[error("evaluation grid is empty")]
    EmptyGrid,
    #[error("grid spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("disc diameter must be positive, got {0}")]
    NonPositiveDiameter(f64),
    #[error("maps are defined on different grids")]
    GridMismatch,
    #[error("no maps to aggregate")]
    NoMaps,
    #[error("every grid point is flagged; nothing left for the CDF")]
    AllFlagged,
    #[error("outage probability must lie in (0, 1), got {0}")]
    InvalidOutage(f64),
    #[error("reference strategy {0:?} not present")]
    MissingReference(String),
    #[error("at least one realization is required")]
    NoRealizations,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Precoding(#[from] PrecodingError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
}
