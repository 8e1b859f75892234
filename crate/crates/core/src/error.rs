use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("points are affinely dependent")]
    AffinelyDependent,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("halfspace intersection is empty")]
    EmptyIntersection,
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("invalid convex body: {0}")]
    InvalidBody(String),
    #[error("invalid directional model: {0}")]
    InvalidModel(String),
    #[error("cannot shrink sampling window from {current} to {requested}")]
    ShrinkNotAllowed { current: f64, requested: f64 },
    #[error("body with outradius {outradius} exceeds sampled radius {radius}")]
    WindowTooSmall { outradius: f64, radius: f64 },
    #[error("window radius {requested} exceeds sampler capacity {capacity}")]
    WindowOverflow { requested: f64, capacity: f64 },
    #[error("probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
