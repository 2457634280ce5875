use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pattern has {0} points, at least {1} required")]
    EmptyPattern(usize, usize),

    #[error("data span is degenerate (zero width or height)")]
    DegenerateSpan,

    #[error("point ({x}, {y}) lies outside the binning span")]
    OutOfSpan { x: f64, y: f64 },

    #[error("point ({x}, {y}) lies outside the observation window")]
    OutOfWindow { x: f64, y: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("intensity {value} at ({x}, {y}) exceeds the thinning bound {bound}")]
    ThinningBound { x: f64, y: f64, value: f64, bound: f64 },

    #[error("parent count rounds to zero")]
    NoParents,

    #[error("hard-core packing failed after {0} consecutive rejections")]
    PackingFailure(usize),

    #[error("cluster shape does not fit inside the window")]
    ShapeExceedsWindow,

    #[error("distance {r} exceeds the edge-correction bound {bound}")]
    RangeTooLarge { r: f64, bound: f64 },

    #[error("K value {0} is negative")]
    NegativeK(f64),

    #[error("curve has {0} grid points, at least {1} required")]
    GridTooShort(usize, usize),

    #[error("{n_sims} simulations cannot support level {level}; need at least {required}")]
    InsufficientSims { n_sims: usize, level: f64, required: usize },

    #[error("histogram integrates to {0}, expected 1")]
    BadNorm(f64),

    #[error("minimum-contrast fit diverged: {0}")]
    FitDiverged(String),

    #[error("regressor has zero variance")]
    DegenerateX,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
