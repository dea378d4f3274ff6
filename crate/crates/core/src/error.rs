use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("invalid number `{text}`: {msg}")]
    Number { text: String, msg: String },
    #[error("malformed document: {0}")]
    Json(String),
    #[error("at {path}: {msg}")]
    Field { path: String, msg: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("numerator has degree {numerator} but denominator has degree {denominator}")]
    DegreeMismatch { numerator: usize, denominator: usize },
    #[error("identically vanishing resultant")]
    VanishingResultant,
    #[error("marked point has both coordinates identically zero")]
    ZeroMarkedPoint,
    #[error("degenerate fiber: |Res| = {resultant:e} below tolerance {tolerance:e}")]
    DegenerateFiber { resultant: f64, tolerance: f64 },
    #[error("iteration cap exceeded: {predicted} coefficients predicted, cap is {cap}")]
    IterationCap { predicted: usize, cap: usize },
    #[error("expected a map with constant coefficients")]
    NotConstant,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("no certified lower bound for the fiber map (resultant too small)")]
    NoLowerBound,
    #[error("{required} iterations needed, budget is {budget}")]
    NonConvergence { required: u64, budget: u64 },
    #[error("the point (0:0) is not a projective point")]
    InvalidPoint,
    #[error("tolerance must be positive")]
    BadTolerance,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("grid {nx}x{ny} is too small (need at least 3x3)")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("measures live on different grids")]
    GridMismatch,
    #[error("2^{level} does not divide the grid resolution {nx}x{ny}")]
    BadLevel { level: u32, nx: usize, ny: usize },
    #[error("measure has zero total mass")]
    ZeroTotal,
    #[error("threshold {threshold:e} does not exceed the discretization slack {slack:e}")]
    ThresholdBelowSlack { threshold: f64, slack: f64 },
    #[error("invalid rectangle")]
    BadRect,
    #[error("tolerance must be positive, got {0:e}")]
    BadTolerance(f64),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrepError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("the zero polynomial has no finite root set")]
    ZeroPolynomial,
}

/// Top-level error used by front ends to pick an exit status.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Prep(#[from] PrepError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// 1 for bad input, 2 for computation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 1,
            Error::Family(
                FamilyError::DegreeTooSmall(_)
                | FamilyError::DegreeMismatch { .. }
                | FamilyError::VanishingResultant
                | FamilyError::ZeroMarkedPoint
                | FamilyError::NotConstant,
            ) => 1,
            Error::Measure(
                MeasureError::BadRect
                | MeasureError::BadTolerance(_)
                | MeasureError::GridTooSmall { .. }
                | MeasureError::BadLevel { .. }
                | MeasureError::ThresholdBelowSlack { .. },
            ) => 1,
            _ => 2,
        }
    }
}
