use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distance matrix is not square ({rows} rows, row {row} has {cols} entries)")]
    NonSquareMatrix { rows: usize, row: usize, cols: usize },
    #[error("non-finite distance at ({i}, {j})")]
    NonFiniteDistance { i: usize, j: usize },
    #[error("distance matrix is not symmetric at ({i}, {j})")]
    AsymmetricMatrix { i: usize, j: usize },
    #[error("negative distance at ({i}, {j})")]
    NegativeDistance { i: usize, j: usize },
    #[error("triangle inequality violated: d({i},{j}) > d({i},{k}) + d({k},{j})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("zero distance between distinct points {i} and {j}")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("nonzero diagonal entry at {i}")]
    NonZeroDiagonal { i: usize },
    #[error("duplicate points {i} and {j}")]
    DuplicatePoint { i: usize, j: usize },
    #[error("distance between points {i} and {j} is irrational; use the bucketed backend")]
    IrrationalDistanceInRationalBackend { i: usize, j: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bucket width must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("invalid monotone function: {0}")]
    InvalidMonotoneFunction(String),
    #[error("reparameterization is negative at radius {radius}")]
    NonPositiveFunction { radius: f64 },
    #[error("function is not convex")]
    NotConvex,
    #[error("transformation is not orthogonal (deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },
    #[error("similarity matrix is numerically singular (condition estimate {condition:e})")]
    SingularSimilarityMatrix { condition: f64 },
    #[error("lengths are not commensurable (bucketed backend has no exact common unit)")]
    IncommensurableLengths,
    #[error("vector is zero")]
    ZeroVector,
    #[error("exact arithmetic overflowed")]
    OverflowInExactArithmetic,
    #[error("truncation not saturated: MC_{{{k},{l}}} is nonempty")]
    TruncationNotSaturated { k: usize, l: String },
    #[error("{what} has {size} elements, above the limit of {limit}")]
    ResourceLimit { what: String, size: u128, limit: u128 },
    #[error("invalid interval: a = {a} > b = {b}")]
    InvalidInterval { a: f64, b: f64 },
    #[error("point sets differ in size ({left} vs {right})")]
    CardinalityMismatch { left: usize, right: usize },
    #[error("profiles have different observation scales ({left} vs {right})")]
    ScaleMismatch { left: f64, right: f64 },
    #[error("sampling exhausted after {attempts} attempts")]
    SamplingExhausted { attempts: usize },
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonSquareMatrix { .. } => "NON_SQUARE_MATRIX",
            Error::NonFiniteDistance { .. } => "NON_FINITE_DISTANCE",
            Error::AsymmetricMatrix { .. } => "ASYMMETRIC_MATRIX",
            Error::NegativeDistance { .. } => "NEGATIVE_DISTANCE",
            Error::TriangleViolation { .. } => "TRIANGLE_VIOLATION",
            Error::ZeroOffDiagonal { .. } => "ZERO_OFF_DIAGONAL",
            Error::NonZeroDiagonal { .. } => "NONZERO_DIAGONAL",
            Error::DuplicatePoint { .. } => "DUPLICATE_POINT",
            Error::IrrationalDistanceInRationalBackend { .. } => "IRRATIONAL_DISTANCE",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::InvalidTolerance(_) => "INVALID_TOLERANCE",
            Error::InvalidMonotoneFunction(_) => "INVALID_MONOTONE_FUNCTION",
            Error::NonPositiveFunction { .. } => "NON_POSITIVE_FUNCTION",
            Error::NotConvex => "NOT_CONVEX",
            Error::NotOrthogonal { .. } => "NOT_ORTHOGONAL",
            Error::SingularSimilarityMatrix { .. } => "SINGULAR_SIMILARITY_MATRIX",
            Error::IncommensurableLengths => "INCOMMENSURABLE_LENGTHS",
            Error::ZeroVector => "ZERO_VECTOR",
            Error::OverflowInExactArithmetic => "OVERFLOW_IN_EXACT_ARITHMETIC",
            Error::TruncationNotSaturated { .. } => "TRUNCATION_NOT_SATURATED",
            Error::ResourceLimit { .. } => "RESOURCE_LIMIT",
            Error::InvalidInterval { .. } => "INVALID_INTERVAL",
            Error::CardinalityMismatch { .. } => "CARDINALITY_MISMATCH",
            Error::ScaleMismatch { .. } => "SCALE_MISMATCH",
            Error::SamplingExhausted { .. } => "SAMPLING_EXHAUSTED",
            Error::IndexOutOfRange { .. } => "INDEX_OUT_OF_RANGE",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Parse(_) => "PARSE_ERROR",
            Error::Io(_) => "IO_ERROR",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
