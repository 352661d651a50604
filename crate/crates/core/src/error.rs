use thiserror::Error;

/// Errors raised by the tensor, geometry and analysis layers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum MtlError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("arity mismatch: tensor of rank {rank} evaluated on {args} arguments")]
    ArityMismatch { rank: usize, args: usize },

    #[error("malformed multi-index: {0}")]
    MalformedIndex(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("face is not a face of this polytope")]
    NotAFace,

    #[error("invalid indices: {0}")]
    InvalidIndices(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weight does not match carrier: {0}")]
    WeightCarrierMismatch(String),

    #[error("value depends on the host polytope (difference {difference:.3e})")]
    PolytopeDependence { difference: f64 },

    #[error("rank-deficient design (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("ill-conditioned design (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("tensor is not invariant under rotations fixing the complement (residual {residual:.3e})")]
    InvarianceViolated { residual: f64 },

    #[error("sample set too small: {rows} rows for {columns} columns")]
    SampleTooSmall { rows: usize, columns: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, MtlError>;

impl From<std::io::Error> for MtlError {
    fn from(e: std::io::Error) -> Self {
        MtlError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for MtlError {
    fn from(e: serde_json::Error) -> Self {
        MtlError::Parse(e.to_string())
    }
}
