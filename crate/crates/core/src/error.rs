//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {0:?} outside chart domain")]
    OutOfDomain(Vec<f64>),

    #[error("degenerate induced metric at u = {point:?} (|det g| = {det:.3e})")]
    DegenerateMetric { point: Vec<f64>, det: f64 },

    #[error("lightlike normal direction at u = {point:?}")]
    NullNormal { point: Vec<f64> },

    #[error("shape-operator canonical types are tabulated for ambient index 0 and 1 only (index is {0})")]
    UnsupportedIndex(usize),

    #[error("empty sample grid")]
    EmptyGrid,

    #[error("position vector too close to the vertex (Euclidean |x| = {0:.3e})")]
    ZeroRadius(f64),

    #[error("support function is not zero at this point (|lambda| = {0:.3e}); radial check applies on the lambda = 0 locus only")]
    NotRadial(f64),

    #[error("invalid ambient signature: index {index} exceeds dimension {dim}")]
    BadSignature { dim: usize, index: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeomError>;
