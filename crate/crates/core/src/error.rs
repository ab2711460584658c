use thiserror::Error;

use crate::group::Element;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid carrier: {0}")]
    InvalidCarrier(String),

    #[error("element {0:?} outside the carrier representation range")]
    OutOfRange(Vec<i64>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("functions live on different carriers")]
    CarrierMismatch,

    #[error("neighborhood must contain the identity and be symmetric")]
    InvalidNeighborhood,

    #[error("node set is empty")]
    EmptyNodeSet,

    #[error("duplicate node {0:?}")]
    DuplicateNode(Element),

    #[error("exponent {0} outside [1, inf]")]
    InvalidExponent(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("partition profile leaves {0:?} uncovered")]
    CoverageGap(Element),

    #[error("partition of unity is not exact (sum ranges over [{lower}, {upper}])")]
    NotExactPartition { lower: f64, upper: f64 },

    #[error("degenerate partition: {0}")]
    DegeneratePartition(String),

    #[error("node set is not closed under the group operation: {0:?}")]
    NotSubgroup(Element),

    #[error(
        "symbol must be real-valued and bounded below by a positive constant (minimum {min}); \
         sign-changing symbols can annihilate atoms, e.g. a ±1 mask that splits a block atom"
    )]
    MaskNotPositive { min: f64 },

    #[error("symbol must be real-valued")]
    ComplexMask,

    #[error("molecule envelope failed verification (worst excess {0})")]
    EnvelopeViolated(f64),

    #[error("system is not a frame (smallest eigenvalue {sigma_min}, largest {sigma_max})")]
    NotAFrame { sigma_min: f64, sigma_max: f64 },

    #[error("window vanishes identically")]
    ZeroWindow,

    #[error("lattice parameter {param} = {value} does not divide {n}")]
    LatticeParameter { param: &'static str, value: usize, n: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}
