use thiserror::Error;

/// Errors raised by the tree, process, spine and moment routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid tree shape: {0}")]
    InvalidShape(String),

    #[error("invalid planar tree: {0}")]
    InvalidTree(String),

    #[error("vertex {0} is not in the tree")]
    VertexNotInTree(String),

    #[error("tree has a single leaf, so it has no first branch point")]
    NoBranchPoint,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("enumeration would produce about {estimate} outcomes, above the cap of {cap}")]
    EnumerationCap { estimate: f64, cap: u64 },

    #[error("mean matrix is reducible: type {from} cannot reach type {to}")]
    Reducible { from: String, to: String },

    #[error("mean matrix is irreducible but periodic")]
    Periodic,

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("psi must be strictly positive and finite, got {value} for type {ty}")]
    NonPositivePsi { ty: usize, value: f64 },

    #[error("functional reads interior marks, which the exact shape sum integrates out")]
    InteriorMarks,

    #[error("product functional is malformed: {0}")]
    NotProduct(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
