use thiserror::Error;

use crate::algebra::VarId;
use crate::graph::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable {var} has domain size {left} in one operand and {right} in the other")]
    DomainMismatch {
        var: VarId,
        left: usize,
        right: usize,
    },

    #[error("unknown variable {0}")]
    UnknownVariable(VarId),

    #[error("unknown variable name `{0}`")]
    UnknownName(String),

    #[error("value {value} is outside the domain of {var} (size {size})")]
    ValueOutOfDomain {
        var: VarId,
        value: usize,
        size: usize,
    },

    #[error("variable {0} appears more than once in a scope")]
    DuplicateVariable(VarId),

    #[error("domain sizes must be at least 1 (variable {0})")]
    EmptyDomain(VarId),

    #[error("expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("cannot normalize: total is {0}")]
    ZeroTotal(f64),

    #[error("factor is not real and non-negative (worst entry {0})")]
    NotReal(String),

    #[error("invalid factor graph: {0}")]
    Invalid(ValidationReport),

    #[error("table of {size} entries exceeds the cap of {cap}")]
    SizeCapExceeded { size: u128, cap: usize },

    #[error("elimination order does not match the target set: {0}")]
    OrderMismatch(String),

    #[error("method {method} is not applicable to a {semantics} graph")]
    MethodMismatch { method: String, semantics: String },

    #[error("variable sets must be disjoint ({0} appears in two of them)")]
    OverlappingSets(VarId),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("clique {clique:?} covariance is not PSD (min eigenvalue {min_eigenvalue:e}); the equal-split construction does not apply")]
    HeuristicFailure {
        clique: Vec<usize>,
        min_eigenvalue: f64,
    },

    #[error("graph has {0} vertices, above the clique-enumeration cap of {1}")]
    VertexCapExceeded(usize, usize),
}
