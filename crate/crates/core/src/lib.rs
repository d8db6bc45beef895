//! Exact inference on convolutional and multiplicative factor graphs over
//! products of cyclic groups.
//!
//! A convolutional factor graph represents the generalized convolution of its
//! factors; a multiplicative one their pointwise product. The two are dual
//! under the per-variable Fourier transform, which lets evidence queries on a
//! convolutional graph run as summations on the transformed graph.

pub mod algebra;
pub mod error;
pub mod graph;
pub mod inference;
pub mod io;
pub mod models;
pub mod random;
pub mod speedup;

pub use algebra::{
    product_all, Assignment, Complex, Direction, Domain, Factor, Semantics, VarId, Variable,
};
pub use error::{Error, Result};
pub use graph::{
    FactorGraph, IndependenceCheck, NamedFactor, ValidationReport, Violation, DEFAULT_JOINT_CAP,
};
pub use inference::{
    answer, answer_traced, cfg_eliminate, cfg_push_marginalization, default_order, fft_query,
    mfg_eliminate, mfg_push_evidence, resolve_method, EliminationOrder, EliminationStep, Method,
    Query,
};
