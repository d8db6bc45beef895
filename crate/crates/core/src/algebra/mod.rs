//! Dense factor algebra over products of cyclic groups.
//!
//! Every variable ranges over `Z_N` for its own `N`. A [`Factor`] is a dense
//! complex table over an ordered scope, stored row-major with the first scope
//! variable slowest. The same type carries both probability tables and their
//! Fourier transforms.

mod factor;
mod fourier;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use factor::{product_all, Factor};
pub use fourier::Direction;

pub type Complex = num_complex::Complex64;

/// Absolute tolerance for exact algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for transform round trips.
pub const TRANSFORM_TOL: f64 = 1e-10;
/// Tolerance for probabilistic assertions (normalization, independence, method agreement).
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Order of the cyclic group a variable ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain(usize);

impl Domain {
    pub fn new(size: usize) -> Option<Self> {
        (size >= 1).then_some(Domain(size))
    }

    pub fn size(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub domain: Domain,
}

impl Variable {
    pub fn new(id: u32, name: impl Into<String>, size: usize) -> Result<Self> {
        let id = VarId(id);
        let domain = Domain::new(size).ok_or(Error::EmptyDomain(id))?;
        Ok(Variable {
            id,
            name: name.into(),
            domain,
        })
    }

    pub fn size(&self) -> usize {
        self.domain.size()
    }
}

/// Which product combines the factors of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    Convolutional,
    Multiplicative,
}

impl Semantics {
    pub fn dual(self) -> Self {
        match self {
            Semantics::Convolutional => Semantics::Multiplicative,
            Semantics::Multiplicative => Semantics::Convolutional,
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Convolutional => "convolutional",
            Semantics::Multiplicative => "multiplicative",
        })
    }
}

/// A fixed configuration of some variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<VarId, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: VarId, value: usize) -> Self {
        self.0.insert(var, value);
        self
    }

    pub fn insert(&mut self, var: VarId, value: usize) -> Option<usize> {
        self.0.insert(var, value)
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.0.get(&var).copied()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.contains_key(&var)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.0.iter().map(|(&v, &x)| (v, x))
    }

    /// Restriction to the variables accepted by `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(VarId) -> bool) -> Assignment {
        Assignment(
            self.0
                .iter()
                .filter(|(v, _)| keep(**v))
                .map(|(&v, &x)| (v, x))
                .collect(),
        )
    }
}

impl FromIterator<(VarId, usize)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, usize)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}
