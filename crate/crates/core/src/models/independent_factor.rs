//! Independent-factor model over `Z_N`: `y = H x + u` with independent
//! sources `x_i` and a joint noise vector `u`.

use super::check_distribution;
use crate::algebra::{Complex, Factor, Semantics, VarId, Variable};
use crate::error::{Error, Result};
use crate::graph::{FactorGraph, NamedFactor};

#[derive(Debug, Clone, PartialEq)]
pub struct IfSpec {
    /// Domain size `N` shared by every variable.
    pub modulus: usize,
    /// `L × m` mixing matrix; entries are reduced mod `N`.
    pub mixing: Vec<Vec<i64>>,
    /// One distribution over `Z_N` per source.
    pub sources: Vec<Vec<f64>>,
    /// Joint noise distribution over `Z_N^L`, row-major.
    pub noise: Vec<f64>,
}

impl IfSpec {
    pub fn sensors(&self) -> usize {
        self.mixing.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.modulus;
        if n == 0 {
            return Err(Error::InvalidSpec("modulus must be at least 1".into()));
        }
        let m = self.sources.len();
        if let Some(row) = self.mixing.iter().position(|r| r.len() != m) {
            return Err(Error::InvalidSpec(format!(
                "mixing row {} has the wrong length for {m} sources",
                row + 1
            )));
        }
        for (i, p) in self.sources.iter().enumerate() {
            if p.len() != n {
                return Err(Error::InvalidSpec(format!(
                    "source {} needs {n} probabilities",
                    i + 1
                )));
            }
            check_distribution(
                &format!("source {}", i + 1),
                &Factor::from_real(&[(VarId(0), n)], p)?,
            )?;
        }
        let scope = self.sensor_scope();
        let expected: usize = scope.iter().map(|s| s.1).product();
        if self.noise.len() != expected {
            return Err(Error::InvalidSpec(format!(
                "noise needs {expected} entries, got {}",
                self.noise.len()
            )));
        }
        check_distribution("noise", &Factor::from_real(&scope, &self.noise)?)
    }

    fn sensor_scope(&self) -> Vec<(VarId, usize)> {
        (1..=self.sensors())
            .map(|j| (VarId(j as u32), self.modulus))
            .collect()
    }
}

/// Convolutional graph over the sensors: one factor per source carrying
/// `p_{X_i}(x)` at `(H_{1,i} x, …, H_{L,i} x) mod N`, plus the noise factor.
pub fn build_if_model(spec: &IfSpec) -> Result<FactorGraph> {
    spec.validate()?;
    let n = spec.modulus;
    let scope = spec.sensor_scope();
    let variables = (1..=spec.sensors())
        .map(|j| Variable::new(j as u32, format!("y{j}"), n))
        .collect::<Result<Vec<_>>>()?;
    let mut factors = Vec::with_capacity(spec.sources.len() + 1);
    for (i, p) in spec.sources.iter().enumerate() {
        let mut values = vec![Complex::new(0.0, 0.0); n.pow(spec.sensors() as u32)];
        for (x, &mass) in p.iter().enumerate() {
            let offset = spec.mixing.iter().fold(0, |acc, row| {
                let z = (row[i].rem_euclid(n as i64) as usize * x) % n;
                acc * n + z
            });
            values[offset] += mass;
        }
        factors.push(NamedFactor::new(
            format!("x{}", i + 1),
            Factor::new(scope.clone(), values)?,
        ));
    }
    factors.push(NamedFactor::new(
        "noise",
        Factor::from_real(&scope, &spec.noise)?,
    ));
    FactorGraph::new(Semantics::Convolutional, variables, factors)
}
