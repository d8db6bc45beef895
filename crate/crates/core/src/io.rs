//! JSON file formats: models, queries, model-builder specs and results.
//!
//! Factor values are flat row-major lists, first scope variable slowest.
//! Complex tables are lists of `[re, im]` pairs with `complex: true`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{Assignment, Complex, Factor, Semantics, VarId, Variable};
use crate::error::{Error, Result};
use crate::graph::{FactorGraph, NamedFactor};
use crate::inference::{Method, Query};
use crate::models::{CovarianceModel, GaussianFactor, IfSpec, LatentBlock, LatentSumSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Real(v) => v.len(),
            Values::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn to_complex(&self) -> Vec<Complex> {
        match self {
            Values::Real(v) => v.iter().map(|&x| Complex::new(x, 0.0)).collect(),
            Values::Complex(v) => v.iter().map(|&[re, im]| Complex::new(re, im)).collect(),
        }
    }

    /// Real list unless `complex` is requested.
    pub fn from_complex(values: &[Complex], complex: bool) -> Values {
        if complex {
            Values::Complex(values.iter().map(|z| [z.re, z.im]).collect())
        } else {
            Values::Real(values.iter().map(|z| z.re).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableEntry {
    pub name: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorEntry {
    pub name: String,
    pub scope: Vec<String>,
    pub values: Values,
    #[serde(default)]
    pub complex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub semantics: Semantics,
    pub variables: Vec<VariableEntry>,
    pub factors: Vec<FactorEntry>,
}

impl ModelFile {
    /// Variable ids are assigned by declaration index.
    pub fn to_graph(&self) -> Result<FactorGraph> {
        let variables = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| Variable::new(i as u32, v.name.clone(), v.size))
            .collect::<Result<Vec<_>>>()?;
        let lookup: BTreeMap<&str, &Variable> =
            variables.iter().map(|v| (v.name.as_str(), v)).collect();
        let factors = self
            .factors
            .iter()
            .map(|f| {
                if f.complex != matches!(f.values, Values::Complex(_)) && !f.values.is_empty() {
                    return Err(Error::InvalidSpec(format!(
                        "factor `{}`: complex flag disagrees with its values",
                        f.name
                    )));
                }
                let scope = f
                    .scope
                    .iter()
                    .map(|name| {
                        let v = lookup
                            .get(name.as_str())
                            .ok_or_else(|| Error::UnknownName(name.clone()))?;
                        Ok((v.id, v.size()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(NamedFactor::new(
                    f.name.clone(),
                    Factor::new(scope, f.values.to_complex())?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        FactorGraph::new(self.semantics, variables, factors)
    }

    /// Serializes a graph; factors with a nonzero imaginary part (or all of
    /// them, with `force_complex`) are written as complex.
    pub fn from_graph(g: &FactorGraph, force_complex: bool) -> ModelFile {
        ModelFile {
            semantics: g.semantics(),
            variables: g
                .variables()
                .iter()
                .map(|v| VariableEntry {
                    name: v.name.clone(),
                    size: v.size(),
                })
                .collect(),
            factors: g
                .factors()
                .iter()
                .map(|nf| {
                    let complex = force_complex || nf.factor.max_imag() > 0.0;
                    FactorEntry {
                        name: nf.name.clone(),
                        scope: nf.factor.vars().iter().map(|&v| g.name_of(v)).collect(),
                        values: Values::from_complex(nf.factor.values(), complex),
                        complex,
                    }
                })
                .collect(),
        }
    }
}

fn default_method() -> String {
    "auto".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryFile {
    #[serde(default)]
    pub marginalize: Vec<String>,
    #[serde(default)]
    pub evidence: BTreeMap<String, usize>,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default)]
    pub check_against_oracle: bool,
}

impl Default for QueryFile {
    fn default() -> Self {
        QueryFile {
            marginalize: Vec::new(),
            evidence: BTreeMap::new(),
            method: default_method(),
            check_against_oracle: false,
        }
    }
}

pub fn resolve_names(g: &FactorGraph, names: &[String]) -> Result<Vec<VarId>> {
    names
        .iter()
        .map(|n| {
            g.variable_by_name(n)
                .map(|v| v.id)
                .ok_or_else(|| Error::UnknownName(n.clone()))
        })
        .collect()
}

impl QueryFile {
    pub fn method(&self) -> Result<Method> {
        self.method.parse().map_err(Error::InvalidSpec)
    }

    pub fn resolve(&self, g: &FactorGraph) -> Result<Query> {
        let marginalize = resolve_names(g, &self.marginalize)?;
        let mut evidence = Assignment::new();
        for (name, &value) in &self.evidence {
            let v = g
                .variable_by_name(name)
                .ok_or_else(|| Error::UnknownName(name.clone()))?;
            evidence.insert(v.id, value);
        }
        let query = Query::new(marginalize, evidence);
        query.validate(g)?;
        Ok(query)
    }
}

/// Output of an inference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferResult {
    pub scope: Vec<String>,
    pub values: Values,
    pub complex: bool,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_deviation: Option<f64>,
}

impl InferResult {
    /// Imaginary parts below `1e-9 · max|value|` are dropped.
    pub fn new(
        g: &FactorGraph,
        result: &Factor,
        method: Method,
        max_deviation: Option<f64>,
    ) -> Self {
        let complex = result.max_imag() > 1e-9 * result.max_abs().max(1.0);
        InferResult {
            scope: result.vars().iter().map(|&v| g.name_of(v)).collect(),
            values: Values::from_complex(result.values(), complex),
            complex,
            method: method.to_string(),
            max_deviation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentBlockEntry {
    pub ids: Vec<u32>,
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentSumFile {
    pub blocks: Vec<LatentBlockEntry>,
    #[serde(default)]
    pub sums: Vec<Vec<u32>>,
}

impl LatentSumFile {
    pub fn to_spec(&self) -> Result<LatentSumSpec> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                if b.ids.len() != b.sizes.len() {
                    return Err(Error::InvalidSpec(
                        "block ids and sizes differ in length".into(),
                    ));
                }
                let scope: Vec<(VarId, usize)> = b
                    .ids
                    .iter()
                    .map(|&i| VarId(i))
                    .zip(b.sizes.iter().copied())
                    .collect();
                Ok(LatentBlock {
                    ids: b.ids.clone(),
                    factor: Factor::from_real(&scope, &b.values)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = LatentSumSpec {
            blocks,
            sums: self.sums.clone(),
        };
        spec.validate_structure()?;
        Ok(spec)
    }
}

/// Dense covariance model; `covariance` is row-major `n × n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceFile {
    #[serde(default)]
    pub names: Vec<String>,
    #[serde(default)]
    pub mean: Vec<f64>,
    pub covariance: Vec<f64>,
}

impl CovarianceFile {
    pub fn to_model(&self) -> Result<CovarianceModel> {
        let n = (self.covariance.len() as f64).sqrt().round() as usize;
        if n * n != self.covariance.len() {
            return Err(Error::InvalidSpec(format!(
                "{} covariance entries is not a square",
                self.covariance.len()
            )));
        }
        let names = if self.names.is_empty() {
            (1..=n).map(|i| format!("y{i}")).collect()
        } else {
            self.names.clone()
        };
        let mean = if self.mean.is_empty() {
            vec![0.0; n]
        } else {
            self.mean.clone()
        };
        CovarianceModel::new(
            names,
            DVector::from_vec(mean),
            DMatrix::from_row_slice(n, n, &self.covariance),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfFile {
    pub modulus: usize,
    pub mixing: Vec<Vec<i64>>,
    #[serde(default)]
    pub sources: Vec<Vec<f64>>,
    pub noise: Vec<f64>,
}

impl From<IfFile> for IfSpec {
    fn from(f: IfFile) -> Self {
        IfSpec {
            modulus: f.modulus,
            mixing: f.mixing,
            sources: f.sources,
            noise: f.noise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFactorEntry {
    pub scope: Vec<String>,
    pub mean: Vec<f64>,
    /// Row-major `|scope| × |scope|`.
    pub covariance: Vec<f64>,
}

/// Output of the Gaussian model builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDecomposition {
    pub factors: Vec<GaussianFactorEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sample_deviation: Option<f64>,
}

impl GaussianDecomposition {
    pub fn new(
        model: &CovarianceModel,
        factors: &[GaussianFactor],
        sample_deviation: Option<f64>,
    ) -> Self {
        GaussianDecomposition {
            factors: factors
                .iter()
                .map(|f| GaussianFactorEntry {
                    scope: f.scope.iter().map(|&i| model.names[i].clone()).collect(),
                    mean: f.mean.iter().copied().collect(),
                    covariance: f.covariance.transpose().iter().copied().collect(),
                })
                .collect(),
            sample_deviation,
        }
    }
}
