//! Exact inference: elimination on both semantics and the FFT-dual pipeline.
//!
//! Every query has the form `Σ_{x_M} p(x_M, x_R, x̄_E)`. On a multiplicative
//! graph the evidence is sliced into the factors first and `M` is summed out
//! by elimination. On a convolutional graph the roles swap: `M` is summed
//! inside each factor first and `E` is eliminated by convolve-then-evaluate,
//! or, equivalently, by summing the dual variables `x̂_E` on the transformed
//! (multiplicative) graph.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::algebra::{product_all, Assignment, Complex, Direction, Factor, Semantics, VarId};
use crate::error::{Error, Result};
use crate::graph::{FactorGraph, NamedFactor};

/// Marginalization set `M` and evidence on `E`; the retained set is the rest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Query {
    pub marginalize: Vec<VarId>,
    pub evidence: Assignment,
}

impl Query {
    pub fn new(marginalize: Vec<VarId>, evidence: Assignment) -> Self {
        Query {
            marginalize,
            evidence,
        }
    }

    pub fn validate(&self, g: &FactorGraph) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &v in &self.marginalize {
            g.variable(v).ok_or(Error::UnknownVariable(v))?;
            if !seen.insert(v) {
                return Err(Error::OverlappingSets(v));
            }
        }
        for (v, x) in self.evidence.iter() {
            let var = g.variable(v).ok_or(Error::UnknownVariable(v))?;
            if !seen.insert(v) {
                return Err(Error::OverlappingSets(v));
            }
            if x >= var.size() {
                return Err(Error::ValueOutOfDomain {
                    var: v,
                    value: x,
                    size: var.size(),
                });
            }
        }
        Ok(())
    }

    /// `R = V \ (M ∪ E)` in declaration order.
    pub fn retained(&self, g: &FactorGraph) -> Vec<VarId> {
        g.var_ids()
            .into_iter()
            .filter(|v| !self.marginalize.contains(v) && !self.evidence.contains(*v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrder(pub Vec<VarId>);

impl EliminationOrder {
    pub fn as_slice(&self) -> &[VarId] {
        &self.0
    }

    fn check(&self, targets: &[VarId]) -> Result<()> {
        let order: BTreeSet<VarId> = self.0.iter().copied().collect();
        if order.len() != self.0.len() {
            return Err(Error::OrderMismatch("order contains duplicates".into()));
        }
        let want: BTreeSet<VarId> = targets.iter().copied().collect();
        if order != want {
            return Err(Error::OrderMismatch(format!(
                "order {:?} vs targets {:?}",
                order, want
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    Elimination,
    Fft,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::Elimination => "elimination",
            Method::Fft => "fft",
            Method::Oracle => "oracle",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Method::Auto),
            "elimination" => Ok(Method::Elimination),
            "fft" => Ok(Method::Fft),
            "oracle" => Ok(Method::Oracle),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// One elimination step, for tracing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminationStep {
    pub variable: VarId,
    pub absorbed: Vec<String>,
    pub created: String,
    pub scope: Vec<VarId>,
}

type Trace<'a> = Option<&'a mut Vec<EliminationStep>>;

/// Leaf-first order: repeatedly take the target with the fewest adjacent
/// factors in the progressively reduced graph, ties broken by id.
pub fn default_order(g: &FactorGraph, targets: &[VarId]) -> EliminationOrder {
    let mut scopes: Vec<BTreeSet<VarId>> = g
        .factors()
        .iter()
        .map(|nf| nf.factor.vars().iter().copied().collect())
        .collect();
    let mut remaining: BTreeSet<VarId> = targets.iter().copied().collect();
    let mut order = Vec::with_capacity(remaining.len());
    while let Some(&next) = remaining
        .iter()
        .min_by_key(|&&v| (scopes.iter().filter(|s| s.contains(&v)).count(), v))
    {
        remaining.remove(&next);
        let (absorbed, mut kept): (Vec<_>, Vec<_>) =
            scopes.into_iter().partition(|s| s.contains(&next));
        let mut merged: BTreeSet<VarId> = absorbed.into_iter().flatten().collect();
        merged.remove(&next);
        kept.push(merged);
        scopes = kept;
        order.push(next);
    }
    EliminationOrder(order)
}

/// Runs the shared elimination loop: for each variable, absorb its adjacent
/// factors with `reduce` and install the result as `f_{m+i}`.
fn eliminate(
    factors: &[NamedFactor],
    order: &EliminationOrder,
    mut trace: Trace<'_>,
    mut reduce: impl FnMut(VarId, &[&Factor]) -> Result<Factor>,
) -> Result<Vec<NamedFactor>> {
    let m = factors.len();
    let mut live: Vec<NamedFactor> = factors.to_vec();
    for (i, &x) in order.as_slice().iter().enumerate() {
        let (adjacent, rest): (Vec<_>, Vec<_>) =
            live.into_iter().partition(|nf| nf.factor.contains(x));
        let created = format!("f{}", m + i + 1);
        let factor = reduce(x, &adjacent.iter().map(|nf| &nf.factor).collect::<Vec<_>>())?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(EliminationStep {
                variable: x,
                absorbed: adjacent.iter().map(|nf| nf.name.clone()).collect(),
                created: created.clone(),
                scope: factor.vars().to_vec(),
            });
        }
        live = rest;
        live.push(NamedFactor {
            name: created,
            factor,
        });
    }
    Ok(live)
}

fn mfg_eliminate_traced(
    g: &FactorGraph,
    targets: &[VarId],
    order: &EliminationOrder,
    trace: Trace<'_>,
) -> Result<Factor> {
    if g.semantics() != Semantics::Multiplicative {
        return Err(Error::MethodMismatch {
            method: "mfg-elimination".into(),
            semantics: g.semantics().to_string(),
        });
    }
    order.check(targets)?;
    let survivors = eliminate(g.factors(), order, trace, |x, adjacent| {
        if adjacent.is_empty() {
            let n = g.variable(x).map_or(1, |v| v.size());
            return Ok(Factor::scalar(Complex::new(n as f64, 0.0)));
        }
        product_all(adjacent.iter().copied(), Semantics::Multiplicative)?.marginalize(&[x])
    })?;
    product_all(
        survivors.iter().map(|nf| &nf.factor),
        Semantics::Multiplicative,
    )
}

/// `Σ_{x_M} ∏ f_j` by successive elimination of the variables of `targets`.
///
/// Evidence must already have been pushed into the factors.
pub fn mfg_eliminate(
    g: &FactorGraph,
    targets: &[VarId],
    order: &EliminationOrder,
) -> Result<Factor> {
    mfg_eliminate_traced(g, targets, order, None)
}

/// Slices every factor at its evidenced variables and drops those vertices.
pub fn mfg_push_evidence(g: &FactorGraph, evidence: &Assignment) -> Result<FactorGraph> {
    check_evidence(g, evidence)?;
    let factors = g
        .factors()
        .iter()
        .map(|nf| {
            Ok(NamedFactor {
                name: nf.name.clone(),
                factor: nf.factor.evaluate_within(evidence)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let variables = g
        .variables()
        .iter()
        .filter(|v| !evidence.contains(v.id))
        .cloned()
        .collect();
    Ok(FactorGraph::new_unchecked(
        g.semantics(),
        variables,
        factors,
    ))
}

fn check_evidence(g: &FactorGraph, evidence: &Assignment) -> Result<()> {
    for (v, x) in evidence.iter() {
        let var = g.variable(v).ok_or(Error::UnknownVariable(v))?;
        if x >= var.size() {
            return Err(Error::ValueOutOfDomain {
                var: v,
                value: x,
                size: var.size(),
            });
        }
    }
    Ok(())
}

/// Sums each factor over its share of `m` and drops those vertices.
pub fn cfg_push_marginalization(g: &FactorGraph, m: &[VarId]) -> Result<FactorGraph> {
    for &v in m {
        g.variable(v).ok_or(Error::UnknownVariable(v))?;
    }
    let factors = g
        .factors()
        .iter()
        .map(|nf| {
            let local: Vec<VarId> = nf
                .factor
                .vars()
                .iter()
                .copied()
                .filter(|v| m.contains(v))
                .collect();
            Ok(NamedFactor {
                name: nf.name.clone(),
                factor: nf.factor.marginalize(&local)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let variables = g
        .variables()
        .iter()
        .filter(|v| !m.contains(&v.id))
        .cloned()
        .collect();
    Ok(FactorGraph::new_unchecked(
        g.semantics(),
        variables,
        factors,
    ))
}

fn cfg_eliminate_traced(
    g: &FactorGraph,
    evidence: &Assignment,
    order: &EliminationOrder,
    trace: Trace<'_>,
) -> Result<Factor> {
    if g.semantics() != Semantics::Convolutional {
        return Err(Error::MethodMismatch {
            method: "cfg-elimination".into(),
            semantics: g.semantics().to_string(),
        });
    }
    check_evidence(g, evidence)?;
    order.check(&evidence.vars().collect::<Vec<_>>())?;
    let survivors = eliminate(g.factors(), order, trace, |x, adjacent| {
        let value = evidence.get(x).expect("order matches evidence");
        let cluster = product_all(adjacent.iter().copied(), Semantics::Convolutional)?;
        if cluster.contains(x) {
            cluster.evaluate(&Assignment::new().with(x, value))
        } else {
            Ok(cluster)
        }
    })?;
    product_all(
        survivors.iter().map(|nf| &nf.factor),
        Semantics::Convolutional,
    )
}

/// `F(x_{V\E}, x̄_E)` on a convolutional graph by successive
/// convolve-then-evaluate over the evidenced variables.
///
/// Marginalization must already have been pushed into the factors.
pub fn cfg_eliminate(
    g: &FactorGraph,
    evidence: &Assignment,
    order: &EliminationOrder,
) -> Result<Factor> {
    cfg_eliminate_traced(g, evidence, order, None)
}

fn fft_query_traced(g: &FactorGraph, query: &Query, trace: Trace<'_>) -> Result<Factor> {
    if g.semantics() != Semantics::Convolutional {
        return Err(Error::MethodMismatch {
            method: Method::Fft.to_string(),
            semantics: g.semantics().to_string(),
        });
    }
    query.validate(g)?;
    let reduced = cfg_push_marginalization(g, &query.marginalize)?;
    let evidence = &query.evidence;

    // Transform, then attach the character of each evidenced variable to the
    // first factor that holds it (exactly once, since the factors multiply).
    let mut pending = evidence.clone();
    let dual_factors = reduced
        .factors()
        .iter()
        .map(|nf| {
            let mut f = nf.factor.dft(Direction::Forward);
            for (v, x) in evidence.iter() {
                if f.contains(v) && pending.contains(v) {
                    f = f.apply_character(v, x)?;
                    pending = pending.restrict(|u| u != v);
                }
            }
            Ok(NamedFactor {
                name: nf.name.clone(),
                factor: f,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dual = FactorGraph::new_unchecked(
        Semantics::Multiplicative,
        reduced.variables().to_vec(),
        dual_factors,
    );

    let targets: Vec<VarId> = evidence.vars().collect();
    let order = default_order(&dual, &targets);
    let summed = mfg_eliminate_traced(&dual, &targets, &order, trace)?;

    let scale: f64 = targets
        .iter()
        .map(|&v| g.variable(v).map_or(1.0, |var| var.size() as f64))
        .product();
    Ok(summed
        .scale(Complex::new(1.0 / scale, 0.0))
        .dft(Direction::Inverse))
}

/// Answers `query` on a convolutional graph through the dual multiplicative graph.
pub fn fft_query(g: &FactorGraph, query: &Query) -> Result<Factor> {
    fft_query_traced(g, query, None)
}

/// `Σ_{x_M} p(x_M, x_R, x̄_E)` with scope `R` in declaration order.
pub fn answer(g: &FactorGraph, query: &Query, method: Method, joint_cap: usize) -> Result<Factor> {
    answer_traced(g, query, method, joint_cap, None)
}

/// The concrete method `method` stands for: `Auto` picks the FFT path for
/// convolutional queries with evidence and elimination otherwise.
pub fn resolve_method(semantics: Semantics, query: &Query, method: Method) -> Result<Method> {
    match (method, semantics) {
        (Method::Auto, Semantics::Convolutional) if !query.evidence.is_empty() => Ok(Method::Fft),
        (Method::Auto, _) => Ok(Method::Elimination),
        (Method::Fft, Semantics::Multiplicative) => Err(Error::MethodMismatch {
            method: Method::Fft.to_string(),
            semantics: semantics.to_string(),
        }),
        (m, _) => Ok(m),
    }
}

pub fn answer_traced(
    g: &FactorGraph,
    query: &Query,
    method: Method,
    joint_cap: usize,
    trace: Option<&mut Vec<EliminationStep>>,
) -> Result<Factor> {
    query.validate(g)?;
    let method = resolve_method(g.semantics(), query, method)?;
    let result = match (method, g.semantics()) {
        (Method::Oracle, _) => g
            .joint(joint_cap)?
            .evaluate(&query.evidence)?
            .marginalize(&query.marginalize)?,
        (Method::Fft, _) => fft_query_traced(g, query, trace)?,
        (_, Semantics::Multiplicative) => {
            let reduced = mfg_push_evidence(g, &query.evidence)?;
            let order = default_order(&reduced, &query.marginalize);
            mfg_eliminate_traced(&reduced, &query.marginalize, &order, trace)?
        }
        (_, Semantics::Convolutional) => {
            let reduced = cfg_push_marginalization(g, &query.marginalize)?;
            let targets: Vec<VarId> = query.evidence.vars().collect();
            let order = default_order(&reduced, &targets);
            cfg_eliminate_traced(&reduced, &query.evidence, &order, trace)?
        }
    };
    result.permuted(&query.retained(g))
}
