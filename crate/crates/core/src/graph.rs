//! Bipartite factor graphs under either product semantics.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::{self, Write as _};

use crate::algebra::{product_all, Direction, Factor, Semantics, VarId, Variable, PROB_TOL};
use crate::error::{Error, Result};

/// Default cap on the number of entries of a brute-force joint table.
pub const DEFAULT_JOINT_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedFactor {
    pub name: String,
    pub factor: Factor,
}

impl NamedFactor {
    pub fn new(name: impl Into<String>, factor: Factor) -> Self {
        NamedFactor {
            name: name.into(),
            factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateVariableId(VarId),
    DuplicateVariableName(String),
    DuplicateFactorName(String),
    UndeclaredVariable {
        factor: String,
        var: VarId,
    },
    DomainMismatch {
        factor: String,
        var: VarId,
        declared: usize,
        actual: usize,
    },
    UncoveredVariable(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVariableId(v) => write!(f, "variable id {v} declared twice"),
            Violation::DuplicateVariableName(n) => write!(f, "variable name `{n}` declared twice"),
            Violation::DuplicateFactorName(n) => write!(f, "factor name `{n}` used twice"),
            Violation::UndeclaredVariable { factor, var } => {
                write!(f, "factor `{factor}` references undeclared variable {var}")
            }
            Violation::DomainMismatch {
                factor,
                var,
                declared,
                actual,
            } => {
                write!(
                    f,
                    "factor `{factor}` uses {var} with size {actual}, declared {declared}"
                )
            }
            Violation::UncoveredVariable(n) => write!(f, "variable `{n}` is in no factor scope"),
        }
    }
}

/// Every invariant violation found in one pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Outcome of a marginal-independence test on the normalized joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependenceCheck {
    pub independent: bool,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    semantics: Semantics,
    variables: Vec<Variable>,
    factors: Vec<NamedFactor>,
}

impl FactorGraph {
    /// Builds and validates.
    pub fn new(
        semantics: Semantics,
        variables: Vec<Variable>,
        factors: Vec<NamedFactor>,
    ) -> Result<Self> {
        let g = FactorGraph {
            semantics,
            variables,
            factors,
        };
        g.validate().map_err(Error::Invalid)?;
        Ok(g)
    }

    /// Builds without checking invariants; see [`FactorGraph::validate`].
    pub fn new_unchecked(
        semantics: Semantics,
        variables: Vec<Variable>,
        factors: Vec<NamedFactor>,
    ) -> Self {
        FactorGraph {
            semantics,
            variables,
            factors,
        }
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn factors(&self) -> &[NamedFactor] {
        &self.factors
    }

    pub fn var_ids(&self) -> Vec<VarId> {
        self.variables.iter().map(|v| v.id).collect()
    }

    pub fn variable(&self, id: VarId) -> Option<&Variable> {
        self.variables.iter().find(|v| v.id == id)
    }

    pub fn variable_by_name(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn name_of(&self, id: VarId) -> String {
        self.variable(id)
            .map_or_else(|| id.to_string(), |v| v.name.clone())
    }

    /// Indices of the factors adjacent to `var`.
    pub fn neighbors(&self, var: VarId) -> Vec<usize> {
        (0..self.factors.len())
            .filter(|&j| self.factors[j].factor.contains(var))
            .collect()
    }

    pub fn degree(&self, var: VarId) -> usize {
        self.neighbors(var).len()
    }

    /// Variable–factor edges as `(variable index, factor index)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (j, nf) in self.factors.iter().enumerate() {
            for v in nf.factor.vars() {
                if let Some(i) = self.variables.iter().position(|w| w.id == *v) {
                    edges.push((i, j));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut report = ValidationReport::default();
        let mut ids = HashMap::new();
        let mut names = HashSet::new();
        for v in &self.variables {
            if ids.insert(v.id, v.size()).is_some() {
                report.violations.push(Violation::DuplicateVariableId(v.id));
            }
            if !names.insert(v.name.as_str()) {
                report
                    .violations
                    .push(Violation::DuplicateVariableName(v.name.clone()));
            }
        }
        let mut factor_names = HashSet::new();
        let mut covered = HashSet::new();
        for nf in &self.factors {
            if !factor_names.insert(nf.name.as_str()) {
                report
                    .violations
                    .push(Violation::DuplicateFactorName(nf.name.clone()));
            }
            for (v, n) in nf.factor.scope() {
                covered.insert(v);
                match ids.get(&v) {
                    None => report.violations.push(Violation::UndeclaredVariable {
                        factor: nf.name.clone(),
                        var: v,
                    }),
                    Some(&declared) if declared != n => {
                        report.violations.push(Violation::DomainMismatch {
                            factor: nf.name.clone(),
                            var: v,
                            declared,
                            actual: n,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        for v in &self.variables {
            if !covered.contains(&v.id) {
                report
                    .violations
                    .push(Violation::UncoveredVariable(v.name.clone()));
            }
        }
        if report.violations.is_empty() {
            Ok(())
        } else {
            Err(report)
        }
    }

    /// Dual graph: same structure, flipped semantics, transformed factors.
    ///
    /// A convolutional graph maps through the forward transform and a
    /// multiplicative one through the inverse, so dualizing twice is the identity.
    pub fn dualize(&self) -> FactorGraph {
        let direction = match self.semantics {
            Semantics::Convolutional => Direction::Forward,
            Semantics::Multiplicative => Direction::Inverse,
        };
        let factors = self
            .factors
            .iter()
            .map(|nf| NamedFactor {
                name: nf.name.clone(),
                factor: nf.factor.dft(direction),
            })
            .collect();
        FactorGraph {
            semantics: self.semantics.dual(),
            variables: self.variables.clone(),
            factors,
        }
    }

    fn check_ids(&self, sets: &[&[VarId]]) -> Result<()> {
        let mut seen = HashSet::new();
        for set in sets {
            let own: BTreeSet<VarId> = set.iter().copied().collect();
            for v in own {
                if self.variable(v).is_none() {
                    return Err(Error::UnknownVariable(v));
                }
                if !seen.insert(v) {
                    return Err(Error::OverlappingSets(v));
                }
            }
        }
        Ok(())
    }

    /// Whether every path from `a` to `b` in the bipartite graph passes
    /// through a variable vertex of `s`.
    pub fn separates(&self, a: &[VarId], b: &[VarId], s: &[VarId]) -> Result<bool> {
        self.check_ids(&[a, b, s])?;
        let blocked: HashSet<VarId> = s.iter().copied().collect();
        let target: HashSet<VarId> = b.iter().copied().collect();
        let mut seen_vars: HashSet<VarId> = a.iter().copied().collect();
        let mut seen_factors = vec![false; self.factors.len()];
        let mut queue: VecDeque<VarId> = a.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            for j in self.neighbors(v) {
                if std::mem::replace(&mut seen_factors[j], true) {
                    continue;
                }
                for &w in self.factors[j].factor.vars() {
                    if target.contains(&w) {
                        return Ok(false);
                    }
                    if !blocked.contains(&w) && seen_vars.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Number of entries of the full joint table.
    pub fn joint_size(&self) -> u128 {
        self.variables.iter().map(|v| v.size() as u128).product()
    }

    /// Brute-force product of all factors, scope in declaration order.
    pub fn joint(&self, cap: usize) -> Result<Factor> {
        let size = self.joint_size();
        if size > cap as u128 {
            return Err(Error::SizeCapExceeded { size, cap });
        }
        let product = product_all(self.factors.iter().map(|nf| &nf.factor), self.semantics)?;
        product.permuted(&self.var_ids())
    }

    /// Tests `p(A,B) == p(A)·p(B)` on the normalized joint within 1e-9.
    pub fn check_marginal_independence(
        &self,
        a: &[VarId],
        b: &[VarId],
        cap: usize,
    ) -> Result<IndependenceCheck> {
        self.check_ids(&[a, b])?;
        if a.is_empty() || b.is_empty() {
            return Ok(IndependenceCheck {
                independent: true,
                max_deviation: 0.0,
            });
        }
        let joint = self.joint(cap)?.normalize()?;
        let ab: Vec<VarId> = self
            .var_ids()
            .into_iter()
            .filter(|v| a.contains(v) || b.contains(v))
            .collect();
        let p_ab = joint.marginalize_to(&ab);
        let p_a = p_ab.marginalize_to(a);
        let p_b = p_ab.marginalize_to(b);
        let product = p_a.multiply(&p_b)?;
        let max_deviation = p_ab.max_abs_diff(&product)?;
        Ok(IndependenceCheck {
            independent: max_deviation <= PROB_TOL,
            max_deviation,
        })
    }

    /// Graphviz rendering: variables as circles, factors as squares.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph {} {{", self.semantics);
        for v in &self.variables {
            let _ = writeln!(out, "  \"{}\" [shape=circle];", v.name);
        }
        for nf in &self.factors {
            let _ = writeln!(out, "  \"{}\" [shape=square];", nf.name);
        }
        for (i, j) in self.edges() {
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\";",
                self.variables[i].name, self.factors[j].name
            );
        }
        out.push_str("}\n");
        out
    }
}
