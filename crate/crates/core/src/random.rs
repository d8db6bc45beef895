//! Seeded random factors, graphs and queries for fuzzing and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{Assignment, Complex, Factor, Semantics, VarId, Variable};
use crate::graph::{FactorGraph, NamedFactor};
use crate::inference::Query;

/// Factor with entries drawn uniformly from `[lo, hi)`.
pub fn random_factor<R: Rng + ?Sized>(
    rng: &mut R,
    scope: &[(VarId, usize)],
    lo: f64,
    hi: f64,
) -> Factor {
    let len = scope.iter().map(|s| s.1).product();
    let values = (0..len)
        .map(|_| Complex::new(rng.random_range(lo..hi), 0.0))
        .collect();
    Factor::new(scope.to_vec(), values).expect("scope and length agree")
}

/// Shape limits for [`random_graph`].
#[derive(Debug, Clone, Copy)]
pub struct GraphShape {
    pub max_vars: usize,
    pub max_domain: usize,
    pub max_factors: usize,
    pub max_scope: usize,
}

impl Default for GraphShape {
    fn default() -> Self {
        GraphShape {
            max_vars: 6,
            max_domain: 5,
            max_factors: 5,
            max_scope: 3,
        }
    }
}

/// Random valid graph with positive entries in `[0.1, 1)`. Every variable is
/// placed in at least one factor.
pub fn random_graph<R: Rng + ?Sized>(
    rng: &mut R,
    semantics: Semantics,
    shape: GraphShape,
) -> FactorGraph {
    let nv = rng.random_range(1..=shape.max_vars);
    let variables: Vec<Variable> = (0..nv)
        .map(|i| {
            Variable::new(
                i as u32,
                format!("x{}", i + 1),
                rng.random_range(2..=shape.max_domain),
            )
            .unwrap()
        })
        .collect();
    let nf = rng.random_range(1..=shape.max_factors);
    let mut scopes: Vec<Vec<usize>> = (0..nf)
        .map(|_| {
            let k = rng.random_range(1..=shape.max_scope.min(nv));
            let mut ids: Vec<usize> = (0..nv).collect();
            ids.shuffle(rng);
            ids.truncate(k);
            ids
        })
        .collect();
    for v in 0..nv {
        if !scopes.iter().any(|s| s.contains(&v)) {
            let j = rng.random_range(0..nf);
            scopes[j].push(v);
        }
    }
    let factors = scopes
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let scope: Vec<(VarId, usize)> = s
                .iter()
                .map(|&i| (variables[i].id, variables[i].size()))
                .collect();
            NamedFactor::new(format!("f{}", j + 1), random_factor(rng, &scope, 0.1, 1.0))
        })
        .collect();
    FactorGraph::new(semantics, variables, factors).expect("generated graph is valid")
}

/// Each variable independently lands in `M`, `E` (with a random value) or `R`.
pub fn random_query<R: Rng + ?Sized>(rng: &mut R, g: &FactorGraph) -> Query {
    let mut marginalize = Vec::new();
    let mut evidence = Assignment::new();
    for v in g.variables() {
        match rng.random_range(0..3) {
            0 => marginalize.push(v.id),
            1 => {
                evidence.insert(v.id, rng.random_range(0..v.size()));
            }
            _ => {}
        }
    }
    Query::new(marginalize, evidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_graphs_respect_the_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = random_graph(&mut rng, Semantics::Convolutional, GraphShape::default());
            assert!(g.validate().is_ok());
            assert!(g.variables().len() <= 6 && g.factors().len() <= 5);
            assert!(g.variables().iter().all(|v| (2..=5).contains(&v.size())));
            let q = random_query(&mut rng, &g);
            assert!(q.validate(&g).is_ok());
        }
    }
}
