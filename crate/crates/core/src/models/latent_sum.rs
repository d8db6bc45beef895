use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::check_distribution;
use crate::algebra::{Complex, Factor, Semantics, VarId, Variable};
use crate::error::{Error, Result};
use crate::graph::{FactorGraph, NamedFactor};

/// An independent block of latent variables with its joint distribution.
///
/// The factor's scope must be `ids` in order, as `VarId(id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentBlock {
    pub ids: Vec<u32>,
    pub factor: Factor,
}

/// Independent blocks over `1..=|U|` plus the sum sets `V(1..K-1)`.
///
/// Variables in no sum set are observed directly. Sum set `l` (1-based)
/// defines the observed variable `|U| + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSumSpec {
    pub blocks: Vec<LatentBlock>,
    pub sums: Vec<Vec<u32>>,
}

impl LatentSumSpec {
    pub fn universe_size(&self) -> u32 {
        self.blocks.iter().map(|b| b.ids.len() as u32).sum()
    }

    fn domains(&self) -> BTreeMap<u32, usize> {
        self.blocks
            .iter()
            .flat_map(|b| b.ids.iter().copied().zip(b.factor.dims().iter().copied()))
            .collect()
    }

    /// All invariants, including that no sum set holds two variables of one block.
    pub fn validate(&self) -> Result<()> {
        self.check(true)
    }

    /// Partition, scope and domain invariants only; the sum sets may draw
    /// several variables from one block.
    pub fn validate_structure(&self) -> Result<()> {
        self.check(false)
    }

    fn check(&self, repartition: bool) -> Result<()> {
        let u = self.universe_size();
        let mut block_of = BTreeMap::new();
        for (i, b) in self.blocks.iter().enumerate() {
            let expected: Vec<VarId> = b.ids.iter().map(|&id| VarId(id)).collect();
            if b.factor.vars() != expected.as_slice() {
                return Err(Error::InvalidSpec(format!(
                    "block {} factor scope does not match its ids",
                    i + 1
                )));
            }
            check_distribution(&format!("block {}", i + 1), &b.factor)?;
            for &id in &b.ids {
                if id == 0 || id > u {
                    return Err(Error::InvalidSpec(format!(
                        "latent id {id} outside 1..={u}"
                    )));
                }
                if block_of.insert(id, i).is_some() {
                    return Err(Error::InvalidSpec(format!(
                        "latent id {id} appears in two blocks"
                    )));
                }
            }
        }
        let domains = self.domains();
        let mut summed = BTreeSet::new();
        for (l, set) in self.sums.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidSpec(format!("sum set {} is empty", l + 1)));
            }
            let mut blocks_used = BTreeSet::new();
            for &id in set {
                let block = *block_of.get(&id).ok_or_else(|| {
                    Error::InvalidSpec(format!("sum set {} uses unknown id {id}", l + 1))
                })?;
                if !summed.insert(id) {
                    return Err(Error::InvalidSpec(format!(
                        "id {id} appears in two sum sets"
                    )));
                }
                if !blocks_used.insert(block) && repartition {
                    return Err(Error::InvalidSpec(format!(
                        "sum set {} holds two variables of block {}",
                        l + 1,
                        block + 1
                    )));
                }
                if domains[&id] != domains[&set[0]] {
                    return Err(Error::InvalidSpec(format!(
                        "sum set {} mixes domain sizes",
                        l + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// The map `T`: identity on observed ids, `|U| + l` on sum set `l`.
    pub fn mapping(&self) -> BTreeMap<u32, u32> {
        let u = self.universe_size();
        let mut t: BTreeMap<u32, u32> = self
            .blocks
            .iter()
            .flat_map(|b| b.ids.iter().map(|&id| (id, id)))
            .collect();
        for (l, set) in self.sums.iter().enumerate() {
            for &id in set {
                t.insert(id, u + l as u32 + 1);
            }
        }
        t
    }

    /// Observed ids `T(U)`, ascending.
    pub fn observed(&self) -> Vec<u32> {
        self.mapping()
            .values()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// Convolutional graph of the observed variables: one factor per block, its
/// scope mapped through `T`.
pub fn build_latent_sum(spec: &LatentSumSpec) -> Result<FactorGraph> {
    spec.validate()?;
    let t = spec.mapping();
    let domains = spec.domains();
    let mut observed_domain = BTreeMap::new();
    for (&id, &image) in &t {
        observed_domain.insert(image, domains[&id]);
    }
    let variables = observed_domain
        .iter()
        .map(|(&id, &n)| Variable::new(id, format!("x{id}"), n))
        .collect::<Result<Vec<_>>>()?;
    let factors = spec
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let scope = b.factor.scope().map(|(v, n)| (VarId(t[&v.0]), n)).collect();
            Ok(NamedFactor::new(
                format!("p{}", i + 1),
                Factor::new(scope, b.factor.values().to_vec())?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    FactorGraph::new(Semantics::Convolutional, variables, factors)
}

/// Empirical joint of the observed variables from `samples` draws of the
/// latent model, scope in ascending id order.
pub fn simulate_latent_sum(spec: &LatentSumSpec, samples: usize, seed: u64) -> Result<Factor> {
    spec.validate()?;
    let t = spec.mapping();
    let domains = spec.domains();
    let observed = spec.observed();
    let scope: Vec<(VarId, usize)> = observed
        .iter()
        .map(|&o| {
            (
                VarId(o),
                domains[t.iter().find(|(_, &img)| img == o).unwrap().0],
            )
        })
        .collect();
    let dims: Vec<usize> = scope.iter().map(|s| s.1).collect();
    let slot: BTreeMap<u32, usize> = observed.iter().enumerate().map(|(i, &o)| (o, i)).collect();

    let samplers = spec
        .blocks
        .iter()
        .map(|b| {
            WeightedIndex::new(b.factor.values().iter().map(|z| z.re))
                .map_err(|e| Error::InvalidSpec(format!("cannot sample block: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; dims.iter().product()];
    let mut coords = vec![0usize; dims.len()];
    for _ in 0..samples {
        coords.iter_mut().for_each(|c| *c = 0);
        for (b, sampler) in spec.blocks.iter().zip(&samplers) {
            let mut flat = sampler.sample(&mut rng);
            for (k, &id) in b.ids.iter().enumerate().rev() {
                let n = b.factor.dims()[k];
                let value = flat % n;
                flat /= n;
                let s = slot[&t[&id]];
                coords[s] = (coords[s] + value) % dims[s];
            }
        }
        let offset = coords
            .iter()
            .zip(&dims)
            .fold(0, |acc, (&c, &n)| acc * n + c);
        counts[offset] += 1;
    }
    let values = counts
        .iter()
        .map(|&c| Complex::new(c as f64 / samples as f64, 0.0))
        .collect();
    Factor::new(scope, values)
}

/// Chain graph over latent and observed variables: a complete undirected
/// component per block, a directed edge from each summand into its sum.
/// Latent (summed) variables are drawn hollow, observed ones filled.
pub fn export_chain_graph(spec: &LatentSumSpec) -> Result<String> {
    spec.validate_structure()?;
    let u = spec.universe_size();
    let latent: BTreeSet<u32> = spec.sums.iter().flatten().copied().collect();
    let mut out = String::from("digraph chain {\n");
    for id in 1..=u + spec.sums.len() as u32 {
        let style = if latent.contains(&id) {
            ""
        } else {
            ", style=filled, fillcolor=gray"
        };
        let _ = writeln!(out, "  x{id} [shape=circle{style}];");
    }
    for b in &spec.blocks {
        for (k, &a) in b.ids.iter().enumerate() {
            for &c in &b.ids[k + 1..] {
                let _ = writeln!(out, "  x{a} -> x{c} [dir=none];");
            }
        }
    }
    for (l, set) in spec.sums.iter().enumerate() {
        for &id in set {
            let _ = writeln!(out, "  x{id} -> x{};", u + l as u32 + 1);
        }
    }
    out.push_str("}\n");
    Ok(out)
}
