use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Vertex-count cap for exact maximal-clique enumeration.
pub const DEFAULT_CLIQUE_CAP: usize = 24;

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    adjacency: Vec<Vec<bool>>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph {
            adjacency: vec![vec![false; n]; n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = UndirectedGraph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adjacency[a][b] = true;
            self.adjacency[b][a] = true;
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.vertex_count();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.adjacency[a][b])
            .collect()
    }

    pub fn to_dot(&self, names: &[String]) -> String {
        let mut out = String::from("graph covariance {\n");
        for name in names {
            let _ = writeln!(out, "  \"{name}\" [shape=circle];");
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  \"{}\" -- \"{}\";", names[a], names[b]);
        }
        out.push_str("}\n");
        out
    }
}

/// All maximal cliques (Bron–Kerbosch with pivoting), each sorted, the list sorted.
pub fn maximal_cliques(g: &UndirectedGraph, cap: usize) -> Result<Vec<Vec<usize>>> {
    let n = g.vertex_count();
    if n > cap.min(64) {
        return Err(Error::VertexCapExceeded(n, cap.min(64)));
    }
    let neighbors: Vec<u64> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| g.has_edge(a, b))
                .fold(0u64, |m, b| m | (1 << b))
        })
        .collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut out = Vec::new();
    expand(&neighbors, 0, all, 0, &mut out);
    let mut cliques: Vec<Vec<usize>> = out
        .into_iter()
        .map(|mask| (0..n).filter(|&v| mask & (1 << v) != 0).collect())
        .collect();
    cliques.sort();
    Ok(cliques)
}

fn expand(neighbors: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
    if p == 0 {
        if x == 0 && r != 0 {
            out.push(r);
        }
        return;
    }
    let pivot = (p | x).trailing_zeros() as usize;
    let pivot = ones(p | x)
        .max_by_key(|&u| (p & neighbors[u]).count_ones())
        .unwrap_or(pivot);
    for v in ones(p & !neighbors[pivot]).collect::<Vec<_>>() {
        let bit = 1u64 << v;
        expand(neighbors, r | bit, p & neighbors[v], x & neighbors[v], out);
        p &= !bit;
        x |= bit;
    }
}

fn ones(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}
