use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Where a graph came from; Kneser provenance also fixes the vertex labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Cap,
    Kneser { m: usize, k: usize },
    Explicit,
}

/// Finite simple graph stored as neighbour bitsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<FixedBitSet>,
    provenance: Provenance,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)], provenance: Provenance) -> Result<Self> {
        if n == 0 {
            return invalid("a graph needs at least one vertex");
        }
        let mut adj = vec![FixedBitSet::with_capacity(n); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge ({u},{v}) out of range for {n} vertices"));
            }
            if u == v {
                return invalid(format!("self-loop at vertex {u}"));
            }
            adj[u].insert(v);
            adj[v].insert(u);
        }
        Ok(Graph { adj, provenance })
    }

    /// Builds from a symmetric predicate evaluated on `u < v`.
    pub fn from_fn(n: usize, provenance: Provenance, mut adjacent: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        if n == 0 {
            return invalid("a graph needs at least one vertex");
        }
        let mut adj = vec![FixedBitSet::with_capacity(n); n];
        for u in 0..n {
            for v in u + 1..n {
                if adjacent(u, v) {
                    adj[u].insert(v);
                    adj[v].insert(u);
                }
            }
        }
        Ok(Graph { adj, provenance })
    }

    pub fn single_edge() -> Self {
        Self::complete(2)
    }

    pub fn complete(n: usize) -> Self {
        Self::from_fn(n, Provenance::Explicit, |_, _| true).expect("n >= 1")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycles need three vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges, Provenance::Explicit).expect("valid cycle")
    }

    pub fn edgeless(n: usize) -> Self {
        Self::from_edges(n, &[], Provenance::Explicit).expect("n >= 1")
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    #[inline]
    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &FixedBitSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones(..)
    }

    /// Edges `(u, v)` with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.vertex_count() {
            out.extend(self.adj[u].ones().filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones(..)).sum::<usize>() / 2
    }

    pub fn has_edge(&self) -> bool {
        self.adj.iter().any(|a| !a.is_clear())
    }

    /// First adjacent pair inside `set`, if any.
    pub fn conflict_in(&self, set: &[usize]) -> Option<(usize, usize)> {
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                if u == v || self.is_adjacent(u, v) {
                    return Some((u, v));
                }
            }
        }
        None
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        self.conflict_in(set).is_none()
    }

    pub fn full_set(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.vertex_count());
        s.insert_range(..);
        s
    }

    /// Induced subgraph on `vertices` (relabelled in the given order).
    pub fn induced(&self, vertices: &[usize]) -> Result<Graph> {
        Graph::from_fn(vertices.len(), Provenance::Explicit, |i, j| self.is_adjacent(vertices[i], vertices[j]))
    }
}
