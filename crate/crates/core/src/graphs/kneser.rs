use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::graph::{Graph, Provenance};
use crate::error::{invalid, Result};
use crate::exact::binomial;

/// Largest Kneser graph materialized by default.
pub const DEFAULT_MATERIALIZATION_CAP: usize = 5_000;

#[derive(Clone, Debug)]
pub enum KneserGraph {
    Materialized(Graph),
    /// Too large to build; only the vertex count is known.
    Symbolic {
        m: u64,
        k: u64,
        vertex_count: BigUint,
    },
}

impl KneserGraph {
    pub fn vertex_count(&self) -> BigUint {
        match self {
            KneserGraph::Materialized(g) => BigUint::from(g.vertex_count()),
            KneserGraph::Symbolic { vertex_count, .. } => vertex_count.clone(),
        }
    }

    pub fn graph(&self) -> Option<&Graph> {
        match self {
            KneserGraph::Materialized(g) => Some(g),
            KneserGraph::Symbolic { .. } => None,
        }
    }
}

/// All k-subsets of `{0..m-1}` in lexicographic order; vertex `i` of
/// `K(m, k)` is the `i`-th subset.
pub fn kneser_sets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < m - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Kneser graph `K(m, k)`: k-subsets of an m-set, adjacent when disjoint.
pub fn generate_kneser_graph(m: u64, k: u64, materialization_cap: usize) -> Result<KneserGraph> {
    if k == 0 {
        return invalid("Kneser graphs need k >= 1");
    }
    if m < 2 * k {
        return invalid(format!("Kneser graph K({m},{k}) needs m >= 2k"));
    }
    let size = binomial(m, k);
    match size.to_usize() {
        Some(n) if n <= materialization_cap => {
            let (m, k) = (m as usize, k as usize);
            let masks: Vec<u128> = if m <= 128 {
                kneser_sets(m, k).iter().map(|s| s.iter().fold(0u128, |acc, &e| acc | (1 << e))).collect()
            } else {
                return invalid("materialized Kneser graphs are limited to m <= 128");
            };
            let g = Graph::from_fn(n, Provenance::Kneser { m, k }, |u, v| masks[u] & masks[v] == 0)?;
            Ok(KneserGraph::Materialized(g))
        }
        _ => Ok(KneserGraph::Symbolic { m, k, vertex_count: size }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kneser_2_1_is_an_edge() {
        let g = generate_kneser_graph(2, 1, 100).unwrap();
        let g = g.graph().unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn petersen_counts() {
        // Oracle: enumerate 2-subsets of {0..4} and count disjoint pairs.
        let sets = kneser_sets(5, 2);
        let mut disjoint = 0;
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if sets[i].iter().all(|e| !sets[j].contains(e)) {
                    disjoint += 1;
                }
            }
        }
        assert_eq!((sets.len(), disjoint), (10, 15));
        let g = generate_kneser_graph(5, 2, 100).unwrap();
        let g = g.graph().unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (10, 15));
    }

    #[test]
    fn kneser_9_3_and_symbolic_fallback() {
        let g = generate_kneser_graph(9, 3, DEFAULT_MATERIALIZATION_CAP).unwrap();
        assert_eq!(g.vertex_count(), BigUint::from(84u32));
        assert!(g.graph().is_some());
        let big = generate_kneser_graph(501, 167, DEFAULT_MATERIALIZATION_CAP).unwrap();
        assert!(big.graph().is_none());
        assert_eq!(big.vertex_count(), binomial(501, 167));
        assert!(generate_kneser_graph(5, 3, 10).is_err());
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(kneser_sets(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(kneser_sets(3, 3), vec![vec![0, 1, 2]]);
    }
}
