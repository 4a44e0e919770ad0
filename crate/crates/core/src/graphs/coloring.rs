//! Exact k-colouring search (DSATUR order, forward checking, colour-symmetry
//! breaking). A refutation carries the node count and a SHA-256 digest of the
//! full decision trace so that reruns can be compared bit for bit.

use sha2::{Digest, Sha256};

use super::graph::Graph;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColoringOutcome {
    /// A partition of the searched vertices into `k` independent classes
    /// (trailing classes may be empty).
    Colorable { classes: Vec<Vec<usize>> },
    /// Exhaustive search found no colouring.
    Refuted { nodes: u64, trace_digest: String },
    /// Node budget ran out before a decision.
    Exhausted { nodes: u64 },
}

const NONE: u8 = u8::MAX;

struct Search<'a> {
    adj: &'a [Vec<usize>],
    n: usize,
    k: usize,
    color: Vec<u8>,
    domain: Vec<u128>,
    nodes: u64,
    budget: u64,
    hasher: Sha256,
}

enum Step {
    Found,
    Dead,
    OutOfBudget,
}

impl<'a> Search<'a> {
    fn pick(&self, max_used: usize) -> Option<usize> {
        let usable: u128 = if max_used + 1 >= self.k { low_mask(self.k) } else { low_mask(max_used + 2) };
        let mut best: Option<(u32, usize, usize)> = None;
        for v in 0..self.n {
            if self.color[v] != NONE {
                continue;
            }
            let free = (self.domain[v] & usable).count_ones();
            let deg = self.adj[v].iter().filter(|&&u| self.color[u] == NONE).count();
            let better = match best {
                None => true,
                Some((bf, bd, _)) => free < bf || (free == bf && deg > bd),
            };
            if better {
                best = Some((free, deg, v));
            }
        }
        best.map(|(_, _, v)| v)
    }

    fn run(&mut self, colored: usize, max_used: Option<usize>) -> Step {
        if colored == self.n {
            return Step::Found;
        }
        let v = self.pick(max_used.unwrap_or(0)).expect("uncoloured vertex exists");
        let limit = match max_used {
            None => 1,
            Some(m) => (m + 2).min(self.k),
        };
        for c in 0..limit {
            if self.domain[v] & (1u128 << c) == 0 {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Step::OutOfBudget;
            }
            self.hasher.update((v as u32).to_le_bytes());
            self.hasher.update([c as u8]);
            self.color[v] = c as u8;
            let bit = 1u128 << c;
            let mut touched = Vec::new();
            let mut wiped = false;
            for &u in self.adj[v].iter() {
                if self.color[u] == NONE && self.domain[u] & bit != 0 {
                    self.domain[u] &= !bit;
                    touched.push(u);
                    if self.domain[u] & low_mask(self.k) == 0 {
                        wiped = true;
                    }
                }
            }
            if !wiped {
                let next_max = Some(max_used.map_or(c, |m| m.max(c)));
                match self.run(colored + 1, next_max) {
                    Step::Found => return Step::Found,
                    Step::OutOfBudget => return Step::OutOfBudget,
                    Step::Dead => {}
                }
            }
            for u in touched {
                self.domain[u] |= bit;
            }
            self.color[v] = NONE;
            self.hasher.update([0xFF]);
        }
        Step::Dead
    }
}

fn low_mask(k: usize) -> u128 {
    if k >= 128 {
        u128::MAX
    } else {
        (1u128 << k) - 1
    }
}

/// Decides whether `vertices` (an induced subgraph of `g`) splits into `k`
/// independent classes.
pub fn find_coloring(g: &Graph, vertices: &[usize], k: usize, node_budget: u64) -> ColoringOutcome {
    let n = vertices.len();
    if n == 0 {
        return ColoringOutcome::Colorable { classes: vec![Vec::new(); k] };
    }
    if k == 0 {
        return ColoringOutcome::Refuted { nodes: 0, trace_digest: hex(&Sha256::digest(b"k=0")) };
    }
    if k >= n {
        let mut classes: Vec<Vec<usize>> = vertices.iter().map(|&v| vec![v]).collect();
        classes.resize(k, Vec::new());
        return ColoringOutcome::Colorable { classes };
    }
    if k > 128 {
        // Greedy is the only tool past the mask width; a failure is not a refutation.
        let greedy = greedy_classes(g, vertices);
        if greedy.len() <= k {
            let mut classes = greedy;
            classes.resize(k, Vec::new());
            return ColoringOutcome::Colorable { classes };
        }
        return ColoringOutcome::Exhausted { nodes: 0 };
    }
    let adj: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| j != i && g.is_adjacent(vertices[i], vertices[j])).collect()).collect();
    let mut s = Search {
        adj: &adj,
        n,
        k,
        color: vec![NONE; n],
        domain: vec![low_mask(k); n],
        nodes: 0,
        budget: node_budget,
        hasher: Sha256::new(),
    };
    s.hasher.update((n as u64).to_le_bytes());
    s.hasher.update((k as u64).to_le_bytes());
    match s.run(0, None) {
        Step::Found => {
            let mut classes = vec![Vec::new(); k];
            for (i, &c) in s.color.iter().enumerate() {
                classes[c as usize].push(vertices[i]);
            }
            ColoringOutcome::Colorable { classes }
        }
        Step::Dead => ColoringOutcome::Refuted { nodes: s.nodes, trace_digest: hex(&s.hasher.finalize()) },
        Step::OutOfBudget => ColoringOutcome::Exhausted { nodes: s.nodes },
    }
}

/// First-fit colouring in the given order.
pub(crate) fn greedy_classes(g: &Graph, vertices: &[usize]) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in vertices {
        match classes.iter_mut().find(|c| c.iter().all(|&u| !g.is_adjacent(u, v))) {
            Some(c) => c.push(v),
            None => classes.push(vec![v]),
        }
    }
    classes
}

/// Chromatic number of the subgraph induced on `vertices` with an optimal
/// colouring; the budget is shared across all tried `k`.
pub fn chromatic_number(g: &Graph, vertices: &[usize], node_budget: u64) -> Result<(usize, Vec<Vec<usize>>)> {
    if vertices.is_empty() {
        return Ok((0, Vec::new()));
    }
    let upper = greedy_classes(g, vertices);
    let mut spent = 0u64;
    for k in 1..upper.len() {
        match find_coloring(g, vertices, k, node_budget.saturating_sub(spent)) {
            ColoringOutcome::Colorable { classes } => {
                return Ok((k, classes.into_iter().filter(|c| !c.is_empty()).collect()))
            }
            ColoringOutcome::Refuted { nodes, .. } => spent += nodes,
            ColoringOutcome::Exhausted { .. } => {
                return Err(Error::BudgetExhausted(format!("chromatic number search at k = {k}")))
            }
        }
    }
    Ok((upper.len(), upper))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(g: &Graph) -> Vec<usize> {
        (0..g.vertex_count()).collect()
    }

    /// Plain enumeration of all k^n assignments.
    fn brute_colorable(g: &Graph, k: usize) -> bool {
        let n = g.vertex_count();
        let total = (k as u64).pow(n as u32);
        (0..total).any(|mut code| {
            let mut col = vec![0; n];
            for c in col.iter_mut() {
                *c = (code % k as u64) as usize;
                code /= k as u64;
            }
            g.edges().iter().all(|&(u, v)| col[u] != col[v])
        })
    }

    #[test]
    fn five_cycle_is_not_two_colorable() {
        let g = Graph::cycle(5);
        assert!(!brute_colorable(&g, 2));
        assert!(matches!(find_coloring(&g, &all(&g), 2, 1_000), ColoringOutcome::Refuted { .. }));
        match find_coloring(&g, &all(&g), 3, 1_000) {
            ColoringOutcome::Colorable { classes } => {
                for c in &classes {
                    assert!(g.is_independent(c));
                }
                assert_eq!(classes.iter().map(Vec::len).sum::<usize>(), 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn search_agrees_with_brute_force_on_small_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.gen_range(1..=7);
            let g = Graph::from_fn(n, super::super::Provenance::Explicit, |_, _| rng.gen_bool(0.5)).unwrap();
            for k in 1..=4 {
                let fast = matches!(find_coloring(&g, &all(&g), k, 1_000_000), ColoringOutcome::Colorable { .. });
                assert_eq!(fast, brute_colorable(&g, k), "n={n} k={k} edges={:?}", g.edges());
            }
        }
    }

    #[test]
    fn refutation_digest_is_deterministic() {
        let g = Graph::complete(5);
        let a = find_coloring(&g, &all(&g), 4, 10_000);
        let b = find_coloring(&g, &all(&g), 4, 10_000);
        assert_eq!(a, b);
        assert!(matches!(a, ColoringOutcome::Refuted { .. }));
        assert_eq!(chromatic_number(&g, &all(&g), 10_000).unwrap().0, 5);
    }

    #[test]
    fn budget_exhaustion_is_not_a_refutation() {
        let g = Graph::complete(6);
        assert!(matches!(find_coloring(&g, &all(&g), 5, 3), ColoringOutcome::Exhausted { .. }));
    }
}
