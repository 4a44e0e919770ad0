//! Independent-set searches: maximum (cardinality and weight), all maximal,
//! and full enumeration for small graphs.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::graph::Graph;
use crate::error::{Error, Result};

/// Maximum independent set of the subgraph induced on `vertices`, found as a
/// maximum clique of the complement with greedy-colouring bounds.
pub fn max_independent_set(g: &Graph, vertices: &[usize], node_budget: u64) -> Result<Vec<usize>> {
    let n = g.vertex_count();
    let mut allowed = FixedBitSet::with_capacity(n);
    for &v in vertices {
        allowed.insert(v);
    }
    // Complement adjacency restricted to `allowed`.
    let comp: Vec<FixedBitSet> = (0..n)
        .map(|v| {
            let mut s = allowed.clone();
            s.difference_with(g.neighbors(v));
            s.set(v, false);
            s
        })
        .collect();
    let mut search = CliqueSearch { g, comp: &comp, best: Vec::new(), nodes: 0, budget: node_budget };
    let mut r = Vec::new();
    if search.expand(&mut r, allowed) {
        let mut best = search.best;
        best.sort_unstable();
        Ok(best)
    } else {
        Err(Error::BudgetExhausted("maximum independent set search".into()))
    }
}

struct CliqueSearch<'a> {
    g: &'a Graph,
    comp: &'a [FixedBitSet],
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl CliqueSearch<'_> {
    /// Greedy-colours `p` in the complement; each colour class is a clique of
    /// `g`, so at most one of its vertices joins an independent set.
    fn colour_sort(&self, p: &FixedBitSet) -> (Vec<usize>, Vec<usize>) {
        let mut remaining = p.clone();
        let mut order = Vec::new();
        let mut bounds = Vec::new();
        let mut colour = 0;
        while !remaining.is_clear() {
            colour += 1;
            let mut q = remaining.clone();
            while let Some(v) = q.ones().next() {
                order.push(v);
                bounds.push(colour);
                remaining.set(v, false);
                q.set(v, false);
                q.intersect_with(self.g.neighbors(v));
            }
        }
        (order, bounds)
    }

    /// Returns false when the budget ran out.
    fn expand(&mut self, r: &mut Vec<usize>, mut p: FixedBitSet) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        if p.is_clear() {
            if r.len() > self.best.len() {
                self.best = r.clone();
            }
            return true;
        }
        let (order, bounds) = self.colour_sort(&p);
        for i in (0..order.len()).rev() {
            if r.len() + bounds[i] <= self.best.len() {
                return true;
            }
            let v = order[i];
            r.push(v);
            let mut np = p.clone();
            np.intersect_with(&self.comp[v]);
            if !self.expand(r, np) {
                return false;
            }
            r.pop();
            p.set(v, false);
        }
        true
    }
}

/// Maximum-weight independent set for nonnegative rational weights.
/// Returns the set (sorted) and its weight.
pub fn max_weight_independent_set(g: &Graph, weights: &[BigRational]) -> (Vec<usize>, BigRational) {
    let n = g.vertex_count();
    assert_eq!(weights.len(), n);
    // Scale to integers over a common denominator.
    let denom = weights.iter().fold(BigInt::from(1), |acc, w| num_integer::Integer::lcm(&acc, w.denom()));
    let iw: Vec<BigInt> = weights
        .iter()
        .map(|w| {
            let v = w.numer() * (&denom / w.denom());
            if v.is_negative() {
                BigInt::zero()
            } else {
                v
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).filter(|&v| iw[v].is_positive()).collect();
    order.sort_by(|&a, &b| iw[b].cmp(&iw[a]).then(a.cmp(&b)));
    let mut st = WeightSearch { g, w: &iw, best: Vec::new(), best_w: BigInt::zero() };
    let mut cand = FixedBitSet::with_capacity(n);
    for &v in &order {
        cand.insert(v);
    }
    st.branch(&mut Vec::new(), &BigInt::zero(), cand, &order);
    let mut best = st.best;
    best.sort_unstable();
    let total = BigRational::new(st.best_w, denom);
    (best, total)
}

struct WeightSearch<'a> {
    g: &'a Graph,
    w: &'a [BigInt],
    best: Vec<usize>,
    best_w: BigInt,
}

impl WeightSearch<'_> {
    /// Sum over a greedy clique partition of the per-clique maximum weight.
    fn bound(&self, cand: &FixedBitSet, order: &[usize]) -> BigInt {
        let mut left = cand.clone();
        let mut total = BigInt::zero();
        for &v in order {
            if !left.contains(v) {
                continue;
            }
            // v has the largest weight among the remaining (order is by weight).
            total += &self.w[v];
            left.set(v, false);
            let mut clique = vec![v];
            for &u in order {
                if left.contains(u) && clique.iter().all(|&c| self.g.is_adjacent(c, u)) {
                    clique.push(u);
                    left.set(u, false);
                }
            }
        }
        total
    }

    fn branch(&mut self, cur: &mut Vec<usize>, cur_w: &BigInt, cand: FixedBitSet, order: &[usize]) {
        if cand.is_clear() {
            if cur_w > &self.best_w || (self.best.is_empty() && cur_w.is_positive()) {
                self.best = cur.clone();
                self.best_w = cur_w.clone();
            }
            return;
        }
        if cur_w + self.bound(&cand, order) <= self.best_w {
            return;
        }
        let v = order.iter().copied().find(|&v| cand.contains(v)).expect("nonempty");
        // Include v.
        let mut with = cand.clone();
        with.set(v, false);
        with.difference_with(self.g.neighbors(v));
        cur.push(v);
        let w2 = cur_w + &self.w[v];
        self.branch(cur, &w2, with, order);
        cur.pop();
        // Exclude v.
        let mut without = cand;
        without.set(v, false);
        self.branch(cur, cur_w, without, order);
    }
}

/// All maximal independent sets (Bron–Kerbosch with pivoting on the
/// complement), each sorted, in lexicographic order.
pub fn maximal_independent_sets(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let comp: Vec<FixedBitSet> = (0..n)
        .map(|v| {
            let mut s = g.full_set();
            s.difference_with(g.neighbors(v));
            s.set(v, false);
            s
        })
        .collect();
    let mut out = Vec::new();
    bron_kerbosch(&comp, &mut Vec::new(), g.full_set(), FixedBitSet::with_capacity(n), &mut out);
    for s in out.iter_mut() {
        s.sort_unstable();
    }
    out.sort();
    out
}

fn bron_kerbosch(
    comp: &[FixedBitSet],
    r: &mut Vec<usize>,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_clear() && x.is_clear() {
        out.push(r.clone());
        return;
    }
    let pivot = p
        .ones()
        .chain(x.ones())
        .max_by_key(|&u| (comp[u].intersection(&p).count(), std::cmp::Reverse(u)))
        .expect("p or x nonempty");
    let mut cands = p.clone();
    cands.difference_with(&comp[pivot]);
    for v in cands.ones().collect::<Vec<_>>() {
        r.push(v);
        let mut np = p.clone();
        np.intersect_with(&comp[v]);
        let mut nx = x.clone();
        nx.intersect_with(&comp[v]);
        bron_kerbosch(comp, r, np, nx, out);
        r.pop();
        p.set(v, false);
        x.insert(v);
    }
}

/// Every nonempty independent set, each sorted, ordered by size then
/// lexicographically. Exponential; meant for small graphs and oracles.
pub fn all_independent_sets(g: &Graph) -> Vec<Vec<usize>> {
    fn rec(g: &Graph, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for v in start..g.vertex_count() {
            if cur.iter().all(|&u| !g.is_adjacent(u, v)) {
                cur.push(v);
                out.push(cur.clone());
                rec(g, v + 1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(g, 0, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}
