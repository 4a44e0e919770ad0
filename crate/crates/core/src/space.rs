//! Finite truncations of `Ω = ∏ G_n`.
//!
//! A point prefix of length `d` stands for the cylinder of all its infinite
//! extensions; distances between equal prefixes are reported as 0, meaning
//! "below resolution".

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::pow2;
use crate::graphs::{all_independent_sets, Graph};
use crate::schedule::Schedule;

/// `{rank, prefix, H}`: fixes `prefix` (length `rank`), takes coordinate
/// `rank` in the independent set `H`, leaves the rest free.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StandardSet {
    pub rank: usize,
    pub prefix: Vec<usize>,
    #[serde(rename = "H")]
    pub h: Vec<usize>,
}

impl StandardSet {
    /// `2^{-rank}`, the nominal diameter bound.
    pub fn nominal_diameter(&self) -> BigRational {
        pow2(-(self.rank as i64))
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        x.len() > self.rank && x[..self.rank] == self.prefix[..] && self.h.contains(&x[self.rank])
    }
}

/// Result of [`Space::standard_hull`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hull {
    Standard(StandardSet),
    /// The set has diameter 2 (adjacent at coordinate 0); no standard set
    /// contains it, so the whole space is returned and flagged.
    WholeSpace {
        flagged: bool,
    },
}

/// Distance as a power of two, `None` for 0.
type DyadicDist = Option<i64>;

/// The first `depth` level graphs of a schedule.
#[derive(Clone, Debug)]
pub struct Space {
    graphs: Vec<Graph>,
    toy: bool,
}

impl Space {
    pub fn new(schedule: &Schedule, depth: usize) -> Result<Space> {
        if depth > schedule.materialized_depth() {
            return Err(Error::Materialization(format!(
                "depth {depth} needs materialized levels; only {} available",
                schedule.materialized_depth()
            )));
        }
        let graphs = (0..depth).map(|n| schedule.graph(n).expect("materialized").clone()).collect();
        Ok(Space { graphs, toy: schedule.is_toy() })
    }

    pub fn from_graphs(graphs: Vec<Graph>) -> Space {
        Space { graphs, toy: true }
    }

    pub fn depth(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_toy(&self) -> bool {
        self.toy
    }

    pub fn graph(&self, n: usize) -> &Graph {
        &self.graphs[n]
    }

    pub fn level_size(&self, n: usize) -> usize {
        self.graphs[n].vertex_count()
    }

    pub fn check_prefix(&self, x: &[usize]) -> Result<()> {
        if x.len() > self.depth() {
            return invalid(format!("prefix of length {} exceeds depth {}", x.len(), self.depth()));
        }
        for (n, &v) in x.iter().enumerate() {
            if v >= self.level_size(n) {
                return invalid(format!("coordinate {n} is {v}, level has {} vertices", self.level_size(n)));
            }
        }
        Ok(())
    }

    fn rho_dyadic(&self, x: &[usize], y: &[usize]) -> DyadicDist {
        let n = x.iter().zip(y).position(|(a, b)| a != b)?;
        let n = n as i64;
        Some(if self.graphs[n as usize].is_adjacent(x[n as usize], y[n as usize]) { 1 - n } else { -n })
    }

    /// `ρ(x, y)`: `2^{-n+1}` if the first differing coordinates `n` are
    /// adjacent in `G_n`, else `2^{-n}`.
    pub fn rho(&self, x: &[usize], y: &[usize]) -> Result<BigRational> {
        if x.len() != y.len() {
            return invalid("points must have equal length");
        }
        self.check_prefix(x)?;
        self.check_prefix(y)?;
        Ok(self.rho_dyadic(x, y).map_or_else(BigRational::zero, pow2))
    }

    /// Maximum pairwise `ρ`; 0 for fewer than two points.
    pub fn set_diameter(&self, points: &[Vec<usize>]) -> Result<BigRational> {
        let mut best = BigRational::zero();
        for (i, x) in points.iter().enumerate() {
            for y in &points[i + 1..] {
                let d = self.rho(x, y)?;
                if d > best {
                    best = d;
                }
            }
        }
        Ok(best)
    }

    /// Diameter of the cylinder over `prefix` (all infinite extensions).
    pub fn cylinder_diameter(&self, prefix: &[usize]) -> Result<BigRational> {
        self.check_prefix(prefix)?;
        let mut m = prefix.len();
        loop {
            if m >= self.depth() {
                return Err(Error::Materialization(format!("cylinder diameter needs level {m}")));
            }
            let g = &self.graphs[m];
            if g.has_edge() {
                return Ok(pow2(1 - m as i64));
            }
            if g.vertex_count() > 1 {
                return Ok(pow2(-(m as i64)));
            }
            m += 1;
        }
    }

    /// Exact diameter of the denoted set.
    pub fn standard_set_diameter(&self, s: &StandardSet) -> Result<BigRational> {
        self.check_standard_set(s)?;
        if s.h.len() >= 2 {
            return Ok(s.nominal_diameter());
        }
        let mut prefix = s.prefix.clone();
        prefix.push(s.h[0]);
        self.cylinder_diameter(&prefix)
    }

    pub fn check_standard_set(&self, s: &StandardSet) -> Result<()> {
        if s.prefix.len() != s.rank || s.rank >= self.depth() {
            return invalid(format!("rank {} with prefix length {} at depth {}", s.rank, s.prefix.len(), self.depth()));
        }
        self.check_prefix(&s.prefix)?;
        if s.h.is_empty() || s.h.iter().any(|&a| a >= self.level_size(s.rank)) {
            return invalid("H must be a nonempty set of level vertices");
        }
        if let Some((u, v)) = self.graphs[s.rank].conflict_in(&s.h) {
            return invalid(format!("H contains adjacent vertices {u} and {v}"));
        }
        Ok(())
    }

    /// A standard set containing `points` with the same diameter.
    pub fn standard_hull(&self, points: &[Vec<usize>]) -> Result<Hull> {
        if points.len() < 2 {
            return invalid("a hull needs at least two points");
        }
        let len = points[0].len();
        for p in points {
            if p.len() != len {
                return invalid("points must have equal length");
            }
            self.check_prefix(p)?;
        }
        let Some(j) = (0..len).find(|&i| points.iter().any(|p| p[i] != points[0][i])) else {
            return invalid("points must be distinct");
        };
        let mut values: Vec<usize> = points.iter().map(|p| p[j]).collect();
        values.sort_unstable();
        values.dedup();
        if self.graphs[j].is_independent(&values) {
            return Ok(Hull::Standard(StandardSet { rank: j, prefix: points[0][..j].to_vec(), h: values }));
        }
        if j == 0 {
            return Ok(Hull::WholeSpace { flagged: true });
        }
        Ok(Hull::Standard(StandardSet { rank: j - 1, prefix: points[0][..j - 1].to_vec(), h: vec![points[0][j - 1]] }))
    }

    /// All prefixes of length `len` in lexicographic order.
    pub fn points(&self, len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for n in 0..len {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..self.level_size(n)).map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Standard sets with rank in `ranks`, prefix extending `filter`, in
    /// lexicographic order of (rank, prefix, H by size then lex).
    pub fn enumerate_standard_sets(
        &self,
        ranks: std::ops::Range<usize>,
        filter: &[usize],
        budget: usize,
    ) -> Result<Vec<StandardSet>> {
        let mut out = Vec::new();
        for rank in ranks {
            if rank >= self.depth() {
                return Err(Error::Materialization(format!("rank {rank} beyond depth {}", self.depth())));
            }
            let hs = all_independent_sets(&self.graphs[rank]);
            for prefix in self.points(rank) {
                let n = filter.len().min(rank);
                if prefix[..n] != filter[..n] || (filter.len() > rank && filter[rank..].len() > 1) {
                    continue;
                }
                for h in &hs {
                    if filter.len() == rank + 1 && !h.contains(&filter[rank]) {
                        continue;
                    }
                    out.push(StandardSet { rank, prefix: prefix.clone(), h: h.clone() });
                    if out.len() > budget {
                        return Err(Error::BudgetExhausted(format!("more than {budget} standard sets")));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Symmetry, identity and triangle inequality over all triples of
    /// length-`len` prefixes, or `samples` random triples when the exhaustive
    /// count exceeds `budget`.
    pub fn verify_metric_axioms(&self, len: usize, budget: u64, samples: u64, seed: u64) -> Result<MetricReport> {
        if len > self.depth() {
            return Err(Error::Materialization(format!("length {len} beyond depth {}", self.depth())));
        }
        let pts = self.points(len);
        let n = pts.len() as u64;
        let mut report = MetricReport { points: n, sampled: false, ..Default::default() };
        for x in &pts {
            for y in &pts {
                let (a, b) = (self.rho_dyadic(x, y), self.rho_dyadic(y, x));
                report.pairs_checked += 1;
                if a != b {
                    report.symmetry_violations += 1;
                }
                if (x == y) != a.is_none() {
                    report.identity_violations += 1;
                }
            }
        }
        let mut check = |x: &Vec<usize>, y: &Vec<usize>, z: &Vec<usize>| {
            report.triples_checked += 1;
            if !triangle_holds(self.rho_dyadic(x, z), self.rho_dyadic(x, y), self.rho_dyadic(y, z)) {
                report.triangle_violations += 1;
                report.first_triangle_violation.get_or_insert_with(|| [x.clone(), y.clone(), z.clone()]);
            }
        };
        if n.saturating_pow(3) <= budget {
            for x in &pts {
                for y in &pts {
                    for z in &pts {
                        check(x, y, z);
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let pick = |r: &mut ChaCha8Rng| &pts[r.gen_range(0..pts.len())];
                let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
                check(x, y, z);
            }
            report.sampled = true;
        }
        report.holds =
            report.symmetry_violations == 0 && report.identity_violations == 0 && report.triangle_violations == 0;
        Ok(report)
    }

    /// Every set of `sizes` distinct length-`len` prefixes: the standard hull
    /// must have exactly the set's diameter, and diameter-2 sets must come
    /// back flagged.
    pub fn hull_check(&self, len: usize, sizes: &[usize], budget: u64) -> Result<HullReport> {
        if len >= self.depth() {
            return Err(Error::Materialization(format!("hull diameters at length {len} need depth {}", len + 1)));
        }
        let pts = self.points(len);
        let mut report = HullReport { len, sizes: sizes.to_vec(), ..Default::default() };
        for &k in sizes {
            if k < 2 {
                return invalid("hull sets have at least two points");
            }
            let mut idx: Vec<usize> = (0..k).collect();
            if k > pts.len() {
                continue;
            }
            loop {
                report.sets_checked += 1;
                if report.sets_checked > budget {
                    return Err(Error::BudgetExhausted(format!("more than {budget} hull sets")));
                }
                let set: Vec<Vec<usize>> = idx.iter().map(|&i| pts[i].clone()).collect();
                let diam = self.set_diameter(&set)?;
                let ok = match self.standard_hull(&set)? {
                    Hull::Standard(h) => {
                        let ok = set.iter().all(|p| h.contains(p)) && self.standard_set_diameter(&h)? == diam;
                        report.equal += ok as u64;
                        ok
                    }
                    Hull::WholeSpace { flagged } => {
                        let ok = flagged && diam == pow2(1);
                        report.whole_space_flagged += ok as u64;
                        ok
                    }
                };
                if !ok {
                    report.mismatches += 1;
                    report.first_mismatch.get_or_insert(set);
                }
                let Some(i) = (0..k).rev().find(|&i| idx[i] < pts.len() - k + i) else { break };
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        report.holds = report.mismatches == 0;
        Ok(report)
    }

    /// A triple with `ρ(x,z) > max(ρ(x,y), ρ(y,z))`, if one exists among
    /// length-`len` prefixes.
    pub fn find_ultrametric_violation(&self, len: usize) -> Option<[Vec<usize>; 3]> {
        let pts = self.points(len.min(self.depth()));
        for x in &pts {
            for y in &pts {
                for z in &pts {
                    let (xz, xy, yz) = (self.rho_dyadic(x, z), self.rho_dyadic(x, y), self.rho_dyadic(y, z));
                    if xz > xy.max(yz) {
                        return Some([x.clone(), y.clone(), z.clone()]);
                    }
                }
            }
        }
        None
    }
}

/// `2^a ≤ 2^b + 2^c` with `None` as 0.
fn triangle_holds(a: DyadicDist, b: DyadicDist, c: DyadicDist) -> bool {
    match (a, b, c) {
        (None, _, _) => true,
        (Some(_), None, None) => false,
        (Some(a), Some(b), None) | (Some(a), None, Some(b)) => a <= b,
        (Some(a), Some(b), Some(c)) => a <= b.max(c) || (b == c && a <= b + 1),
    }
}

/// Outcome of [`Space::hull_check`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HullReport {
    pub len: usize,
    pub sizes: Vec<usize>,
    pub sets_checked: u64,
    pub equal: u64,
    /// Diameter-2 sets: no standard set contains them.
    pub whole_space_flagged: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<Vec<Vec<usize>>>,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MetricReport {
    pub points: u64,
    pub pairs_checked: u64,
    pub triples_checked: u64,
    pub symmetry_violations: u64,
    pub identity_violations: u64,
    pub triangle_violations: u64,
    pub first_triangle_violation: Option<[Vec<usize>; 3]>,
    pub sampled: bool,
    pub holds: bool,
}
