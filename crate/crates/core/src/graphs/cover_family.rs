use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cap::CapEmbedding;
use super::graph::{Graph, Provenance};
use super::kneser::kneser_sets;
use crate::error::{invalid, Error, Result};
use crate::Verdict;

/// One independent set `H(x)` per vertex `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverFamily {
    pub sets: Vec<Vec<usize>>,
}

impl CoverFamily {
    /// `coverage[a] = |{x : a ∈ H(x)}|`.
    pub fn coverage(&self, n: usize) -> Vec<usize> {
        let mut cov = vec![0; n];
        for set in &self.sets {
            for &a in set {
                if a < n {
                    cov[a] += 1;
                }
            }
        }
        cov
    }

    pub fn contains(&self, x: usize, a: usize) -> bool {
        self.sets[x].contains(&a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum CoverViolation {
    WrongLength { expected: usize, found: usize },
    OutOfRange { vertex: usize, member: usize },
    MissingSelf { vertex: usize },
    NotIndependent { vertex: usize, u: usize, v: usize },
    LowCoverage { vertex: usize, coverage: usize, vertex_count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverCheck {
    pub verdict: Verdict,
    pub min_coverage: usize,
    pub violation: Option<CoverViolation>,
}

/// Checks membership, independence and `4·coverage(a) >= |V|` in that order,
/// reporting the first violated clause.
pub fn check_cover_family(g: &Graph, fam: &CoverFamily) -> CoverCheck {
    let n = g.vertex_count();
    let fail =
        |v: CoverViolation, min_coverage| CoverCheck { verdict: Verdict::Fail, min_coverage, violation: Some(v) };
    if fam.sets.len() != n {
        return fail(CoverViolation::WrongLength { expected: n, found: fam.sets.len() }, 0);
    }
    for (x, set) in fam.sets.iter().enumerate() {
        if let Some(&m) = set.iter().find(|&&m| m >= n) {
            return fail(CoverViolation::OutOfRange { vertex: x, member: m }, 0);
        }
    }
    let coverage = fam.coverage(n);
    let min_coverage = coverage.iter().copied().min().unwrap_or(0);
    for (x, set) in fam.sets.iter().enumerate() {
        if !set.contains(&x) {
            return fail(CoverViolation::MissingSelf { vertex: x }, min_coverage);
        }
    }
    for (x, set) in fam.sets.iter().enumerate() {
        if let Some((u, v)) = g.conflict_in(set) {
            return fail(CoverViolation::NotIndependent { vertex: x, u, v }, min_coverage);
        }
    }
    for (a, &c) in coverage.iter().enumerate() {
        if 4 * c < n {
            return fail(CoverViolation::LowCoverage { vertex: a, coverage: c, vertex_count: n }, min_coverage);
        }
    }
    CoverCheck { verdict: Verdict::Pass, min_coverage, violation: None }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverStrategy {
    /// `H(x) = C(x) ∩ G`; needs the cap embedding.
    Caps,
    /// Kneser only: `H(x)` is the star of a representative element of `x`,
    /// representatives chosen to balance element loads.
    StarBalanced,
    /// Random maximal independent set through each vertex, re-verified.
    Randomized,
}

/// Representatives for the star family of `K(m,k)`: every vertex picks one of
/// its elements so that element loads differ by at most one, the first
/// `|V| mod m` elements taking the larger load. Vertices are placed in
/// lexicographic order by augmenting paths, so the result is deterministic.
pub fn balanced_representatives(m: usize, k: usize) -> (Vec<usize>, Vec<usize>) {
    let sets = kneser_sets(m, k);
    let n = sets.len();
    let cap: Vec<usize> = (0..m).map(|e| n / m + usize::from(e < n % m)).collect();
    let mut rep = vec![usize::MAX; n];
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); m];
    for x in 0..n {
        let mut seen = vec![false; m];
        let placed = augment(x, &sets, &cap, &mut rep, &mut holders, &mut seen);
        assert!(placed, "balanced star assignment exists for every Kneser graph");
    }
    let load = holders.iter().map(Vec::len).collect();
    (rep, load)
}

fn augment(
    x: usize,
    sets: &[Vec<usize>],
    cap: &[usize],
    rep: &mut [usize],
    holders: &mut [Vec<usize>],
    seen: &mut [bool],
) -> bool {
    for &e in &sets[x] {
        if seen[e] {
            continue;
        }
        seen[e] = true;
        if holders[e].len() < cap[e] {
            holders[e].push(x);
            rep[x] = e;
            return true;
        }
        for i in 0..holders[e].len() {
            let y = holders[e][i];
            if augment(y, sets, cap, rep, holders, seen) {
                holders[e][i] = x;
                rep[x] = e;
                return true;
            }
        }
    }
    false
}

pub fn build_cover_family(
    g: &Graph,
    strategy: CoverStrategy,
    seed: u64,
    attempts: usize,
    embedding: Option<&CapEmbedding>,
) -> Result<CoverFamily> {
    let n = g.vertex_count();
    if !g.has_edge() {
        // Every vertex set is independent; the whole vertex set covers all.
        let all: Vec<usize> = (0..n).collect();
        return Ok(CoverFamily { sets: vec![all; n] });
    }
    let fam = match strategy {
        CoverStrategy::Caps => {
            let Some(emb) = embedding else {
                return invalid("the caps strategy needs a cap embedding");
            };
            if emb.points.len() != n {
                return invalid("embedding does not match the graph");
            }
            emb.cap_family()?
        }
        CoverStrategy::StarBalanced => {
            let Provenance::Kneser { m, k } = *g.provenance() else {
                return invalid("the star_balanced strategy needs Kneser provenance");
            };
            let sets = kneser_sets(m, k);
            let (reps, _) = balanced_representatives(m, k);
            let fam = (0..n).map(|x| (0..n).filter(|&v| sets[v].contains(&reps[x])).collect()).collect();
            CoverFamily { sets: fam }
        }
        CoverStrategy::Randomized => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = 0;
            for _ in 0..attempts.max(1) {
                let fam = random_family(g, &mut rng);
                let check = check_cover_family(g, &fam);
                if check.verdict.is_pass() {
                    return Ok(fam);
                }
                best = best.max(check.min_coverage);
            }
            return Err(Error::BudgetExhausted(format!(
                "randomized cover family: best min coverage {best}, need {} of {n}",
                n.div_ceil(4)
            )));
        }
    };
    let check = check_cover_family(g, &fam);
    if check.verdict.is_pass() {
        Ok(fam)
    } else {
        Err(Error::Verification(format!("{strategy:?} family failed: {:?}", check.violation)))
    }
}

fn random_family(g: &Graph, rng: &mut ChaCha8Rng) -> CoverFamily {
    let n = g.vertex_count();
    let sets = (0..n)
        .map(|x| {
            let mut others: Vec<usize> = (0..n).filter(|&v| v != x).collect();
            others.shuffle(rng);
            let mut set = vec![x];
            for v in others {
                if set.iter().all(|&u| !g.is_adjacent(u, v)) {
                    set.push(v);
                }
            }
            set.sort_unstable();
            set
        })
        .collect();
    CoverFamily { sets }
}
