//! Null witnesses: explicit covers with a weight budget.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::TargetSet;
use crate::error::{invalid, Error, Result};
use crate::exact::{pq, pq_opt, pq_vec};
use crate::graphs::chromatic_number;
use crate::schedule::{Mode, Monomial, Schedule};
use crate::space::{Space, StandardSet};
use crate::Verdict;

pub const WITNESS_VERSION: u32 = 1;
const COLOR_BUDGET: u64 = 20_000_000;
const REFINE_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    Plain,
    /// Pieces generated per index `n`; covers `{y : ∃n ∈ groups, y(n) ∈ H}`.
    Tail,
}

/// How the pieces of one group are generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKind {
    /// `(p, H)` at rank `index` for every prefix `p` of length `index`.
    Section {
        /// `None` on symbolic levels, where only the weight is recorded.
        #[serde(rename = "H")]
        h: Option<Vec<usize>>,
    },
    /// The standard hull (rank `end − 1`, singleton `H`) of every cylinder
    /// `p⌢s` with `p` of length `start` and `s` among `entries`, which fix
    /// coordinates `start..end`.
    Hulls { start: usize, end: usize, entries: Vec<Vec<u64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessGroup {
    pub index: usize,
    #[serde(flatten)]
    pub kind: GroupKind,
    #[serde(with = "pq")]
    pub weight: BigRational,
}

impl WitnessGroup {
    /// The exact group weight implied by the generator.
    pub fn expected_weight(&self, s: &Schedule) -> Result<BigRational> {
        match &self.kind {
            GroupKind::Section { .. } => group_weight(s, self.index),
            GroupKind::Hulls { start, end, entries } => {
                if end <= start {
                    return invalid("hull groups need start < end");
                }
                hull_weight(s, *start, *end, entries.len() as u64)
            }
        }
    }
}

/// `count · N_0···N_{start−1} · h(2^{-(end−1)})`.
pub fn hull_weight(s: &Schedule, start: usize, end: usize, count: u64) -> Result<BigRational> {
    if count == 0 {
        return Ok(BigRational::zero());
    }
    let mono = Monomial::constant(crate::exact::int(count as i64))
        .mul(&Monomial::size_product(0, start))
        .mul(&Schedule::gauge_grid_monomial(end - 1));
    s.eval(&mono)?.exact.ok_or_else(|| Error::Horizon(format!("hull weight over [{start}, {end}) is not exact")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullWitness {
    #[serde(with = "pq")]
    pub epsilon: BigRational,
    pub semantics: Semantics,
    #[serde(default)]
    pub pieces: Vec<StandardSet>,
    #[serde(default, with = "pq_vec")]
    pub weights: Vec<BigRational>,
    #[serde(default)]
    pub groups: Vec<WitnessGroup>,
    /// Bound for the groups past the last recorded index (faithful mode).
    #[serde(default, with = "pq_opt", skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<BigRational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    pub version: u32,
    pub schedule_ref: String,
    #[serde(flatten)]
    pub witness: NullWitness,
}

impl WitnessFile {
    pub fn new(schedule_ref: impl Into<String>, witness: NullWitness) -> Self {
        WitnessFile { version: WITNESS_VERSION, schedule_ref: schedule_ref.into(), witness }
    }
}

impl NullWitness {
    /// A plain witness whose weights are the gauge of each piece's nominal diameter.
    pub fn plain(s: &Schedule, pieces: Vec<StandardSet>, epsilon: BigRational) -> Result<NullWitness> {
        let weights = pieces.iter().map(|p| s.gauge_at_level(p.rank)).collect::<Result<_>>()?;
        Ok(NullWitness { epsilon, semantics: Semantics::Plain, pieces, weights, groups: Vec::new(), tail_bound: None })
    }

    pub fn total(&self) -> BigRational {
        let mut t: BigRational = self.weights.iter().sum();
        t += self.groups.iter().map(|g| &g.weight).sum::<BigRational>();
        if let Some(b) = &self.tail_bound {
            t += b;
        }
        t
    }
}

/// `N_0···N_{n−1}·h(2^{-n})`, which is `2^{-n}/M_0` whenever `M_{k+1} = 2N_k`.
pub(super) fn group_weight(s: &Schedule, n: usize) -> Result<BigRational> {
    let mono = Monomial::size_product(0, n).mul(&Schedule::gauge_grid_monomial(n));
    s.eval(&mono)?.exact.ok_or_else(|| Error::Horizon(format!("group weight at index {n} is not exact")))
}

/// `Σ_{n ≥ from} 2^{-n}/M_0 = 2^{-from+1}/M_0`.
pub(super) fn geometric_tail(s: &Schedule, from: usize) -> Result<BigRational> {
    let m0 = s.gauge_at_level(0)?;
    Ok(crate::exact::pow2(1 - from as i64) * m0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessCheck {
    pub verdict: Verdict,
    #[serde(with = "pq")]
    pub total: BigRational,
    #[serde(with = "pq")]
    pub epsilon: BigRational,
    pub weights_ok: bool,
    pub first_bad_weight: Option<usize>,
    pub uncovered: Option<Vec<usize>>,
    pub note: Option<String>,
}

struct Coverage<'a> {
    s: &'a Schedule,
    pieces: &'a [StandardSet],
}

impl Coverage<'_> {
    fn covered(&self, p: &mut Vec<usize>) -> Result<Option<Vec<usize>>> {
        let len = p.len();
        if self.pieces.iter().any(|q| q.rank < len && q.contains(p)) {
            return Ok(None);
        }
        let deeper = self.pieces.iter().any(|q| q.rank >= len && q.prefix[..len] == p[..]);
        if !deeper {
            return Ok(Some(p.clone()));
        }
        let size = self
            .s
            .graph(len)
            .ok_or_else(|| Error::Materialization(format!("coverage check needs level {len}")))?
            .vertex_count();
        for a in 0..size {
            p.push(a);
            let r = self.covered(p)?;
            p.pop();
            if r.is_some() {
                return Ok(r);
            }
        }
        Ok(None)
    }
}

/// Verifies weights exactly, `Σ weights ≤ ε`, and for plain witnesses that
/// every cylinder of `target` is covered.
pub fn null_witness_check(s: &Schedule, w: &NullWitness, target: Option<&TargetSet>) -> Result<WitnessCheck> {
    let mut check = WitnessCheck {
        verdict: Verdict::Pass,
        total: w.total(),
        epsilon: w.epsilon.clone(),
        weights_ok: true,
        first_bad_weight: None,
        uncovered: None,
        note: None,
    };
    if w.weights.len() != w.pieces.len() {
        return invalid("one weight per piece is required");
    }
    let max_rank = w.pieces.iter().map(|p| p.rank + 1).max().unwrap_or(0);
    if max_rank > s.materialized_depth() {
        return Err(Error::Materialization(format!("pieces reach level {}", max_rank - 1)));
    }
    let space = Space::new(s, max_rank)?;
    for (i, (p, wt)) in w.pieces.iter().zip(&w.weights).enumerate() {
        space.check_standard_set(p)?;
        if *wt != s.gauge_at_level(p.rank)? {
            check.weights_ok = false;
            check.first_bad_weight.get_or_insert(i);
        }
    }
    if w.semantics == Semantics::Tail {
        for (i, g) in w.groups.iter().enumerate() {
            if i > 0 && g.index != w.groups[i - 1].index + 1 {
                check.weights_ok = false;
                check.note = Some(format!("group indices skip before {}", g.index));
            }
            if g.weight != g.expected_weight(s)? {
                check.weights_ok = false;
                check.note = Some(format!("group {} weight differs from its generator", g.index));
            }
        }
        if let Some(b) = &w.tail_bound {
            if w.groups.iter().any(|g| !matches!(g.kind, GroupKind::Section { .. })) {
                return invalid("a geometric tail bound applies to section groups only");
            }
            let from = w.groups.last().map_or(0, |g| g.index + 1);
            if s.mode != Mode::Faithful || *b < geometric_tail(s, from)? {
                check.weights_ok = false;
                check.note = Some("tail bound below the geometric tail".into());
            }
        }
    } else if !w.groups.is_empty() || w.tail_bound.is_some() {
        return invalid("plain witnesses carry no groups");
    }
    if let Some(t) = target {
        t.validate(s)?;
        if w.semantics == Semantics::Plain {
            let cov = Coverage { s, pieces: &w.pieces };
            for c in &t.cylinders {
                if cov.covered(&mut c.clone())?.is_some() {
                    check.uncovered = Some(c.clone());
                    break;
                }
            }
        }
    }
    let ok = check.weights_ok && check.uncovered.is_none() && check.total <= w.epsilon;
    check.verdict = Verdict::from_bool(ok);
    Ok(check)
}

/// Splits every plain piece of rank below `j` into rank-`j` pieces: each
/// member of `H` and each extension through the intermediate levels, then
/// a minimum colouring of level `j`. Returns the new witness, with `ε`
/// scaled, and the exact inflation of the total weight.
pub fn refine_witness(s: &Schedule, w: &NullWitness, j: usize) -> Result<(NullWitness, BigRational)> {
    if w.semantics != Semantics::Plain {
        return invalid("only plain witnesses can be refined");
    }
    if w.pieces.iter().all(|p| p.rank >= j) {
        return Ok((w.clone(), BigRational::one()));
    }
    let g = s.graph(j).ok_or_else(|| Error::Materialization(format!("refinement to rank {j} needs level {j}")))?;
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    let (_, mut classes) = chromatic_number(g, &all, COLOR_BUDGET)?;
    for c in &mut classes {
        c.sort_unstable();
    }
    classes.sort();
    let mut pieces = Vec::new();
    for p in &w.pieces {
        if p.rank >= j {
            pieces.push(p.clone());
            continue;
        }
        let mut prefixes: Vec<Vec<usize>> =
            p.h.iter()
                .map(|&a| {
                    let mut q = p.prefix.clone();
                    q.push(a);
                    q
                })
                .collect();
        for n in p.rank + 1..j {
            let size =
                s.graph(n).ok_or_else(|| Error::Materialization(format!("refinement needs level {n}")))?.vertex_count();
            prefixes = prefixes
                .into_iter()
                .flat_map(|q| {
                    (0..size).map(move |a| {
                        let mut r = q.clone();
                        r.push(a);
                        r
                    })
                })
                .collect();
            if prefixes.len() > REFINE_LIMIT {
                return Err(Error::BudgetExhausted(format!("refinement exceeds {REFINE_LIMIT} prefixes")));
            }
        }
        for q in prefixes {
            for c in &classes {
                pieces.push(StandardSet { rank: j, prefix: q.clone(), h: c.clone() });
            }
        }
    }
    let old = w.total();
    let mut refined = NullWitness::plain(s, pieces, BigRational::zero())?;
    let inflation = if old.is_zero() { BigRational::one() } else { refined.total() / &old };
    refined.epsilon = &w.epsilon * &inflation;
    Ok((refined, inflation))
}
