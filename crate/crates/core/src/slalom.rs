//! Finite-horizon slaloms, the relations `∈*` and `∈∞`, the two morphism
//! checks, and the parameter recursion for `c, H, d, a, e`.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::{int, pow2, pq, pq_opt, pq_vec, ratio, to_pq};
use crate::hausdorff::{hull_weight, GroupKind, NullWitness, Semantics, TargetSet, WitnessGroup};
use crate::magnitude::Quantity;
use crate::schedule::{Monomial, Schedule};
use crate::space::StandardSet;
use crate::Verdict;

/// `S(n) ⊆ [alphabet(n)]` with `|S(n)| ≤ width(n)` for `n < horizon`. An
/// entry is a tuple of coordinates; a plain alphabet uses 1-tuples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slalom {
    pub alphabet: Vec<Quantity>,
    pub width: Vec<Quantity>,
    pub entries: Vec<Vec<Vec<u64>>>,
    pub horizon: usize,
}

impl Slalom {
    pub fn validate(&self) -> Result<()> {
        let h = self.horizon;
        if self.alphabet.len() < h || self.width.len() < h || self.entries.len() < h {
            return invalid(format!("slalom data shorter than its horizon {h}"));
        }
        for n in 0..h {
            let len = self.entries[n].len() as u64;
            if len > 0 && Quantity::from_u64(len).try_cmp(&self.width[n])? == Ordering::Greater {
                return invalid(format!("S({n}) has {} entries, width is {}", self.entries[n].len(), self.width[n]));
            }
            let mut seen = self.entries[n].clone();
            seen.sort();
            seen.dedup();
            if seen.len() != self.entries[n].len() {
                return invalid(format!("S({n}) repeats an entry"));
            }
        }
        Ok(())
    }

    pub fn contains(&self, n: usize, v: &[u64]) -> bool {
        self.entries.get(n).is_some_and(|e| e.iter().any(|s| s == v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    /// `x ∈* φ`: membership at every index of the window.
    Eventual,
    /// `x ∈∞ φ`: membership at some index of the window.
    InfinitelyOften,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationResult {
    pub holds: bool,
    pub kind: RelationKind,
    pub window: (usize, usize),
    /// First index witnessing the answer (a miss for eventual, a hit otherwise).
    pub witness_index: Option<usize>,
}

/// The finite-window surrogate of `∈*` or `∈∞`.
pub fn relation_eval(
    x: &[Vec<u64>],
    phi: &Slalom,
    kind: RelationKind,
    window: (usize, usize),
) -> Result<RelationResult> {
    let (n0, n1) = window;
    if n0 > n1 || n1 > phi.horizon || n1 > x.len() {
        return invalid(format!("window [{n0}, {n1}) outside the horizon {} or the sequence", phi.horizon));
    }
    let hit = |n: usize| phi.contains(n, &x[n]);
    let (holds, witness_index) = match kind {
        RelationKind::Eventual => {
            let miss = (n0..n1).find(|&n| !hit(n));
            (miss.is_none(), miss)
        }
        RelationKind::InfinitelyOften => {
            let first = (n0..n1).find(|&n| hit(n));
            (first.is_some(), first)
        }
    };
    Ok(RelationResult { holds, kind, window, witness_index })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    /// `M_{i_{n+1}} > 2^n H(n) N_0···N_{i_n−1}`.
    Literal,
    /// `M_0···M_{i_{n+1}−1} > 2^n H(n) N_0···N_{i_n−1}`.
    Strengthened,
}

/// Cut points `0 = i_0 < i_1 < …`; `I_n = [i_n, i_{n+1})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalPartition {
    pub cuts: Vec<usize>,
}

impl IntervalPartition {
    pub fn new(cuts: Vec<usize>) -> Result<Self> {
        if cuts.first() != Some(&0) || cuts.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("cut points must start at 0 and increase strictly");
        }
        Ok(IntervalPartition { cuts })
    }

    pub fn intervals(&self) -> usize {
        self.cuts.len().saturating_sub(1)
    }

    pub fn interval(&self, n: usize) -> Option<(usize, usize)> {
        Some((*self.cuts.get(n)?, *self.cuts.get(n + 1)?))
    }
}

/// `M_j` as a monomial in the level sizes (`M_0 = 1`, `M_j = 2N_{j−1}`).
fn m_mono(j: usize) -> Monomial {
    if j == 0 {
        Monomial::constant(BigRational::one())
    } else {
        Monomial::constant(int(2)).mul(&Monomial::size(j - 1))
    }
}

/// Order of `value(mono)` against the integer `h`.
fn cmp_mono(s: &Schedule, mono: &Monomial, h: &Quantity) -> Result<Ordering> {
    let v = s.eval(mono)?;
    if let (Some(x), Some(h)) = (&v.exact, h.as_exact()) {
        return Ok(x.cmp(&crate::exact::from_biguint(h)));
    }
    v.num.try_cmp(&h.mul(&v.den))
}

#[derive(Clone, Debug, Serialize)]
pub struct CutStep {
    pub n: usize,
    pub cut: usize,
    /// Candidates skipped because the comparison could not be certified.
    pub undecided: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub mode: PartitionMode,
    pub require_product: bool,
    pub partition: IntervalPartition,
    pub steps: Vec<CutStep>,
    /// All cut points are the least certified choices.
    pub minimal: bool,
}

fn cut_condition(
    s: &Schedule,
    mode: PartitionMode,
    n: usize,
    start: usize,
    j: usize,
    h: &Quantity,
) -> Result<Ordering> {
    let scale = Monomial::constant(pow2(n as i64)).mul(&Monomial::size_product(0, start));
    let lhs = match mode {
        PartitionMode::Literal => m_mono(j),
        PartitionMode::Strengthened => Monomial::m_product(j - 1),
    };
    cmp_mono(s, &lhs.div(&scale), h)
}

fn size_block(s: &Schedule, start: usize, end: usize) -> Result<Quantity> {
    let mut q = Quantity::from_u64(1);
    for k in start..end {
        q = q.mul(s.n(k).ok_or_else(|| Error::Horizon(format!("N_{k} is beyond the horizon")))?);
    }
    Ok(q)
}

/// Least cut points `i_{n+1} > i_n` meeting the mode's inequality (and,
/// optionally, `∏_{k∈I_n} N_k > H(n)`) for `n < widths.len()`.
pub fn build_interval_partition(
    s: &Schedule,
    widths: &[Quantity],
    mode: PartitionMode,
    require_product: bool,
) -> Result<PartitionReport> {
    let mut cuts = vec![0];
    let mut steps = Vec::new();
    let mut minimal = true;
    for (n, h) in widths.iter().enumerate() {
        let start = *cuts.last().expect("nonempty");
        let mut undecided = Vec::new();
        let mut found = None;
        for j in start + 1..=s.levels.len() {
            let ok = match cut_condition(s, mode, n, start, j, h) {
                Ok(o) => o == Ordering::Greater,
                Err(Error::Indeterminate(_)) => {
                    undecided.push(j);
                    false
                }
                Err(e) => return Err(e),
            };
            let ok = ok
                && (!require_product
                    || match size_block(s, start, j)?.try_cmp(h) {
                        Ok(o) => o == Ordering::Greater,
                        Err(Error::Indeterminate(_)) => {
                            undecided.push(j);
                            false
                        }
                        Err(e) => return Err(e),
                    });
            if ok {
                found = Some(j);
                break;
            }
        }
        let Some(cut) = found else {
            return Err(Error::Horizon(format!(
                "no cut point for I_{n} within the {} schedule levels",
                s.levels.len()
            )));
        };
        minimal &= undecided.is_empty();
        cuts.push(cut);
        steps.push(CutStep { n, cut, undecided });
    }
    Ok(PartitionReport { mode, require_product, partition: IntervalPartition { cuts }, steps, minimal })
}

/// A weight compared against `2^{-n}`: exact when the level sizes cancel,
/// otherwise bounds on its `log2`.
#[derive(Clone, Debug, Serialize)]
pub struct WeightBound {
    #[serde(with = "pq_opt")]
    pub exact: Option<BigRational>,
    pub log2: Option<(String, String)>,
    pub at_most_two_pow_minus_n: Verdict,
}

fn weight_vs_power(s: &Schedule, n: usize, mono: &Monomial, count: &Quantity) -> Result<WeightBound> {
    let v = s.eval(mono)?;
    let bound = pow2(-(n as i64));
    let exact = match (&v.exact, count.as_exact()) {
        (Some(x), Some(c)) => Some(x * crate::exact::from_biguint(c)),
        _ => None,
    };
    let verdict = match &exact {
        Some(w) => Verdict::from_bool(*w <= bound),
        None => {
            // count·num ≤ den·2^{-n}  ⇔  2^n·count·num ≤ den
            let lhs = v.num.mul(count).mul(&Quantity::exact(BigUint::one() << n));
            match lhs.try_cmp(&v.den) {
                Ok(o) => Verdict::from_bool(o != Ordering::Greater),
                Err(_) => Verdict::Indeterminate,
            }
        }
    };
    let log2 = match (count.log2_bounds(), v.log2.as_ref()) {
        (Some((a, b)), Some((lo, hi))) => {
            let lo: f64 = lo.parse().unwrap_or(f64::NEG_INFINITY);
            let hi: f64 = hi.parse().unwrap_or(f64::INFINITY);
            Some(((a + lo).to_string(), (b + hi).to_string()))
        }
        _ => None,
    };
    Ok(WeightBound { exact, log2, at_most_two_pow_minus_n: verdict })
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexBound {
    pub n: usize,
    pub interval: (usize, usize),
    /// `H(n)·N_0···N_{i_n−1}/(M_0···M_{i_{n+1}})`, the displayed bound.
    pub display: WeightBound,
    /// `H(n)·N_0···N_{i_n−1}/(M_0···M_{i_{n+1}−1})`, the gauge of the hulls.
    pub hull: WeightBound,
}

fn index_bounds(s: &Schedule, part: &IntervalPartition, widths: &[Quantity]) -> Result<Vec<IndexBound>> {
    let mut out = Vec::new();
    for (n, h) in widths.iter().enumerate().take(part.intervals()) {
        let (start, end) = part.interval(n).expect("in range");
        let head = Monomial::size_product(0, start);
        let display = head.mul(&Schedule::gauge_grid_monomial(end));
        let hull = head.mul(&Schedule::gauge_grid_monomial(end - 1));
        out.push(IndexBound {
            n,
            interval: (start, end),
            display: weight_vs_power(s, n, &display, h)?,
            hull: weight_vs_power(s, n, &hull, h)?,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeComparison {
    pub literal: PartitionReport,
    pub strengthened: PartitionReport,
    pub literal_bounds: Vec<IndexBound>,
    pub strengthened_bounds: Vec<IndexBound>,
    /// Indices where the literal cuts leave the hull weight above `2^{-n}`.
    pub literal_failures: Vec<usize>,
    /// Strengthened cut points are never below the literal ones.
    pub strengthened_dominates: bool,
}

/// Both partition modes side by side with the per-index weight comparisons.
pub fn compare_partition_modes(s: &Schedule, widths: &[Quantity], require_product: bool) -> Result<ModeComparison> {
    let literal = build_interval_partition(s, widths, PartitionMode::Literal, require_product)?;
    let strengthened = build_interval_partition(s, widths, PartitionMode::Strengthened, require_product)?;
    let literal_bounds = index_bounds(s, &literal.partition, widths)?;
    let strengthened_bounds = index_bounds(s, &strengthened.partition, widths)?;
    let literal_failures =
        literal_bounds.iter().filter(|b| b.hull.at_most_two_pow_minus_n == Verdict::Fail).map(|b| b.n).collect();
    let strengthened_dominates = literal.partition.cuts.iter().zip(&strengthened.partition.cuts).all(|(a, b)| a <= b);
    Ok(ModeComparison {
        literal,
        strengthened,
        literal_bounds,
        strengthened_bounds,
        literal_failures,
        strengthened_dominates,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VexistsIndex {
    pub n: usize,
    pub interval: (usize, usize),
    pub entries: usize,
    #[serde(with = "pq_opt")]
    pub weight: Option<BigRational>,
    pub bound: WeightBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct VexistsReport {
    pub mode: Option<PartitionMode>,
    pub indices: Vec<VexistsIndex>,
    pub witness: NullWitness,
    /// Plain pieces for the indices inside the materialized depth.
    pub materialized_pieces: Vec<StandardSet>,
    /// Every index satisfied `weight ≤ 2^{-n}`.
    pub verdict: Verdict,
    pub window: (usize, usize),
}

/// Covers `{x : x↾I_n ∈ S(n)}` for each `n < horizon` by the standard hulls of
/// the depth-`i_{n+1}` cylinders `p⌢s` and weighs each index exactly.
pub fn vexists_morphism_check(
    s: &Schedule,
    part: &IntervalPartition,
    slalom: &Slalom,
    horizon: usize,
) -> Result<VexistsReport> {
    slalom.validate()?;
    if horizon > slalom.horizon || horizon > part.intervals() {
        return Err(Error::Horizon(format!("horizon {horizon} exceeds the slalom or the partition")));
    }
    let mut indices = Vec::new();
    let mut groups = Vec::new();
    let mut pieces = Vec::new();
    let mut verdict = Verdict::Pass;
    for n in 0..horizon {
        let (start, end) = part.interval(n).expect("checked");
        let c = size_block(s, start, end)?;
        let matches = match (c.as_exact(), slalom.alphabet[n].as_exact()) {
            (Some(a), Some(b)) => a == b,
            _ => c == slalom.alphabet[n],
        };
        if !matches {
            return invalid(format!("alphabet mismatch at {n}: c(n) = {c}, slalom has {}", slalom.alphabet[n]));
        }
        let entries = &slalom.entries[n];
        for e in entries {
            if e.len() != end - start {
                return invalid(format!("entry of S({n}) must fix coordinates {start}..{end}"));
            }
            for (k, &v) in (start..end).zip(e) {
                if let Some(size) = s.n(k).and_then(|q| q.as_exact()).and_then(|q| q.to_u64()) {
                    if v >= size {
                        return invalid(format!("entry coordinate {v} out of range at level {k}"));
                    }
                }
            }
        }
        let mono = Monomial::size_product(0, start).mul(&Schedule::gauge_grid_monomial(end - 1));
        let bound = if entries.is_empty() {
            WeightBound { exact: Some(BigRational::zero()), log2: None, at_most_two_pow_minus_n: Verdict::Pass }
        } else {
            weight_vs_power(s, n, &mono, &Quantity::from_u64(entries.len() as u64))?
        };
        verdict = verdict.and(bound.at_most_two_pow_minus_n);
        let weight = hull_weight(s, start, end, entries.len() as u64).ok();
        if let Some(w) = &weight {
            groups.push(WitnessGroup {
                index: n,
                kind: GroupKind::Hulls { start, end, entries: entries.clone() },
                weight: w.clone(),
            });
        }
        if end <= s.materialized_depth() {
            for prefix in s_prefixes(s, start)? {
                for e in entries {
                    let mut full: Vec<usize> = prefix.clone();
                    full.extend(e.iter().map(|&v| v as usize));
                    let last = full.pop().expect("nonempty interval");
                    pieces.push(StandardSet { rank: end - 1, prefix: full, h: vec![last] });
                }
            }
        }
        indices.push(VexistsIndex { n, interval: (start, end), entries: entries.len(), weight, bound });
    }
    let total: BigRational = groups.iter().map(|g| &g.weight).sum();
    let witness = NullWitness {
        epsilon: total,
        semantics: Semantics::Tail,
        pieces: Vec::new(),
        weights: Vec::new(),
        groups,
        tail_bound: None,
    };
    Ok(VexistsReport { mode: None, indices, witness, materialized_pieces: pieces, verdict, window: (0, horizon) })
}

fn s_prefixes(s: &Schedule, len: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = vec![Vec::new()];
    for n in 0..len {
        let size = s.graph(n).ok_or_else(|| Error::Materialization(format!("level {n}")))?.vertex_count();
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..size).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

/// The materialized part of `ψ(S)` at one index: the depth-`i_{n+1}`
/// cylinders `p⌢s`.
pub fn vexists_target(s: &Schedule, part: &IntervalPartition, slalom: &Slalom, n: usize) -> Result<TargetSet> {
    let (start, end) = part.interval(n).ok_or_else(|| Error::Horizon(format!("no interval {n}")))?;
    let mut cyl = Vec::new();
    for p in s_prefixes(s, start)? {
        for e in &slalom.entries[n] {
            let mut c = p.clone();
            c.extend(e.iter().map(|&v| v as usize));
            cyl.push(c);
        }
    }
    TargetSet::new(end, cyl)
}

#[derive(Clone, Debug, Serialize)]
pub struct CovEReport {
    #[serde(with = "pq_vec")]
    pub partial_products: Vec<BigRational>,
    pub nonincreasing: bool,
    /// Strict decrease at every index with `e(n) < a(n)`.
    pub strict_where_smaller: bool,
    /// Least `N` with `∏_{n<N} e(n)/a(n) < tol`.
    pub first_below_tol: Option<usize>,
    #[serde(with = "pq")]
    pub tol: BigRational,
    pub condition: Verdict,
    pub window: (usize, usize),
    pub eventual: bool,
    pub in_psi: bool,
    pub implication: Verdict,
}

/// Membership of `x` in the window restriction of
/// `ψ(S) = {x : ∀^∞ n  x(n) ∈ S(n)}`, evaluated directly from the entries.
fn in_psi_window(x: &[u64], slalom: &Slalom, window: (usize, usize)) -> bool {
    let mut n = window.0;
    while n < window.1 {
        if !slalom.entries[n].iter().any(|e| e.len() == 1 && e[0] == x[n]) {
            return false;
        }
        n += 1;
    }
    true
}

/// Partial products of `e(n)/a(n)` and the implication
/// `x ∈* S ⇒ x ∈ ψ(S)` on one pair over `window`.
pub fn cov_e_morphism_check(
    a: &[u64],
    e: &[u64],
    slalom: &Slalom,
    x: &[u64],
    window: (usize, usize),
    tol: &BigRational,
) -> Result<CovEReport> {
    if a.len() != e.len() {
        return invalid("a and e must have the same length");
    }
    for (n, (&an, &en)) in a.iter().zip(e).enumerate() {
        if en == 0 || en > an {
            return invalid(format!("need 0 < e(n) ≤ a(n); index {n} has e = {en}, a = {an}"));
        }
    }
    let mut partial = Vec::with_capacity(a.len());
    let mut acc = BigRational::one();
    for (&an, &en) in a.iter().zip(e) {
        acc *= ratio(en as i64, an as i64);
        partial.push(acc.clone());
    }
    let nonincreasing = partial.windows(2).all(|w| w[1] <= w[0]);
    let strict_where_smaller = (0..a.len()).all(|n| {
        let prev = if n == 0 { BigRational::one() } else { partial[n - 1].clone() };
        e[n] == a[n] || partial[n] < prev
    });
    let first_below_tol = partial.iter().position(|p| p < tol).map(|i| i + 1);

    let seq: Vec<Vec<u64>> = x.iter().map(|&v| vec![v]).collect();
    let eventual = relation_eval(&seq, slalom, RelationKind::Eventual, window)?.holds;
    let in_psi = in_psi_window(x, slalom, window);
    Ok(CovEReport {
        partial_products: partial,
        nonincreasing,
        strict_where_smaller,
        first_below_tol,
        tol: tol.clone(),
        condition: Verdict::from_bool(first_below_tol.is_some()),
        window,
        eventual,
        in_psi,
        implication: Verdict::from_bool(!eventual || in_psi),
    })
}

/// A random slalom over `a` with width `e` and a point that is caught from
/// a random index on, or escapes at a random index.
pub fn sample_cov_e_pair(a: &[u64], e: &[u64], seed: u64) -> (Slalom, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = a.len();
    let mut entries = Vec::with_capacity(len);
    for n in 0..len {
        let k = rng.gen_range(1..=e[n].min(a[n]));
        let mut set: Vec<u64> = Vec::new();
        while (set.len() as u64) < k {
            let v = rng.gen_range(0..a[n]);
            if !set.contains(&v) {
                set.push(v);
            }
        }
        set.sort_unstable();
        entries.push(set.into_iter().map(|v| vec![v]).collect::<Vec<_>>());
    }
    let from = rng.gen_range(0..=len);
    let x = (0..len)
        .map(|n| {
            let caught = n >= from || rng.gen_bool(0.5);
            let pick = entries[n][rng.gen_range(0..entries[n].len())][0];
            if caught {
                pick
            } else {
                rng.gen_range(0..a[n])
            }
        })
        .collect();
    let slalom = Slalom {
        alphabet: a.iter().map(|&v| Quantity::from_u64(v)).collect(),
        width: e.iter().map(|&v| Quantity::from_u64(v)).collect(),
        entries,
        horizon: len,
    };
    (slalom, x)
}

/// A seeded slalom over the blocks `I_n` of `part`: alphabet `∏_{k∈I_n} N_k`
/// and up to `min(width(n), 3)` distinct entries per index.
pub fn sample_interval_slalom(
    s: &Schedule,
    part: &IntervalPartition,
    widths: &[Quantity],
    seed: u64,
) -> Result<Slalom> {
    let len = widths.len().min(part.intervals());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alphabet = Vec::with_capacity(len);
    let mut entries = Vec::with_capacity(len);
    for (n, width) in widths.iter().enumerate().take(len) {
        let (start, end) = part.interval(n).expect("within the partition");
        alphabet.push(size_block(s, start, end)?);
        let bounds: Vec<u64> = (start..end)
            .map(|k| s.n(k).and_then(|q| q.as_exact()).and_then(|q| q.to_u64()).unwrap_or(u32::MAX as u64))
            .collect();
        let want = width.as_exact().and_then(|w| w.to_u64()).unwrap_or(3).min(3) as usize;
        let mut set: Vec<Vec<u64>> = Vec::new();
        for _ in 0..32 {
            if set.len() == want {
                break;
            }
            let e: Vec<u64> = bounds.iter().map(|&b| rng.gen_range(0..b)).collect();
            if !set.contains(&e) {
                set.push(e);
            }
        }
        set.sort();
        entries.push(set);
    }
    Ok(Slalom { alphabet, width: widths[..len].to_vec(), entries, horizon: len })
}

#[derive(Clone, Debug, Serialize)]
pub struct KmRow {
    pub n: usize,
    pub d: Quantity,
    pub e: Quantity,
    #[serde(rename = "H")]
    pub h: Quantity,
    pub a: Quantity,
    pub c: Option<Quantity>,
    pub interval: Option<(usize, usize)>,
    /// `log_{d(n)} H(n) / d(n)`, which is `n·d(n)/d(n) = n` by the definition of `H`.
    pub ratio: u64,
    /// The same ratio recomputed from the magnitudes when they fit in an `f64`;
    /// serialized as a decimal string.
    #[serde(serialize_with = "decimal_string")]
    pub ratio_numeric: Option<f64>,
}

fn decimal_string<S: serde::Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(&format!("{x:.9}")),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KmReport {
    pub mode: PartitionMode,
    pub rows: Vec<KmRow>,
    /// Why the table stops early, if it does.
    pub truncated: Option<String>,
    /// The defining equalities re-derived independently: exactly where both
    /// sides are exact, as overlapping intervals where magnitudes are involved.
    pub equalities: Verdict,
    pub exact_checks: usize,
    pub interval_checks: usize,
}

#[derive(Default)]
struct Tally {
    ok: bool,
    exact: usize,
    interval: usize,
}

impl Tally {
    fn same(&mut self, a: &Quantity, b: &Quantity) {
        match (a, b) {
            (Quantity::Exact(x), Quantity::Exact(y)) => {
                self.exact += 1;
                self.ok &= x == y;
            }
            _ => {
                self.interval += 1;
                // a certified strict order means the two derivations disagree
                self.ok &= !matches!(a.try_cmp(b), Ok(Ordering::Less | Ordering::Greater));
            }
        }
    }
}

/// The recursion `d(0) = 2, e(0) = 1, H(n) = d(n)^{n·d(n)}`, `I_n` by the
/// chosen partition mode with `∏_{k∈I_n} N_k > H(n)`, `c(n) = ∏_{k∈I_n} N_k`,
/// `a(n) = 2e(n)`, `e(n+1) = 2∏_{k≤n} 2^{c(k)}`, `d(n+1) = ∏_{k≤n} a(k)`.
pub fn km_recursion(s: &Schedule, n_max: usize, mode: PartitionMode) -> Result<KmReport> {
    let two = Quantity::from_u64(2);
    let mut rows: Vec<KmRow> = Vec::new();
    let mut d = two.clone();
    let mut e = Quantity::from_u64(1);
    let mut widths: Vec<Quantity> = Vec::new();
    let mut truncated = None;
    let mut c_sum = Quantity::from_u64(1);
    let mut a_prod = Quantity::from_u64(1);
    for n in 0..=n_max {
        let h = if n == 0 { Quantity::from_u64(1) } else { d.pow(&Quantity::from_u64(n as u64).mul(&d)) };
        let a = two.mul(&e);
        widths.push(h.clone());
        let (c, interval) = if truncated.is_none() {
            match build_interval_partition(s, &widths, mode, true) {
                Ok(p) => {
                    let iv = p.partition.interval(n).expect("built");
                    (Some(size_block(s, iv.0, iv.1)?), Some(iv))
                }
                Err(err @ (Error::Horizon(_) | Error::Indeterminate(_))) => {
                    truncated = Some(format!("I_{n}: {err}"));
                    (None, None)
                }
                Err(err) => return Err(err),
            }
        } else {
            (None, None)
        };
        let ratio_numeric = match (h.log2_bounds(), d.as_exact().and_then(|v| v.to_f64())) {
            (Some((lo, hi)), Some(dv)) if dv.is_finite() => {
                let per = dv.log2() * dv;
                Some((lo + hi) / 2.0 / per)
            }
            _ => None,
        };
        rows.push(KmRow {
            n,
            d: d.clone(),
            e: e.clone(),
            h,
            a: a.clone(),
            c: c.clone(),
            interval,
            ratio: n as u64,
            ratio_numeric,
        });
        a_prod = a_prod.mul(&a);
        d = a_prod.clone();
        match &c {
            Some(c) => {
                c_sum = c_sum.add(c);
                e = c_sum.pow2();
            }
            None => break,
        }
    }
    let tally = km_equalities(&rows);
    Ok(KmReport {
        mode,
        rows,
        truncated,
        equalities: Verdict::from_bool(tally.ok),
        exact_checks: tally.exact,
        interval_checks: tally.interval,
    })
}

/// Re-derives every row from its predecessors with a different evaluation order.
fn km_equalities(rows: &[KmRow]) -> Tally {
    let mut t = Tally { ok: true, ..Tally::default() };
    let one = Quantity::from_u64(1);
    let two = Quantity::from_u64(2);
    if let Some(r0) = rows.first() {
        t.same(&r0.d, &two);
        t.same(&r0.e, &one);
    }
    for (i, r) in rows.iter().enumerate() {
        let h = if r.n == 0 { one.clone() } else { r.d.pow(&Quantity::from_u64(r.n as u64).mul(&r.d)) };
        t.same(&r.h, &h);
        t.same(&r.a, &r.e.mul(&two));
        if i > 0 {
            let prev = &rows[..i];
            let d = prev.iter().fold(one.clone(), |acc, p| p.a.mul(&acc));
            t.same(&r.d, &d);
            if prev.iter().all(|p| p.c.is_some()) {
                let e = prev.iter().fold(two.clone(), |acc, p| p.c.as_ref().expect("checked").pow2().mul(&acc));
                t.same(&r.e, &e);
            }
        }
    }
    t
}

/// `log2` bounds of a quantity rendered for reports.
pub fn describe(q: &Quantity) -> String {
    match q.as_exact() {
        Some(v) if v.bits() <= 64 => v.to_string(),
        _ => q.to_string(),
    }
}

/// `2^{-N(N+1)/2}`, the closed form of `∏_{n<N} 2^{-(n+1)}`.
pub fn cov_e_closed_form(n: usize) -> BigRational {
    pow2(-((n * (n + 1) / 2) as i64))
}

/// `"p/q"` of an exact weight or its `log2` bounds.
pub fn weight_text(w: &WeightBound) -> String {
    match (&w.exact, &w.log2) {
        (Some(x), _) => to_pq(x),
        (None, Some((lo, hi))) => format!("2^[{lo}, {hi}]"),
        _ => "unavailable".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hausdorff::null_witness_check;
    use crate::schedule::build_preset;

    fn ones(n: usize) -> Vec<Quantity> {
        vec![Quantity::from_u64(1); n]
    }

    #[test]
    fn relation_examples() {
        let x: Vec<Vec<u64>> = (0..10).map(|n| vec![n % 2]).collect();
        let phi = Slalom {
            alphabet: vec![Quantity::from_u64(2); 10],
            width: vec![Quantity::from_u64(1); 10],
            entries: vec![vec![vec![0]]; 10],
            horizon: 10,
        };
        assert!(relation_eval(&x, &phi, RelationKind::InfinitelyOften, (0, 10)).unwrap().holds);
        let ev = relation_eval(&x, &phi, RelationKind::Eventual, (0, 10)).unwrap();
        assert!(!ev.holds);
        assert_eq!(ev.witness_index, Some(1));
        let empty = Slalom { entries: vec![vec![]; 10], ..phi.clone() };
        assert!(!relation_eval(&x, &empty, RelationKind::InfinitelyOften, (0, 10)).unwrap().holds);
        let own = Slalom { entries: x.iter().map(|v| vec![v.clone()]).collect(), ..phi.clone() };
        assert!(relation_eval(&x, &own, RelationKind::Eventual, (4, 10)).unwrap().holds);
        assert!(relation_eval(&x, &phi, RelationKind::Eventual, (0, 11)).is_err());
    }

    #[test]
    fn partition_examples() {
        let s = build_preset("faithful-small").unwrap();
        let lit = build_interval_partition(&s, &ones(1), PartitionMode::Literal, false).unwrap();
        assert_eq!(lit.partition.cuts, vec![0, 1]);
        let widths = vec![Quantity::from_u64(1), Quantity::from_u64(4)];
        let lit = build_interval_partition(&s, &widths, PartitionMode::Literal, false).unwrap();
        assert_eq!(lit.partition.cuts, vec![0, 1, 2]);
        let cmp = compare_partition_modes(&s, &ones(5), false).unwrap();
        assert!(cmp.strengthened_dominates);
        assert_eq!(cmp.strengthened.partition.cuts, vec![0, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn literal_counter_instance_is_flagged() {
        let s = build_preset("faithful-small").unwrap();
        let widths = vec![Quantity::from_u64(3)];
        let cmp = compare_partition_modes(&s, &widths, false).unwrap();
        assert_eq!(cmp.literal.partition.cuts, vec![0, 1]);
        assert_eq!(cmp.literal_failures, vec![0]);
        assert_eq!(cmp.literal_bounds[0].hull.exact, Some(int(3)));
        assert_eq!(cmp.strengthened_bounds[0].hull.at_most_two_pow_minus_n, Verdict::Pass);
    }

    fn unit_slalom(s: &Schedule, part: &IntervalPartition, len: usize) -> Slalom {
        let alphabet = (0..len).map(|n| {
            let (a, b) = part.interval(n).unwrap();
            size_block(s, a, b).unwrap()
        });
        Slalom {
            alphabet: alphabet.collect(),
            width: ones(len),
            entries: (0..len)
                .map(|n| {
                    let (a, b) = part.interval(n).unwrap();
                    vec![vec![0; b - a]]
                })
                .collect(),
            horizon: len,
        }
    }

    #[test]
    fn vexists_strengthened() {
        let s = build_preset("faithful-small").unwrap();
        let part = build_interval_partition(&s, &ones(5), PartitionMode::Strengthened, false).unwrap().partition;
        let sl = unit_slalom(&s, &part, 5);
        let r = vexists_morphism_check(&s, &part, &sl, 5).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        // I_0 = [0, 2) and I_n = [n+1, n+2) afterwards
        for (n, idx) in r.indices.iter().enumerate() {
            assert_eq!(idx.weight, Some(pow2(-(n.max(1) as i64) - 1)));
            assert!(idx.weight.clone().unwrap() <= pow2(-(n as i64)));
        }
        let check = null_witness_check(&s, &r.witness, None).unwrap();
        assert_eq!(check.verdict, Verdict::Pass);
        let plain = NullWitness::plain(&s, r.materialized_pieces.clone(), ratio(1, 2)).unwrap();
        let target = vexists_target(&s, &part, &sl, 0).unwrap();
        assert_eq!(null_witness_check(&s, &plain, Some(&target)).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn sampled_slalom_is_valid() {
        let s = build_preset("faithful-small").unwrap();
        let part = build_interval_partition(&s, &ones(4), PartitionMode::Strengthened, false).unwrap().partition;
        let sl = sample_interval_slalom(&s, &part, &ones(4), 7).unwrap();
        sl.validate().unwrap();
        assert_eq!(sl.entries[0].len(), 1);
        assert_eq!(sl.entries[0][0].len(), 2);
        assert_eq!(vexists_morphism_check(&s, &part, &sl, 4).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn vexists_empty_and_mismatch() {
        let s = build_preset("faithful-small").unwrap();
        let part = build_interval_partition(&s, &ones(3), PartitionMode::Strengthened, false).unwrap().partition;
        let mut sl = unit_slalom(&s, &part, 3);
        sl.entries = vec![vec![]; 3];
        let r = vexists_morphism_check(&s, &part, &sl, 3).unwrap();
        assert_eq!(r.witness.total(), BigRational::zero());
        sl.alphabet[0] = Quantity::from_u64(7);
        assert!(vexists_morphism_check(&s, &part, &sl, 3).is_err());
    }

    #[test]
    fn cov_e_products() {
        let a: Vec<u64> = (0..8).map(|n| 1 << (n + 1)).collect();
        let e = vec![1; 8];
        let (sl, x) = sample_cov_e_pair(&a, &e, 1);
        let r = cov_e_morphism_check(&a, &e, &sl, &x, (3, 8), &ratio(1, 1_000_000)).unwrap();
        assert_eq!(&r.partial_products[..3], &[ratio(1, 2), ratio(1, 8), ratio(1, 64)]);
        for (i, p) in r.partial_products.iter().enumerate() {
            assert_eq!(*p, cov_e_closed_form(i + 1));
        }
        assert_eq!(r.first_below_tol, Some(6));
        assert!(r.strict_where_smaller && r.nonincreasing);
        assert_eq!(r.implication, Verdict::Pass);

        let flat = cov_e_morphism_check(&[2; 4], &[2; 4], &sl, &x, (0, 4), &ratio(1, 2)).unwrap();
        assert!(flat.partial_products.iter().all(|p| p.is_one()));
        assert_eq!(flat.condition, Verdict::Fail);
        assert!(cov_e_morphism_check(&[2], &[3], &sl, &x, (0, 1), &ratio(1, 2)).is_err());
    }

    #[test]
    fn km_first_rows() {
        let s = build_preset("faithful-small").unwrap();
        let r = km_recursion(&s, 5, PartitionMode::Strengthened).unwrap();
        let q = |v: u64| Quantity::from_u64(v);
        assert_eq!(r.rows[0].d, q(2));
        assert_eq!(r.rows[0].e, q(1));
        assert_eq!(r.rows[0].h, q(1));
        assert_eq!(r.rows[0].a, q(2));
        assert_eq!(r.rows[1].d, q(2));
        assert_eq!(r.rows[1].h, q(4));
        for row in &r.rows {
            assert_eq!(row.ratio, row.n as u64);
            if let Some(x) = row.ratio_numeric {
                assert!((x - row.n as f64).abs() < 1e-6, "row {}: {x}", row.n);
            }
        }
        assert_eq!(r.equalities, Verdict::Pass);
        assert!(r.exact_checks >= 8);
    }
}
