//! Finite metric spaces, Assumption(*), separable ball families, the doubling
//! check, and the finite-depth Tukey reduction `N^f ⪯_T (ω^ω, S, ∈*)`.
//!
//! Point sets are `u64` bitmasks, so spaces carrying a ball family have at
//! most 64 points; exhaustive subset checks stop at [`EXHAUSTIVE_LIMIT`].

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::{int, pow2, pq, pq_opt, pq_vec, ratio};
use crate::magnitude::Quantity;
use crate::schedule::Schedule;
use crate::space::Space;
use crate::Verdict;

pub const EXHAUSTIVE_LIMIT: usize = 16;
pub const MASK_LIMIT: usize = 64;

fn mask_points(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

fn points_mask(points: &[usize]) -> u64 {
    points.iter().fold(0, |m, &p| m | 1 << p)
}

/// Exact rational distance table with the metric axioms checked on
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    dist: Vec<Vec<BigRational>>,
}

#[derive(Serialize, Deserialize)]
struct MetricFile {
    distances: Vec<Vec<String>>,
}

impl FiniteMetricSpace {
    pub fn new(dist: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return invalid("a metric space needs at least one point");
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return invalid(format!("row {i} has {} entries, expected {n}", row.len()));
            }
            if !row[i].is_zero() {
                return invalid(format!("d({i},{i}) = {} is not 0", row[i]));
            }
            for j in 0..n {
                if i != j && !row[j].is_positive() {
                    return invalid(format!("d({i},{j}) = {} is not positive", row[j]));
                }
                if row[j] != dist[j][i] {
                    return invalid(format!("d({i},{j}) ≠ d({j},{i})"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > &dist[i][j] + &dist[j][k] {
                        return invalid(format!("triangle inequality fails at ({i},{j},{k})"));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { dist })
    }

    /// Points on a line at the given (distinct) positions.
    pub fn collinear(positions: &[BigRational]) -> Result<Self> {
        Self::new(positions.iter().map(|a| positions.iter().map(|b| (a - b).abs()).collect()).collect())
    }

    /// `ℓ1` distances between distinct integer points.
    pub fn taxicab(points: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            points
                .iter()
                .map(|a| points.iter().map(|b| int(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())).collect())
                .collect(),
        )
    }

    /// `d(x,y) = 2^{-|common prefix|}` on distinct binary words.
    pub fn from_words(words: &[Vec<u8>]) -> Result<Self> {
        let d = |a: &[u8], b: &[u8]| {
            if a == b {
                return BigRational::zero();
            }
            let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
            pow2(-(common as i64))
        };
        Self::new(words.iter().map(|a| words.iter().map(|b| d(a, b)).collect()).collect())
    }

    /// `(Ω, ρ)` restricted to the length-`len` prefixes of `space`.
    pub fn from_rho(space: &Space, len: usize) -> Result<(Self, Vec<Vec<usize>>)> {
        let pts = space.points(len);
        if pts.len() > 4096 {
            return invalid(format!("{} points is too many for a distance table", pts.len()));
        }
        let dist = pts
            .iter()
            .map(|a| pts.iter().map(|b| space.rho(a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok((Self::new(dist)?, pts))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MetricFile = serde_json::from_str(text)?;
        let dist = file
            .distances
            .iter()
            .map(|row| row.iter().map(|s| crate::exact::parse_pq(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Self::new(dist)
    }

    pub fn to_json(&self) -> Result<String> {
        let distances = self.dist.iter().map(|row| row.iter().map(crate::exact::to_pq).collect()).collect();
        Ok(serde_json::to_string_pretty(&MetricFile { distances })?)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn d(&self, i: usize, j: usize) -> &BigRational {
        &self.dist[i][j]
    }

    pub fn diameter(&self, points: &[usize]) -> BigRational {
        let mut best = BigRational::zero();
        for (k, &i) in points.iter().enumerate() {
            for &j in &points[k + 1..] {
                if self.dist[i][j] > best {
                    best = self.dist[i][j].clone();
                }
            }
        }
        best
    }

    /// A triple with `d(x,z) > max(d(x,y), d(y,z))`.
    pub fn ultrametric_violation(&self) -> Option<[usize; 3]> {
        let n = self.len();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if self.dist[x][z] > self.dist[x][y].clone().max(self.dist[y][z].clone()) {
                        return Some([x, y, z]);
                    }
                }
            }
        }
        None
    }

    pub fn is_ultrametric(&self) -> bool {
        self.ultrametric_violation().is_none()
    }

    /// Open ball `B(c, q) = {x : d(c,x) < q}`.
    pub fn ball(&self, c: usize, q: &BigRational) -> Vec<usize> {
        (0..self.len()).filter(|&x| &self.dist[c][x] < q).collect()
    }

    /// Distinct distances (including 0) shifted by `eta`: a radius grid fine
    /// enough that `B(a, diam(A) + eta)` exists for every `A ∋ a`.
    pub fn fine_radius_grid(&self, eta: &BigRational) -> Vec<BigRational> {
        let mut ds: BTreeSet<BigRational> = BTreeSet::new();
        for row in &self.dist {
            ds.extend(row.iter().cloned());
        }
        ds.into_iter().map(|d| d + eta).collect()
    }

    fn diameters_by_mask(&self) -> Result<Vec<BigRational>> {
        let n = self.len();
        if n > EXHAUSTIVE_LIMIT {
            return invalid(format!("exhaustive subset checks stop at {EXHAUSTIVE_LIMIT} points, got {n}"));
        }
        let mut diam = vec![BigRational::zero(); 1 << n];
        for mask in 1usize..1 << n {
            let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
            let rest = mask & !(1 << top);
            let mut best = diam[rest].clone();
            for j in mask_points(rest as u64) {
                if self.dist[top][j] > best {
                    best = self.dist[top][j].clone();
                }
            }
            diam[mask] = best;
        }
        Ok(diam)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    /// `f(t) = f(t_last)` beyond the grid.
    Constant,
    /// Continue the last segment.
    LastSlope,
}

/// Piecewise-linear gauge through `(t_i, f(t_i))`, starting at `(0, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeFn {
    #[serde(with = "grid_pairs")]
    pub grid: Vec<(BigRational, BigRational)>,
    pub extension: Extension,
}

mod grid_pairs {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(g: &[(BigRational, BigRational)], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[String; 2]> = g.iter().map(|(a, b)| [crate::exact::to_pq(a), crate::exact::to_pq(b)]).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<(BigRational, BigRational)>, D::Error> {
        let v: Vec<[String; 2]> = Vec::deserialize(d)?;
        v.iter()
            .map(|[a, b]| {
                Ok((
                    crate::exact::parse_pq(a).map_err(serde::de::Error::custom)?,
                    crate::exact::parse_pq(b).map_err(serde::de::Error::custom)?,
                ))
            })
            .collect()
    }
}

impl GaugeFn {
    pub fn new(grid: Vec<(BigRational, BigRational)>, extension: Extension) -> Result<Self> {
        let g = GaugeFn { grid, extension };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self.grid.first() {
            Some((t, v)) if t.is_zero() && v.is_zero() => {}
            _ => return invalid("a gauge grid starts at (0, 0)"),
        }
        for w in self.grid.windows(2) {
            if w[1].0 <= w[0].0 {
                return invalid(format!("gauge arguments must increase: {} then {}", w[0].0, w[1].0));
            }
            if w[1].1 < w[0].1 {
                return invalid(format!("gauge decreases between {} and {}", w[0].0, w[1].0));
            }
        }
        Ok(())
    }

    /// `f(t) = slope·t`.
    pub fn linear(slope: BigRational) -> Result<Self> {
        Self::new(vec![(BigRational::zero(), BigRational::zero()), (int(1), slope)], Extension::LastSlope)
    }

    /// `0` up to `at`, then a ramp of width `width` up to `height`: a jump
    /// emulated by a steep linear piece.
    pub fn jump(at: BigRational, width: BigRational, height: BigRational) -> Result<Self> {
        let top = &at + width;
        Self::new(
            vec![(BigRational::zero(), BigRational::zero()), (at, BigRational::zero()), (top, height)],
            Extension::Constant,
        )
    }

    /// `h` through `(2^{-n}, 1/(M_0···M_n))` for `n ≤ depth`, constant above 1.
    pub fn from_schedule(s: &Schedule, depth: usize) -> Result<Self> {
        let mut grid = vec![(BigRational::zero(), BigRational::zero())];
        for n in (0..=depth).rev() {
            grid.push((pow2(-(n as i64)), s.gauge_at_level(n)?));
        }
        Self::new(grid, Extension::Constant)
    }

    pub fn eval(&self, t: &BigRational) -> Result<BigRational> {
        if t.is_negative() {
            return invalid("gauge argument must be nonnegative");
        }
        let i = self.grid.partition_point(|(a, _)| a <= t);
        if i < self.grid.len() {
            let (a, fa) = &self.grid[i - 1];
            let (b, fb) = &self.grid[i];
            return Ok(fa + (t - a) * (fb - fa) / (b - a));
        }
        let (b, fb) = self.grid.last().expect("nonempty");
        match (self.extension, self.grid.len()) {
            (Extension::Constant, _) | (_, 1) => Ok(fb.clone()),
            (Extension::LastSlope, k) => {
                let (a, fa) = &self.grid[k - 2];
                Ok(fb + (t - b) * (fb - fa) / (b - a))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    #[serde(with = "pq")]
    pub radius: BigRational,
    pub members: Vec<usize>,
    #[serde(with = "pq")]
    pub diameter: BigRational,
}

/// `{B(c, q) : c ∈ X, q ∈ grid}`, indexed center-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub balls: Vec<Ball>,
}

impl BallFamily {
    pub fn new(x: &FiniteMetricSpace, radius_grid: &[BigRational]) -> Result<Self> {
        if x.len() > MASK_LIMIT {
            return invalid(format!("ball families support at most {MASK_LIMIT} points"));
        }
        if radius_grid.is_empty() || radius_grid.iter().any(|q| !q.is_positive()) {
            return invalid("the radius grid must be a nonempty list of positive rationals");
        }
        let mut grid = radius_grid.to_vec();
        grid.sort();
        grid.dedup();
        let mut balls = Vec::new();
        for c in 0..x.len() {
            for q in &grid {
                let members = x.ball(c, q);
                let diameter = x.diameter(&members);
                balls.push(Ball { center: c, radius: q.clone(), members, diameter });
            }
        }
        Ok(BallFamily { balls })
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    fn masks(&self) -> Vec<u64> {
        self.balls.iter().map(|b| points_mask(&b.members)).collect()
    }

    /// `f(diam C)` for every ball.
    pub fn weights(&self, f: &GaugeFn) -> Result<Vec<BigRational>> {
        self.balls.iter().map(|b| f.eval(&b.diameter)).collect()
    }

    /// Union of the listed balls.
    pub fn union(&self, indices: &[usize]) -> Result<Vec<usize>> {
        let mut mask = 0u64;
        for &i in indices {
            let b = self.balls.get(i).ok_or_else(|| Error::InvalidInput(format!("no ball {i}")))?;
            mask |= points_mask(&b.members);
        }
        Ok(mask_points(mask))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailingPair {
    pub subset: Vec<usize>,
    #[serde(with = "pq")]
    pub epsilon: BigRational,
    /// Right-hand side the witness had to meet.
    #[serde(with = "pq")]
    pub bound: BigRational,
    /// Smallest left-hand side among balls containing the subset.
    #[serde(with = "pq_opt")]
    pub best: Option<BigRational>,
}

const FAILURE_SAMPLES: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct BallFamilyReport {
    pub family: BallFamily,
    pub ultrametric: bool,
    /// `diam(C) ≤ ε + factor·diam(A)`: 1 on ultrametric spaces, else 2.
    pub factor: u32,
    pub checked: u64,
    pub failure_count: u64,
    pub failures: Vec<FailingPair>,
    pub verdict: Verdict,
}

/// All balls over all centers and grid radii, and an exhaustive search for
/// a witness `C ⊇ A` with `diam(C) ≤ ε + 2·diam(A)` (`ε + diam(A)` when `X`
/// is ultrametric) for every nonempty `A` and every grid `ε`.
pub fn build_ball_family(x: &FiniteMetricSpace, radius_grid: &[BigRational]) -> Result<BallFamilyReport> {
    let family = BallFamily::new(x, radius_grid)?;
    let diam = x.diameters_by_mask()?;
    let ultrametric = x.is_ultrametric();
    let factor = if ultrametric { 1 } else { 2 };
    let masks = family.masks();
    let mut eps: Vec<BigRational> = radius_grid.to_vec();
    eps.sort();
    eps.dedup();
    let (mut checked, mut failure_count, mut failures) = (0, 0, Vec::new());
    for a in 1u64..1 << x.len() {
        let da = &diam[a as usize];
        let best = (0..family.len()).filter(|&i| masks[i] & a == a).map(|i| &family.balls[i].diameter).min().cloned();
        for e in &eps {
            checked += 1;
            let bound = e + da * int(factor as i64);
            if best.as_ref().is_some_and(|b| *b <= bound) {
                continue;
            }
            failure_count += 1;
            if failures.len() < FAILURE_SAMPLES {
                failures.push(FailingPair { subset: mask_points(a), epsilon: e.clone(), bound, best: best.clone() });
            }
        }
    }
    Ok(BallFamilyReport {
        family,
        ultrametric,
        factor,
        checked,
        failure_count,
        failures,
        verdict: Verdict::from_bool(failure_count == 0),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StarReport {
    #[serde(with = "pq")]
    pub alpha: BigRational,
    pub ultrametric: bool,
    pub subsets: u64,
    pub checked: u64,
    pub failure_count: u64,
    pub failures: Vec<FailingPair>,
    pub verdict: Verdict,
}

/// Assumption(*) on the given pairs: some `C ∈ 𝒞` with `A ⊆ C` and
/// `f(diam C) ≤ ε + α·f(diam A)`. `subsets = None` means every nonempty
/// subset. The empty set is skipped: no ball is empty.
pub fn check_assumption_star(
    x: &FiniteMetricSpace,
    f: &GaugeFn,
    family: &BallFamily,
    alpha: &BigRational,
    eps_list: &[BigRational],
    subsets: Option<&[Vec<usize>]>,
) -> Result<StarReport> {
    if *alpha <= BigRational::one() {
        return invalid(format!("Assumption(*) needs α > 1, got {alpha}"));
    }
    if eps_list.is_empty() || eps_list.iter().any(|e| !e.is_positive()) {
        return invalid("ε values must be positive");
    }
    if x.len() > MASK_LIMIT {
        return invalid(format!("at most {MASK_LIMIT} points"));
    }
    let list: Vec<u64> = match subsets {
        Some(list) => list
            .iter()
            .map(|a| {
                if a.is_empty() || a.iter().any(|&p| p >= x.len()) {
                    invalid(format!("subset {a:?} is empty or out of range"))
                } else {
                    Ok(points_mask(a))
                }
            })
            .collect::<Result<_>>()?,
        None => {
            if x.len() > EXHAUSTIVE_LIMIT {
                return invalid(format!("exhaustive subset checks stop at {EXHAUSTIVE_LIMIT} points"));
            }
            (1u64..1 << x.len()).collect()
        }
    };
    let masks = family.masks();
    let weights = family.weights(f)?;
    let (mut checked, mut failure_count, mut failures) = (0, 0, Vec::new());
    for &a in &list {
        let fa = f.eval(&x.diameter(&mask_points(a)))?;
        let best = (0..family.len()).filter(|&i| masks[i] & a == a).map(|i| &weights[i]).min().cloned();
        for e in eps_list {
            checked += 1;
            let bound = e + alpha * &fa;
            if best.as_ref().is_some_and(|b| *b <= bound) {
                continue;
            }
            failure_count += 1;
            if failures.len() < FAILURE_SAMPLES {
                failures.push(FailingPair { subset: mask_points(a), epsilon: e.clone(), bound, best: best.clone() });
            }
        }
    }
    Ok(StarReport {
        alpha: alpha.clone(),
        ultrametric: x.is_ultrametric(),
        subsets: list.len() as u64,
        checked,
        failure_count,
        failures,
        verdict: Verdict::from_bool(failure_count == 0),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingRow {
    #[serde(with = "pq")]
    pub x: BigRational,
    #[serde(with = "pq")]
    pub f_x: BigRational,
    #[serde(with = "pq")]
    pub f_2x: BigRational,
    pub holds: bool,
}

/// `h(2^{-n})/h(2^{-n-1})`, which is `M_{n+1}`.
#[derive(Clone, Debug, Serialize)]
pub struct LevelRatio {
    pub n: usize,
    pub ratio: Quantity,
    /// Checked against the exact gauge values (not only read off `M_{n+1}`).
    pub via_gauge: bool,
    pub below_r: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingReport {
    #[serde(with = "pq")]
    pub r: BigRational,
    pub rows: Vec<DoublingRow>,
    pub level_ratios: Option<Vec<LevelRatio>>,
    /// Some grid argument has `f(x) = 0`, where `f(2x) < r·f(x)` is false.
    pub degenerate: bool,
    #[serde(with = "pq_opt")]
    pub first_failure: Option<BigRational>,
    pub verdict: Verdict,
}

/// `f(2x) < r·f(x)` at every grid argument, exactly.
pub fn doubling_check(f: &GaugeFn, r: &BigRational, grid: &[BigRational]) -> Result<DoublingReport> {
    if grid.iter().any(|x| !x.is_positive()) {
        return invalid("doubling grid arguments must be positive");
    }
    let mut rows = Vec::new();
    for x in grid {
        let f_x = f.eval(x)?;
        let f_2x = f.eval(&(x * int(2)))?;
        let holds = f_2x < r * &f_x;
        rows.push(DoublingRow { x: x.clone(), f_x, f_2x, holds });
    }
    let degenerate = rows.iter().any(|row| row.f_x.is_zero());
    let first_failure = rows.iter().find(|row| !row.holds).map(|row| row.x.clone());
    let verdict = Verdict::from_bool(first_failure.is_none());
    Ok(DoublingReport { r: r.clone(), rows, level_ratios: None, degenerate, first_failure, verdict })
}

/// The doubling check for `h` at `x = 2^{-n-1}`, `n < n_max`. Rows need exact
/// gauge values; the level ratios `M_{n+1}` are reported for every `n`.
pub fn h_doubling_check(s: &Schedule, r: &BigRational, n_max: usize) -> Result<DoublingReport> {
    if !r.is_positive() {
        return invalid("r must be positive");
    }
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for n in 0..n_max {
        let m =
            s.m(n + 1).ok_or_else(|| Error::Horizon(format!("M_{} is beyond the horizon {}", n + 1, s.horizon())))?;
        let mut via_gauge = false;
        if let (Ok(hi), Ok(lo)) = (s.gauge_at_level(n), s.gauge_at_level(n + 1)) {
            let exact = &hi / &lo;
            if let Some(mv) = m.as_exact() {
                if exact != crate::exact::from_biguint(mv) {
                    return Err(Error::Verification(format!("h(2^-{n})/h(2^-{}) = {exact} ≠ M_{}", n + 1, n + 1)));
                }
            }
            via_gauge = true;
            let x = pow2(-(n as i64) - 1);
            let holds = hi < r * &lo;
            rows.push(DoublingRow { x, f_x: lo, f_2x: hi, holds });
        }
        let below_r = match m.as_exact() {
            Some(v) => crate::exact::from_biguint(v) < *r,
            None => {
                let ceiling = crate::exact::ceil(r).max(BigInt::one());
                let bound = Quantity::exact(ceiling.to_biguint().expect("positive"));
                m.try_cmp(&bound)? == std::cmp::Ordering::Less
            }
        };
        ratios.push(LevelRatio { n, ratio: m, via_gauge, below_r });
    }
    let first_failure = rows.iter().find(|row| !row.holds).map(|row| row.x.clone());
    let ok = ratios.iter().all(|l| l.below_r);
    Ok(DoublingReport {
        r: r.clone(),
        degenerate: rows.iter().any(|row| row.f_x.is_zero()),
        rows,
        level_ratios: Some(ratios),
        first_failure,
        verdict: Verdict::from_bool(ok),
    })
}

/// One row `ℐ_n` of the packed cover index: finite subfamilies `I` with
/// `Σ_{C∈I} f(diam C) ≤ 4^{-n}` and `|I| ≤ size_cap`, ordered by size and
/// then lexicographically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverRow {
    pub n: usize,
    pub size_cap: usize,
    pub subfamilies: Vec<Vec<usize>>,
    #[serde(with = "pq_vec")]
    pub weights: Vec<BigRational>,
}

impl CoverRow {
    pub fn position(&self, block: &[usize]) -> Option<usize> {
        if block.len() > self.size_cap {
            return None;
        }
        self.subfamilies.iter().position(|s| s == block)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackedCoverIndex {
    pub rows: Vec<CoverRow>,
}

impl PackedCoverIndex {
    pub fn build(family: &BallFamily, f: &GaugeFn, rows: usize, size_cap: usize, budget: u64) -> Result<Self> {
        let weights = family.weights(f)?;
        let rows = (0..rows).map(|n| enumerate_row(&weights, n, size_cap, budget)).collect::<Result<_>>()?;
        Ok(PackedCoverIndex { rows })
    }
}

pub const DEFAULT_ROW_BUDGET: u64 = 1_000_000;

/// `ℐ_n` for the family under `f`.
pub fn enumerate_in(family: &BallFamily, f: &GaugeFn, n: usize, size_cap: usize, budget: u64) -> Result<CoverRow> {
    enumerate_row(&family.weights(f)?, n, size_cap, budget)
}

/// `ℐ_n` for explicit ball weights.
pub fn enumerate_row(weights: &[BigRational], n: usize, size_cap: usize, budget: u64) -> Result<CoverRow> {
    if weights.iter().any(|w| w.is_negative()) {
        return invalid("ball weights must be nonnegative");
    }
    let limit = pow2(-2 * n as i64);
    let mut row = CoverRow { n, size_cap, subfamilies: Vec::new(), weights: Vec::new() };
    let mut stack = Vec::new();
    for k in 0..=size_cap.min(weights.len()) {
        combos(weights, &limit, k, 0, &mut stack, &BigRational::zero(), &mut row, budget)?;
    }
    Ok(row)
}

#[allow(clippy::too_many_arguments)]
fn combos(
    weights: &[BigRational],
    limit: &BigRational,
    k: usize,
    from: usize,
    stack: &mut Vec<usize>,
    sum: &BigRational,
    row: &mut CoverRow,
    budget: u64,
) -> Result<()> {
    if stack.len() == k {
        if row.subfamilies.len() as u64 >= budget {
            return Err(Error::BudgetExhausted(format!("ℐ_{} has more than {budget} entries", row.n)));
        }
        row.subfamilies.push(stack.clone());
        row.weights.push(sum.clone());
        return Ok(());
    }
    let need = k - stack.len();
    for i in from..=weights.len() - need {
        let next = sum + &weights[i];
        if next > *limit {
            continue;
        }
        stack.push(i);
        combos(weights, limit, k, i + 1, stack, &next, row, budget)?;
        stack.pop();
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiLevel {
    pub m: usize,
    pub union: Vec<usize>,
    /// `Σ_{m ≤ n < horizon} Σ_{i∈S(n)} Σ_{C∈I_{n,i}} f(diam C)`.
    #[serde(with = "pq")]
    pub weight: BigRational,
    /// `Σ_{n≥m} 4^{-n}·2^n = 2^{-m+1}`.
    #[serde(with = "pq")]
    pub ceiling: BigRational,
    /// The same sum displayed with the other start index, `2^{-m}`.
    #[serde(with = "pq")]
    pub displayed: BigRational,
    pub within_ceiling: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiReport {
    pub horizon: usize,
    pub m_horizon: usize,
    pub points: Vec<usize>,
    pub levels: Vec<PsiLevel>,
    pub verdict: Verdict,
}

/// `⋂_{m<m_horizon} ⋃_{m≤n<horizon} ⋃_{i∈S(n)} ⋃ I_{n,i}` where the horizon
/// is the number of rows of `idx`.
pub fn psi_of_slalom(
    family: &BallFamily,
    idx: &PackedCoverIndex,
    slalom: &[Vec<usize>],
    m_horizon: usize,
) -> Result<PsiReport> {
    let horizon = idx.rows.len();
    if m_horizon == 0 || m_horizon > horizon {
        return invalid(format!("m_horizon must lie in 1..={horizon}, got {m_horizon}"));
    }
    if slalom.len() < horizon {
        return invalid(format!("the slalom has {} levels, the index {horizon}", slalom.len()));
    }
    let mut row_union = Vec::with_capacity(horizon);
    let mut row_weight = Vec::with_capacity(horizon);
    for (n, row) in idx.rows.iter().enumerate() {
        let s = &slalom[n];
        if n < 64 && s.len() as u128 > 1u128 << n {
            return invalid(format!("S({n}) has {} entries, more than 2^{n}", s.len()));
        }
        let (mut mask, mut w) = (0u64, BigRational::zero());
        for &i in s {
            let sub = row.subfamilies.get(i).ok_or_else(|| {
                Error::InvalidInput(format!("S({n}) names entry {i}, but ℐ_{n} has {}", row.subfamilies.len()))
            })?;
            mask |= points_mask(&family.union(sub)?);
            w += &row.weights[i];
        }
        row_union.push(mask);
        row_weight.push(w);
    }
    let mut levels = Vec::new();
    let mut total = u64::MAX;
    for m in 0..m_horizon {
        let union = row_union[m..].iter().fold(0, |a, b| a | b);
        let weight = row_weight[m..].iter().fold(BigRational::zero(), |a, b| a + b);
        let ceiling = pow2(1 - m as i64);
        levels.push(PsiLevel {
            m,
            union: mask_points(union),
            within_ceiling: weight <= ceiling,
            weight,
            ceiling,
            displayed: pow2(-(m as i64)),
        });
        total &= union;
    }
    let verdict = Verdict::from_bool(levels.iter().all(|l| l.within_ceiling));
    Ok(PsiReport { horizon, m_horizon, points: mask_points(total), levels, verdict })
}

/// Minimal cuts `k(n)` with `Σ_{i≥k(n)} w_i + remainder ≤ 4^{-n}` for
/// `n < horizon`, where `remainder` bounds the weight beyond the listed
/// terms. Minimal cuts are nondecreasing since `4^{-n}` decreases.
pub fn tail_cuts(weights: &[BigRational], remainder: &BigRational, horizon: usize) -> Result<Vec<usize>> {
    let mut tails = vec![remainder.clone(); weights.len() + 1];
    for i in (0..weights.len()).rev() {
        tails[i] = &tails[i + 1] + &weights[i];
    }
    let mut cuts = Vec::with_capacity(horizon);
    let mut k = 0;
    for n in 0..horizon {
        let limit = pow2(-2 * n as i64);
        while k < tails.len() && tails[k] > limit {
            k += 1;
        }
        if k == tails.len() {
            return Err(Error::Horizon(format!("the remainder {remainder} exceeds 4^-{n}")));
        }
        cuts.push(k);
    }
    Ok(cuts)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiBlock {
    pub n: usize,
    pub start: usize,
    pub end: usize,
    /// The block as a set of ball indices.
    pub balls: Vec<usize>,
    #[serde(with = "pq")]
    pub weight: BigRational,
    pub index: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiReport {
    /// Flattened cover sequence `C_i` as ball indices.
    pub sequence: Vec<usize>,
    #[serde(with = "pq")]
    pub total: BigRational,
    /// `k(0..=horizon)`; the last cut closes the finite sequence.
    pub cuts: Vec<usize>,
    pub blocks: Vec<PhiBlock>,
    pub phi: Vec<usize>,
}

/// `φ(A)`: flattens per-`n` covers of `A` (each of weight at most `2^{-n}`,
/// total at most 1), cuts the sequence at the minimal `k(n)`, and looks each
/// block up in `ℐ_n`.
pub fn phi_of_null_set(
    family: &BallFamily,
    f: &GaugeFn,
    a: &[usize],
    covers: &[Vec<usize>],
    idx: &PackedCoverIndex,
) -> Result<PhiReport> {
    let weights = family.weights(f)?;
    let target = points_mask(a);
    let mut sequence = Vec::new();
    let mut total = BigRational::zero();
    for (n, cover) in covers.iter().enumerate() {
        let mut w = BigRational::zero();
        for &i in cover {
            w += weights.get(i).ok_or_else(|| Error::InvalidInput(format!("cover {n} names missing ball {i}")))?;
        }
        if w > pow2(-(n as i64)) {
            return invalid(format!("cover {n} has weight {w} > 2^-{n}"));
        }
        let covered = points_mask(&family.union(cover)?);
        if covered & target != target {
            return invalid(format!("cover {n} misses points of A"));
        }
        total += w;
        sequence.extend_from_slice(cover);
    }
    if total > BigRational::one() {
        return invalid(format!("the flattened covers weigh {total} > 1"));
    }
    let horizon = idx.rows.len();
    let seq_weights: Vec<BigRational> = sequence.iter().map(|&i| weights[i].clone()).collect();
    let mut cuts = tail_cuts(&seq_weights, &BigRational::zero(), horizon)?;
    cuts.push(sequence.len());
    let mut blocks = Vec::new();
    for n in 0..horizon {
        let (start, end) = (cuts[n], cuts[n + 1]);
        let balls: Vec<usize> = sequence[start..end].iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let weight = balls.iter().fold(BigRational::zero(), |acc, &i| acc + &weights[i]);
        let index = idx.rows[n].position(&balls).ok_or_else(|| {
            Error::Materialization(format!(
                "block {n} = {balls:?} (weight {weight}) is not enumerated in ℐ_{n} (size cap {})",
                idx.rows[n].size_cap
            ))
        })?;
        blocks.push(PhiBlock { n, start, end, balls, weight, index });
    }
    let phi = blocks.iter().map(|b| b.index).collect();
    Ok(PhiReport { sequence, total, cuts, blocks, phi })
}

#[derive(Clone, Debug, Serialize)]
pub struct MorphismReport {
    /// `φ(A)(n) ∈ S(n)` for `window_start ≤ n < horizon`.
    pub captured: bool,
    pub window_start: Option<usize>,
    pub psi: Vec<usize>,
    pub escaping: Vec<usize>,
    pub verdict: Verdict,
}

/// `φ(A) ∈* S ⇒ A ⊆ ψ(S)` at finite depth: `∈*` means capture from some
/// `n ≤ window` on, and `ψ` is evaluated to `m_horizon`.
pub fn morphism_verify(
    family: &BallFamily,
    idx: &PackedCoverIndex,
    a: &[usize],
    phi: &[usize],
    slalom: &[Vec<usize>],
    window: usize,
    m_horizon: usize,
) -> Result<MorphismReport> {
    let horizon = idx.rows.len();
    if phi.len() < horizon || slalom.len() < horizon {
        return invalid("φ(A) and S must cover the index horizon");
    }
    let mut start = horizon;
    while start > 0 && slalom[start - 1].contains(&phi[start - 1]) {
        start -= 1;
    }
    let captured = horizon > 0 && start < horizon && start <= window;
    let psi = psi_of_slalom(family, idx, slalom, m_horizon)?;
    let inside = points_mask(&psi.points);
    let escaping: Vec<usize> = a.iter().copied().filter(|&p| inside >> p & 1 == 0).collect();
    let verdict = Verdict::from_bool(!captured || escaping.is_empty());
    Ok(MorphismReport {
        captured,
        window_start: (start < horizon).then_some(start),
        psi: psi.points,
        escaping,
        verdict,
    })
}

/// A seeded instance: space, gauge, family, index, `A`, covers and a slalom
/// that captures `φ(A)` from `n = 1` on.
#[derive(Clone, Debug, Serialize)]
pub struct MorphismInstance {
    pub seed: u64,
    pub points: usize,
    pub a: Vec<usize>,
    pub covers: Vec<Vec<usize>>,
    pub phi: Vec<usize>,
    pub slalom: Vec<Vec<usize>>,
    pub report: MorphismReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct MorphismTrials {
    pub seeds: u64,
    pub max_points: usize,
    pub horizon: usize,
    pub captured: u64,
    pub vacuous: u64,
    pub failures: Vec<u64>,
    pub verdict: Verdict,
}

pub const TRIAL_HORIZON: usize = 3;
const TRIAL_COVERS: usize = 2 * TRIAL_HORIZON;
const TRIAL_SIZE_CAP: usize = 6;

/// Builds and checks one random instance on at most `max_points` points.
pub fn morphism_instance(seed: u64, max_points: usize) -> Result<MorphismInstance> {
    if !(2..=8).contains(&max_points) {
        return invalid("random instances use between 2 and 8 points");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = rng.gen_range(2..=max_points);
    let x = if rng.gen_bool(0.5) {
        let mut pts: BTreeSet<Vec<i64>> = BTreeSet::new();
        while pts.len() < size {
            pts.insert(vec![rng.gen_range(0..4), rng.gen_range(0..4)]);
        }
        FiniteMetricSpace::taxicab(&pts.into_iter().collect::<Vec<_>>())?
    } else {
        let mut words: BTreeSet<Vec<u8>> = BTreeSet::new();
        while words.len() < size {
            words.insert((0..4).map(|_| rng.gen_range(0..2)).collect());
        }
        FiniteMetricSpace::from_words(&words.into_iter().collect::<Vec<_>>())?
    };
    let min_d = (0..size)
        .flat_map(|i| (0..size).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| x.d(i, j).clone())
        .min()
        .expect("two points");
    let small = &min_d / int(2);
    let big = [ratio(3, 2), int(2), int(3)].choose(&mut rng).expect("nonempty").clone() * &min_d;
    let family = BallFamily::new(&x, &[small.clone(), big.clone()])?;
    let f = GaugeFn::linear(ratio(1, 16) / &min_d)?;
    let weights = family.weights(&f)?;
    let idx = PackedCoverIndex::build(&family, &f, TRIAL_HORIZON, TRIAL_SIZE_CAP, DEFAULT_ROW_BUDGET)?;

    let mut a: Vec<usize> = (0..size).collect();
    a.shuffle(&mut rng);
    a.truncate(rng.gen_range(0..=size.min(3)));
    a.sort();
    // Ball index of `B(c, q_k)` is `2c + k` (radii are sorted, small first).
    let mut covers = Vec::new();
    for n in 0..TRIAL_COVERS {
        let budget = pow2(-(n as i64) - 1);
        let mut spent = BigRational::zero();
        let mut cover = BTreeSet::new();
        for &p in &a {
            let wide = 2 * p + 1;
            if rng.gen_bool(0.5) && &spent + &weights[wide] <= budget {
                spent += &weights[wide];
                cover.insert(wide);
            } else {
                cover.insert(2 * p);
            }
        }
        covers.push(cover.into_iter().collect());
    }
    let phi = phi_of_null_set(&family, &f, &a, &covers, &idx)?.phi;
    let mut slalom = Vec::new();
    for (n, row) in idx.rows.iter().enumerate() {
        let mut s: BTreeSet<usize> = BTreeSet::new();
        if n >= 1 {
            s.insert(phi[n]);
        }
        while s.len() < 1 << n && s.len() < row.subfamilies.len() && rng.gen_bool(0.5) {
            s.insert(rng.gen_range(0..row.subfamilies.len()));
        }
        slalom.push(s.into_iter().collect());
    }
    let report = morphism_verify(&family, &idx, &a, &phi, &slalom, 1, TRIAL_HORIZON)?;
    Ok(MorphismInstance { seed, points: size, a, covers, phi, slalom, report })
}

pub fn morphism_trials(seeds: u64, max_points: usize) -> Result<MorphismTrials> {
    let (mut captured, mut vacuous, mut failures) = (0, 0, Vec::new());
    for seed in 0..seeds {
        let inst = morphism_instance(seed, max_points)?;
        if inst.report.captured {
            captured += 1;
        } else {
            vacuous += 1;
        }
        if !inst.report.verdict.is_pass() {
            failures.push(seed);
        }
    }
    Ok(MorphismTrials {
        seeds,
        max_points,
        horizon: TRIAL_HORIZON,
        captured,
        vacuous,
        verdict: Verdict::from_bool(failures.is_empty()),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::build_preset;
    use proptest::prelude::*;

    fn line(ps: &[i64]) -> FiniteMetricSpace {
        FiniteMetricSpace::collinear(&ps.iter().map(|&p| int(p)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn metric_axioms_are_enforced() {
        let bad = vec![vec![int(0), int(1), int(5)], vec![int(1), int(0), int(1)], vec![int(5), int(1), int(0)]];
        assert!(FiniteMetricSpace::new(bad).is_err());
        let asym = vec![vec![int(0), int(1)], vec![int(2), int(0)]];
        assert!(FiniteMetricSpace::new(asym).is_err());
        let x = line(&[0, 1, 2]);
        assert_eq!(x.ultrametric_violation(), Some([0, 1, 2]));
        let back = FiniteMetricSpace::from_json(&x.to_json().unwrap()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn collinear_ball_witness() {
        let x = line(&[0, 1, 2]);
        let grid = [ratio(1, 2), int(1), int(2), int(3)];
        let fam = BallFamily::new(&x, &grid).unwrap();
        let a = points_mask(&[0, 2]);
        let bound = ratio(1, 2) + int(4);
        let found = fam.balls.iter().any(|b| points_mask(&b.members) & a == a && b.diameter <= bound);
        assert!(found);
        let r = build_ball_family(&x, &grid).unwrap();
        assert_eq!(r.factor, 2);
        assert_eq!(r.verdict, Verdict::Pass);

        let coarse = build_ball_family(&x, &[int(1)]).unwrap();
        assert_eq!(coarse.verdict, Verdict::Fail);
        assert_eq!(coarse.failures[0].subset, vec![0, 1]);
        assert_eq!(coarse.failures[0].best, None);
    }

    #[test]
    fn ultrametric_ball_witness() {
        let words: Vec<Vec<u8>> =
            [[0, 0, 0], [0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]].iter().map(|w| w.to_vec()).collect();
        let x = FiniteMetricSpace::from_words(&words).unwrap();
        assert!(x.is_ultrametric());
        let grid = x.fine_radius_grid(&ratio(1, 64));
        let r = build_ball_family(&x, &grid).unwrap();
        assert_eq!(r.factor, 1);
        assert_eq!(r.verdict, Verdict::Pass);
        // Oracle: for each A, the ball at a point of A with radius diam(A) + 1/64.
        let diam = x.diameters_by_mask().unwrap();
        for a in 1u64..1 << 6 {
            let p = a.trailing_zeros() as usize;
            let ball = x.ball(p, &(&diam[a as usize] + ratio(1, 64)));
            assert_eq!(points_mask(&ball) & a, a);
            assert!(x.diameter(&ball) <= diam[a as usize]);
        }
    }

    #[test]
    fn assumption_star_cases() {
        let x = line(&[0, 1, 3, 4, 7]);
        let f = GaugeFn::linear(int(1)).unwrap();
        let fam = BallFamily::new(&x, &x.fine_radius_grid(&ratio(1, 16))).unwrap();
        let eps = [ratio(1, 2), ratio(1, 4), ratio(1, 8)];
        let r = check_assumption_star(&x, &f, &fam, &int(3), &eps, None).unwrap();
        assert_eq!(r.subsets, 31);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(check_assumption_star(&x, &f, &fam, &int(1), &eps, None).is_err());

        let x = line(&[0, 1, 2]);
        let jump = GaugeFn::jump(int(1), ratio(1, 1000), int(1)).unwrap();
        let coarse = BallFamily::new(&x, &[ratio(1, 4), int(3)]).unwrap();
        let r = check_assumption_star(&x, &jump, &coarse, &int(3), &[ratio(1, 2)], None).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let w = &r.failures[0];
        assert_eq!(w.subset, vec![0, 1]);
        assert_eq!(w.best, Some(int(1)));
    }

    #[test]
    fn gauge_interpolation() {
        let g = GaugeFn::jump(int(1), ratio(1, 2), int(2)).unwrap();
        assert_eq!(g.eval(&ratio(1, 2)).unwrap(), int(0));
        assert_eq!(g.eval(&ratio(5, 4)).unwrap(), int(1));
        assert_eq!(g.eval(&int(9)).unwrap(), int(2));
        let lin = GaugeFn::linear(ratio(1, 3)).unwrap();
        assert_eq!(lin.eval(&int(6)).unwrap(), int(2));
        assert!(GaugeFn::new(vec![(int(0), int(1))], Extension::Constant).is_err());
        assert!(GaugeFn::new(vec![(int(0), int(0)), (int(1), int(2)), (int(2), int(1))], Extension::Constant).is_err());
    }

    #[test]
    fn doubling_cases() {
        let grid: Vec<_> = (0..6).map(|k| pow2(-k)).collect();
        let r = doubling_check(&GaugeFn::linear(int(1)).unwrap(), &int(3), &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(!r.degenerate);

        let zero = GaugeFn::new(vec![(int(0), int(0)), (int(1), int(0))], Extension::Constant).unwrap();
        let r = doubling_check(&zero, &int(3), &grid).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.verdict, Verdict::Fail);

        let s = build_preset("faithful-small").unwrap();
        let r = h_doubling_check(&s, &int(1000), 3).unwrap();
        let ratios = r.level_ratios.as_ref().unwrap();
        assert_eq!(ratios[0].ratio, Quantity::from_u64(4));
        assert_eq!(ratios[1].ratio, Quantity::from_u64(168));
        assert!(ratios[0].via_gauge && ratios[1].via_gauge);
        assert!(ratios[0].below_r && ratios[1].below_r && !ratios[2].below_r);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.rows[0].f_2x, int(1));
        assert_eq!(r.rows[0].f_x, ratio(1, 4));

        let h = GaugeFn::from_schedule(&s, 2).unwrap();
        let r = doubling_check(&h, &int(5), &[ratio(1, 2)]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let r = doubling_check(&h, &int(5), &[ratio(1, 4)]).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn rho_is_not_ultrametric() {
        let s = build_preset("toy-c5").unwrap();
        let space = Space::new(&s, 2).unwrap();
        let (x, pts) = FiniteMetricSpace::from_rho(&space, 2).unwrap();
        let [a, b, c] = x.ultrametric_violation().unwrap();
        assert!(x.d(a, c) > x.d(a, b).max(x.d(b, c)));
        assert_eq!(space.rho(&pts[a], &pts[c]).unwrap(), x.d(a, c).clone());
    }

    #[test]
    fn in_rows() {
        let w = [ratio(1, 8), ratio(1, 8), ratio(1, 4)];
        let row = enumerate_row(&w, 1, 3, 100).unwrap();
        assert_eq!(row.subfamilies, vec![vec![], vec![0], vec![1], vec![2], vec![0, 1]]);
        assert_eq!(row.weights[4], ratio(1, 4));
        // Brute-force oracle over all 8 subsets.
        let brute = (0u32..8)
            .filter(|m| (0..3).filter(|i| m >> i & 1 == 1).fold(BigRational::zero(), |a, i| a + &w[i]) <= ratio(1, 4))
            .count();
        assert_eq!(brute, row.subfamilies.len());

        assert_eq!(enumerate_row(&w, 3, 3, 100).unwrap().subfamilies, vec![Vec::<usize>::new()]);
        let zero = enumerate_row(&[int(0)], 7, 1, 100).unwrap();
        assert_eq!(zero.subfamilies, vec![vec![], vec![0]]);
        assert!(matches!(enumerate_row(&vec![int(0); 10], 0, 10, 50), Err(Error::BudgetExhausted(_))));
    }

    #[test]
    fn tail_cut_geometric() {
        // Weights 2^{-i-3} with the remainder 2^{-L-2} beyond L listed terms.
        let len = 40;
        let w: Vec<_> = (0..len).map(|i| pow2(-(i as i64) - 3)).collect();
        let cuts = tail_cuts(&w, &pow2(-(len as i64) - 2), 10).unwrap();
        let expect: Vec<usize> = (0..10).map(|n: usize| (2 * n).saturating_sub(2)).collect();
        assert_eq!(cuts, expect);
        assert!(matches!(tail_cuts(&w[..4], &pow2(-6), 5), Err(Error::Horizon(_))));
        assert_eq!(tail_cuts(&[int(0), int(0)], &int(0), 3).unwrap(), vec![0, 0, 0]);
    }

    fn two_points() -> (FiniteMetricSpace, BallFamily, GaugeFn, PackedCoverIndex) {
        let x = line(&[0, 1]);
        let fam = BallFamily::new(&x, &[ratio(1, 2), int(2)]).unwrap();
        let f = GaugeFn::linear(ratio(1, 8)).unwrap();
        let idx = PackedCoverIndex::build(&fam, &f, 3, 4, 1000).unwrap();
        (x, fam, f, idx)
    }

    #[test]
    fn psi_and_phi() {
        let (_, fam, f, idx) = two_points();
        // Balls: 0 = {0}, 1 = {0,1}, 2 = {1}, 3 = {0,1}.
        assert_eq!(fam.balls[1].members, vec![0, 1]);
        let empty = psi_of_slalom(&fam, &idx, &[vec![], vec![], vec![]], 3).unwrap();
        assert!(empty.points.is_empty());
        assert_eq!(empty.levels[2].ceiling, ratio(1, 2));
        assert_eq!(empty.levels[2].displayed, ratio(1, 4));
        let single = psi_of_slalom(&fam, &idx, &[vec![1], vec![], vec![]], 1).unwrap();
        assert_eq!(single.points, fam.union(&idx.rows[0].subfamilies[1]).unwrap());
        assert!(psi_of_slalom(&fam, &idx, &[vec![99], vec![], vec![]], 1).is_err());
        assert!(psi_of_slalom(&fam, &idx, &[vec![0, 1], vec![], vec![]], 1).is_err());

        let none = phi_of_null_set(&fam, &f, &[], &[vec![], vec![]], &idx).unwrap();
        assert_eq!(none.cuts, vec![0, 0, 0, 0]);
        assert_eq!(none.phi, vec![0, 0, 0]);

        let covers = vec![vec![0, 2]; 4];
        let r = phi_of_null_set(&fam, &f, &[0, 1], &covers, &idx).unwrap();
        assert_eq!(&r.cuts[..3], &[0, 0, 0]);
        assert_eq!(r.blocks[2].balls, vec![0, 2]);
        let slalom: Vec<Vec<usize>> = r.phi.iter().map(|&i| vec![i]).collect();
        let m = morphism_verify(&fam, &idx, &[0, 1], &r.phi, &slalom, 0, 3).unwrap();
        assert!(m.captured);
        assert_eq!(m.verdict, Verdict::Pass);

        assert!(phi_of_null_set(&fam, &f, &[0, 1], &[vec![0]], &idx).is_err());
        let tiny = PackedCoverIndex::build(&fam, &f, 3, 1, 1000).unwrap();
        assert!(matches!(phi_of_null_set(&fam, &f, &[0, 1], &covers, &tiny), Err(Error::Materialization(_))));
    }

    #[test]
    fn disjoint_slalom_is_vacuous() {
        let (_, fam, f, idx) = two_points();
        let r = phi_of_null_set(&fam, &f, &[0, 1], &vec![vec![0, 2]; 4], &idx).unwrap();
        let other: Vec<Vec<usize>> =
            r.phi.iter().zip(&idx.rows).map(|(&i, row)| vec![(i + 1) % row.subfamilies.len()]).collect();
        let m = morphism_verify(&fam, &idx, &[0, 1], &r.phi, &other, 0, 3).unwrap();
        assert!(!m.captured);
        assert_eq!(m.verdict, Verdict::Pass);
    }

    #[test]
    fn wrong_row_table_is_caught() {
        let (_, fam, f, idx) = two_points();
        let r = phi_of_null_set(&fam, &f, &[0, 1], &vec![vec![0, 2]; 4], &idx).unwrap();
        let slalom: Vec<Vec<usize>> = r.phi.iter().map(|&i| vec![i]).collect();
        let mut bad = idx.clone();
        for row in &mut bad.rows {
            row.subfamilies.rotate_left(1);
            row.weights.rotate_left(1);
        }
        let m = morphism_verify(&fam, &bad, &[0, 1], &r.phi, &slalom, 0, 3).unwrap();
        assert!(m.captured);
        assert_eq!(m.verdict, Verdict::Fail);
        assert!(!m.escaping.is_empty());
    }

    #[test]
    fn seeded_trials() {
        let t = morphism_trials(100, 8).unwrap();
        assert_eq!(t.verdict, Verdict::Pass, "{:?}", t.failures);
        assert!(t.captured > 50);
    }

    fn small_space() -> impl Strategy<Value = FiniteMetricSpace> {
        prop::collection::btree_set((0i64..5, 0i64..5), 2..=6).prop_map(|pts| {
            FiniteMetricSpace::taxicab(&pts.into_iter().map(|(a, b)| vec![a, b]).collect::<Vec<_>>()).unwrap()
        })
    }

    fn small_ultrametric() -> impl Strategy<Value = FiniteMetricSpace> {
        prop::collection::btree_set(prop::collection::vec(0u8..2, 4), 2..=6)
            .prop_map(|w| FiniteMetricSpace::from_words(&w.into_iter().collect::<Vec<_>>()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn star_holds_with_alpha_three(x in small_space()) {
            let eps = [ratio(1, 2), ratio(1, 8)];
            let grid = x.fine_radius_grid(&ratio(1, 16));
            prop_assert_eq!(build_ball_family(&x, &grid).unwrap().verdict, Verdict::Pass);
            let fam = BallFamily::new(&x, &grid).unwrap();
            let r = check_assumption_star(&x, &GaugeFn::linear(int(1)).unwrap(), &fam, &int(3), &eps, None).unwrap();
            prop_assert_eq!(r.verdict, Verdict::Pass);
        }

        #[test]
        fn star_holds_near_one_on_ultrametrics(x in small_ultrametric()) {
            let eps = [ratio(1, 64)];
            let grid = x.fine_radius_grid(&ratio(1, 128));
            let report = build_ball_family(&x, &grid).unwrap();
            prop_assert_eq!(report.factor, 1);
            prop_assert_eq!(report.verdict, Verdict::Pass);
            let r = check_assumption_star(&x, &GaugeFn::linear(int(1)).unwrap(), &report.family, &ratio(101, 100), &eps, None).unwrap();
            prop_assert_eq!(r.verdict, Verdict::Pass);
        }

        #[test]
        fn psi_weight_ceiling(m in 0usize..3, picks in prop::collection::vec(0usize..8, 3)) {
            let (_, fam, _, idx) = two_points();
            let slalom: Vec<Vec<usize>> = idx.rows.iter().zip(&picks).enumerate()
                .map(|(n, (row, &p))| if n == 0 { vec![p % row.subfamilies.len()] } else { vec![0, p % row.subfamilies.len()] }.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
                .collect();
            let r = psi_of_slalom(&fam, &idx, &slalom, 3).unwrap();
            prop_assert_eq!(&r.levels[m].ceiling, &pow2(1 - m as i64));
            prop_assert!(r.levels[m].within_ceiling);
        }
    }
}
