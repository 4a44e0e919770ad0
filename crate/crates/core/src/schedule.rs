//! The growth schedule `M_0 = 1`, `N_n = |G_n|`, `M_{n+1} = 2·N_n`, and the
//! gauge `h` with `h(2^{-n}) = 1/(M_0···M_n)`, linear in between.
//!
//! Products of the `M_n` are kept as [`Monomial`]s in the level sizes, so
//! identities such as `N_0···N_{n−1}/(M_0···M_n) = 2^{−n}` stay exact even
//! when the `N_n` themselves are only known as magnitudes.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::{from_biguint, pow2, to_pq};
use crate::graphs::io::GraphFile;
use crate::graphs::{certify, generate_kneser_graph, CertifyConfig, Graph, KneserGraph, DEFAULT_MATERIALIZATION_CAP};
use crate::magnitude::Quantity;
use crate::Verdict;

pub const DEFAULT_HORIZON: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Every materialized level must carry a passing certificate for `M_n`.
    Faithful,
    /// Levels are taken as given; all outputs are flagged unverified.
    Toy,
}

/// How one level graph is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelSpec {
    Kneser {
        m: u64,
        k: u64,
    },
    Cycle {
        n: usize,
    },
    Complete {
        n: usize,
    },
    Graph {
        graph: Box<GraphFile>,
    },
    /// A size with no graph behind it (toy mode only).
    Size {
        size: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelSource {
    Materialized,
    /// `K(m, k)` too large to build; properties follow from its structure.
    SymbolicKneser {
        m: Quantity,
        k: Quantity,
    },
    Size,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelStatus {
    Certified,
    /// `K(m,k)` with `m−2k+2 > M_n` and `m ≤ 4k`: chromatic number, `chi_f = m/k`
    /// and star families give the three properties.
    KneserStructure,
    Unverified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub index: usize,
    #[serde(rename = "M")]
    pub m: Quantity,
    #[serde(rename = "N")]
    pub n: Quantity,
    pub source: LevelSource,
    pub status: LevelStatus,
    #[serde(skip)]
    pub graph: Option<Graph>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub mode: Mode,
    pub levels: Vec<Level>,
    pub specs: Vec<LevelSpec>,
}

/// `coeff · ∏ N_k^{e_k}` over level sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: BigRational,
    pub exps: BTreeMap<usize, i64>,
}

impl Monomial {
    pub fn constant(c: BigRational) -> Self {
        Monomial { coeff: c, exps: BTreeMap::new() }
    }

    pub fn size(k: usize) -> Self {
        Monomial { coeff: BigRational::one(), exps: BTreeMap::from([(k, 1)]) }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps.clone();
        for (&k, &e) in &other.exps {
            *exps.entry(k).or_insert(0) += e;
        }
        exps.retain(|_, e| *e != 0);
        Monomial { coeff: &self.coeff * &other.coeff, exps }
    }

    pub fn recip(&self) -> Monomial {
        Monomial { coeff: self.coeff.recip(), exps: self.exps.iter().map(|(&k, &e)| (k, -e)).collect() }
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.mul(&other.recip())
    }

    /// `N_a···N_{b−1}`.
    pub fn size_product(a: usize, b: usize) -> Monomial {
        (a..b).fold(Monomial::constant(BigRational::one()), |acc, k| acc.mul(&Monomial::size(k)))
    }

    /// `M_0···M_n = 2^n · N_0···N_{n−1}`.
    pub fn m_product(n: usize) -> Monomial {
        Monomial::constant(pow2(n as i64)).mul(&Monomial::size_product(0, n))
    }

    /// `M_0···M_{n−1}`, the empty product for `n = 0`.
    pub fn m_product_below(n: usize) -> Monomial {
        if n == 0 {
            Monomial::constant(BigRational::one())
        } else {
            Monomial::m_product(n - 1)
        }
    }

    pub fn is_constant(&self) -> bool {
        self.exps.is_empty()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", to_pq(&self.coeff))?;
        for (k, e) in &self.exps {
            if *e == 1 {
                write!(f, "·N_{k}")?;
            } else {
                write!(f, "·N_{k}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A monomial evaluated against a schedule: exact when every size it uses is
/// exact, always as a numerator/denominator pair of quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonomialValue {
    pub formula: String,
    #[serde(with = "crate::exact::pq_opt")]
    pub exact: Option<BigRational>,
    /// Bounds on `log2` of the value when representable.
    pub log2: Option<(String, String)>,
    #[serde(skip)]
    pub num: Quantity,
    #[serde(skip)]
    pub den: Quantity,
}

fn split_rational(q: &BigRational) -> (Quantity, Quantity) {
    let num = q.numer().abs().to_biguint().expect("nonnegative");
    let den = q.denom().to_biguint().expect("positive");
    (Quantity::exact(num), Quantity::exact(den))
}

impl Schedule {
    /// Builds levels `0..=horizon`. Specs fill the leading levels; in faithful
    /// mode the remaining levels are symbolic `K(3k, k)` with `k = M_n − 1`.
    pub fn build(mode: Mode, specs: &[LevelSpec], horizon: usize, config: &CertifyConfig) -> Result<Schedule> {
        if specs.is_empty() {
            return invalid("at least one level spec is required");
        }
        if mode == Mode::Toy && horizon + 1 > specs.len() {
            return invalid(format!(
                "toy schedules need a spec for every level; got {} for horizon {horizon}",
                specs.len()
            ));
        }
        let mut levels: Vec<Level> = Vec::with_capacity(horizon + 1);
        let mut m = Quantity::from_u64(1);
        for index in 0..=horizon {
            let level = match specs.get(index) {
                Some(spec) => materialize(mode, spec, index, &m, config)?,
                None => symbolic_tail(index, &m),
            };
            m = level.n.mul(&Quantity::from_u64(2));
            levels.push(level);
        }
        Ok(Schedule { mode, levels, specs: specs.to_vec() })
    }

    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    /// `M_n` for `n ≤ horizon + 1`.
    pub fn m(&self, n: usize) -> Option<Quantity> {
        match n {
            0 => Some(Quantity::from_u64(1)),
            _ if n <= self.levels.len() => Some(self.levels[n - 1].n.mul(&Quantity::from_u64(2))),
            _ => None,
        }
    }

    pub fn n(&self, n: usize) -> Option<&Quantity> {
        self.levels.get(n).map(|l| &l.n)
    }

    pub fn graph(&self, n: usize) -> Option<&Graph> {
        self.levels.get(n).and_then(|l| l.graph.as_ref())
    }

    /// Number of leading levels with a graph.
    pub fn materialized_depth(&self) -> usize {
        self.levels.iter().take_while(|l| l.graph.is_some()).count()
    }

    pub fn is_toy(&self) -> bool {
        self.mode == Mode::Toy
    }

    /// Exact `M_n` when it is a machine-size integer.
    pub fn m_usize(&self, n: usize) -> Option<usize> {
        self.m(n)?.as_exact()?.to_usize()
    }

    pub fn eval(&self, mono: &Monomial) -> Result<MonomialValue> {
        let (mut num, mut den) = split_rational(&mono.coeff);
        let mut exact = Some(mono.coeff.clone());
        for (&k, &e) in &mono.exps {
            let size = self.n(k).ok_or_else(|| {
                Error::Horizon(format!("level {k} is beyond the schedule horizon {}", self.horizon()))
            })?;
            let power = size.pow(&Quantity::from_u64(e.unsigned_abs()));
            if e > 0 {
                num = num.mul(&power);
            } else {
                den = den.mul(&power);
            }
            exact = match (exact, &power) {
                (Some(x), Quantity::Exact(p)) => {
                    let p = from_biguint(p);
                    Some(if e > 0 { x * p } else { x / p })
                }
                _ => None,
            };
        }
        if mono.coeff.is_zero() {
            exact = Some(BigRational::zero());
        }
        let log2 = match (num.log2_bounds(), den.log2_bounds()) {
            (Some((a, b)), Some((c, d))) => Some(((a - d).to_string(), (b - c).to_string())),
            _ => None,
        };
        Ok(MonomialValue { formula: mono.to_string(), exact, log2, num, den })
    }

    /// Sign of `log(value)`: compares the monomial with 1.
    pub fn cmp_one(&self, mono: &Monomial) -> Result<Ordering> {
        let v = self.eval(mono)?;
        match v.exact {
            Some(x) => Ok(x.cmp(&BigRational::one())),
            None => v.num.try_cmp(&v.den),
        }
    }

    /// `h(2^{-n}) = 1/(M_0···M_n)` as a monomial.
    pub fn gauge_grid_monomial(n: usize) -> Monomial {
        Monomial::m_product(n).recip()
    }

    /// Exact `h(2^{-n})` for `n ≤ horizon + 1`.
    pub fn gauge_at_level(&self, n: usize) -> Result<BigRational> {
        if n > self.levels.len() {
            return Err(Error::Horizon(format!("h(2^-{n}) needs M_{n}; horizon is {}", self.horizon())));
        }
        self.eval(&Self::gauge_grid_monomial(n))?
            .exact
            .ok_or_else(|| Error::Horizon(format!("h(2^-{n}) involves symbolic level sizes")))
    }

    /// The gauge `h(t)` for `t ≥ 0`; `t ≥ 1` uses the constant extension `h(1)`.
    pub fn gauge_eval(&self, t: &BigRational) -> Result<BigRational> {
        if t.is_negative() {
            return invalid("gauge argument must be nonnegative");
        }
        if t.is_zero() {
            return Ok(BigRational::zero());
        }
        if *t >= BigRational::one() {
            return self.gauge_at_level(0);
        }
        let n = floor_log2_recip(t);
        let hi = self.gauge_at_level(n)?;
        let lo = self.gauge_at_level(n + 1)?;
        let (a, b) = (pow2(-(n as i64) - 1), pow2(-(n as i64)));
        Ok(&lo + (t - &a) * (hi - &lo) / (b - a))
    }

    pub fn ratio_diagnostics(&self, n_max: usize) -> Result<RatioReport> {
        if n_max > self.horizon() {
            return Err(Error::Horizon(format!("n_max {n_max} exceeds horizon {}", self.horizon())));
        }
        let r1 = |n: usize| Monomial::size_product(0, n).div(&Monomial::m_product(n));
        let r2 = |n: usize| Monomial::size_product(0, n + 1).div(&Monomial::m_product(n));
        let half = Monomial::constant(BigRational::new(BigInt::one(), BigInt::from(2)));
        let mut report = RatioReport {
            r1: Vec::new(),
            r2: Vec::new(),
            r1_halving: Verdict::Pass,
            r2_increasing: Verdict::Pass,
            r2_steps: Vec::new(),
            toy: self.is_toy(),
        };
        for n in 1..=n_max {
            report.r1.push(self.eval(&r1(n))?);
            report.r1_halving = report.r1_halving.and(Verdict::from_bool(r1(n).div(&r1(n - 1)) == half));
        }
        for n in 0..=n_max {
            report.r2.push(self.eval(&r2(n))?);
            if n > 0 {
                let step = match self.cmp_one(&r2(n).div(&r2(n - 1))) {
                    Ok(o) => Verdict::from_bool(o == Ordering::Greater),
                    Err(Error::Indeterminate(_)) => Verdict::Indeterminate,
                    Err(e) => return Err(e),
                };
                report.r2_steps.push(step);
                report.r2_increasing = report.r2_increasing.and(step);
            }
        }
        Ok(report)
    }

    /// `N_n ≥ (4/3)·M_n` for every level.
    pub fn size_growth_holds(&self) -> Result<bool> {
        for (n, level) in self.levels.iter().enumerate() {
            let lhs = level.n.mul(&Quantity::from_u64(3));
            let rhs = self.m(n).expect("in range").mul(&Quantity::from_u64(4));
            if lhs.try_cmp(&rhs)? == Ordering::Less {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_file(&self) -> Result<ScheduleFile> {
        let gauge_grid = (0..=self.levels.len())
            .map(|n| match self.gauge_at_level(n) {
                Ok(v) => to_pq(&v),
                Err(_) => Self::gauge_grid_monomial(n).to_string(),
            })
            .collect();
        Ok(ScheduleFile {
            mode: self.mode,
            horizon: self.horizon(),
            specs: self.specs.clone(),
            levels: Some(self.levels.clone()),
            gauge_grid: Some(gauge_grid),
        })
    }
}

/// Largest `n` with `t ≤ 2^{-n}`, for `0 < t < 1`.
fn floor_log2_recip(t: &BigRational) -> usize {
    let (p, q) = (t.numer().clone(), t.denom().clone());
    // q/p ∈ [2^n, 2^{n+1})
    let mut n = (q.bits() as i64 - p.bits() as i64 - 1).max(0) as usize;
    while (&p << (n + 1)) <= q {
        n += 1;
    }
    while n > 0 && (&p << n) > q {
        n -= 1;
    }
    n
}

fn materialize(mode: Mode, spec: &LevelSpec, index: usize, m: &Quantity, config: &CertifyConfig) -> Result<Level> {
    let graph = match spec {
        LevelSpec::Kneser { m: km, k } => match generate_kneser_graph(*km, *k, DEFAULT_MATERIALIZATION_CAP)? {
            KneserGraph::Materialized(g) => Some(g),
            KneserGraph::Symbolic { m: sm, k: sk, vertex_count } => {
                let (mq, kq) = (Quantity::from_u64(sm), Quantity::from_u64(sk));
                let status = kneser_structure(&mq, &kq, m)?;
                if mode == Mode::Faithful && status != LevelStatus::KneserStructure {
                    return Err(Error::Verification(format!(
                        "level {index}: K({sm},{sk}) does not have chromatic number above M_{index} = {m} with chi_f ≤ 4"
                    )));
                }
                return Ok(Level {
                    index,
                    m: m.clone(),
                    n: Quantity::exact(vertex_count),
                    source: LevelSource::SymbolicKneser { m: mq, k: kq },
                    status: if mode == Mode::Toy { LevelStatus::Unverified } else { status },
                    graph: None,
                });
            }
        },
        LevelSpec::Cycle { n } => Some(cycle_checked(*n)?),
        LevelSpec::Complete { n } => {
            if *n == 0 {
                return invalid("complete graph needs a vertex");
            }
            Some(Graph::complete(*n))
        }
        LevelSpec::Graph { graph } => Some(graph.to_graph()?.0),
        LevelSpec::Size { size } => {
            if mode == Mode::Faithful {
                return invalid(format!("level {index}: a bare size cannot be certified in faithful mode"));
            }
            let v: BigUint = size.parse().map_err(|_| Error::InvalidInput(format!("bad level size {size:?}")))?;
            if v.is_zero() {
                return invalid("level sizes are positive");
            }
            return Ok(Level {
                index,
                m: m.clone(),
                n: Quantity::exact(v),
                source: LevelSource::Size,
                status: LevelStatus::Unverified,
                graph: None,
            });
        }
    }
    .expect("graph levels");
    let status = match mode {
        Mode::Toy => LevelStatus::Unverified,
        Mode::Faithful => {
            let target = m.as_exact().and_then(|v| v.to_usize()).ok_or_else(|| {
                Error::InvalidInput(format!("level {index}: M_{index} is too large to certify against"))
            })?;
            let cert = certify(&graph, target, None, config)?;
            if cert.verdict != Verdict::Pass {
                let clause = if cert.partition.verdict() != Verdict::Pass {
                    "partition property (1)"
                } else if cert.weight.as_ref().map(|w| w.verdict) != Some(Verdict::Pass) {
                    "weight property (2)"
                } else {
                    "cover family property (3)"
                };
                return Err(Error::Verification(format!(
                    "level {index}: certificate for n_target = {target} fails the {clause} ({:?})",
                    cert.verdict
                )));
            }
            LevelStatus::Certified
        }
    };
    Ok(Level {
        index,
        m: m.clone(),
        n: Quantity::from_u64(graph.vertex_count() as u64),
        source: LevelSource::Materialized,
        status,
        graph: Some(graph),
    })
}

fn cycle_checked(n: usize) -> Result<Graph> {
    if n < 3 {
        return invalid("cycles need at least 3 vertices");
    }
    Ok(Graph::cycle(n))
}

/// Checks `m − 2k + 2 > M` and `m ≤ 4k`.
fn kneser_structure(m: &Quantity, k: &Quantity, big_m: &Quantity) -> Result<LevelStatus> {
    let (Some(mv), Some(kv)) = (m.as_exact(), k.as_exact()) else {
        return Ok(LevelStatus::KneserStructure);
    };
    let chi = BigInt::from(mv.clone()) - 2 * BigInt::from(kv.clone()) + 2;
    let above = match big_m.as_exact() {
        Some(bm) => chi > BigInt::from(bm.clone()),
        None => false,
    };
    Ok(if above && mv <= &(kv * 4u32) { LevelStatus::KneserStructure } else { LevelStatus::Unverified })
}

/// The faithful tail rule: `K(3k, k)` with the smallest `k` having
/// `k + 2 > M_n`, i.e. `k = M_n − 1`.
fn symbolic_tail(index: usize, m: &Quantity) -> Level {
    let k = match m {
        Quantity::Exact(v) if v > &BigUint::one() => Quantity::exact(v - 1u32),
        Quantity::Exact(_) => Quantity::from_u64(1),
        Quantity::Mag(mag) => {
            // M − 1 ≥ M/2, so each iterated log drops by at most 1
            let mut k = *mag;
            k.lo -= 1.0;
            Quantity::Mag(k)
        }
    };
    let n = Quantity::central_third_binomial(&k);
    let three_k = k.mul(&Quantity::from_u64(3));
    Level {
        index,
        m: m.clone(),
        n,
        source: LevelSource::SymbolicKneser { m: three_k, k },
        status: LevelStatus::KneserStructure,
        graph: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    /// `r1(n) = N_0···N_{n−1}/(M_0···M_n)` for `n = 1..=n_max`.
    pub r1: Vec<MonomialValue>,
    /// `r2(n) = N_0···N_n/(M_0···M_n)` for `n = 0..=n_max`.
    pub r2: Vec<MonomialValue>,
    pub r1_halving: Verdict,
    pub r2_increasing: Verdict,
    pub r2_steps: Vec<Verdict>,
    pub toy: bool,
}

/// Schedule document: the specs are authoritative and the derived fields
/// are informational.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub mode: Mode,
    pub horizon: usize,
    pub specs: Vec<LevelSpec>,
    #[serde(default, skip_deserializing, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<Level>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge_grid: Option<Vec<String>>,
}

impl ScheduleFile {
    pub fn build(&self, config: &CertifyConfig) -> Result<Schedule> {
        Schedule::build(self.mode, &self.specs, self.horizon, config)
    }
}

/// Named schedules used by tests and the CLI.
pub fn preset(name: &str) -> Result<(Mode, Vec<LevelSpec>, usize)> {
    Ok(match name {
        "faithful-small" => {
            (Mode::Faithful, vec![LevelSpec::Kneser { m: 2, k: 1 }, LevelSpec::Kneser { m: 9, k: 3 }], DEFAULT_HORIZON)
        }
        "toy-c5" => (Mode::Toy, vec![LevelSpec::Cycle { n: 5 }, LevelSpec::Cycle { n: 5 }], 1),
        "toy-k2" => (Mode::Toy, vec![LevelSpec::Kneser { m: 2, k: 1 }; 3], 2),
        other => return invalid(format!("unknown preset {other:?} (faithful-small, toy-c5, toy-k2)")),
    })
}

pub fn build_preset(name: &str) -> Result<Schedule> {
    let (mode, specs, horizon) = preset(name)?;
    Schedule::build(mode, &specs, horizon, &CertifyConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{binomial, ratio};
    use proptest::prelude::*;

    fn q(v: u64) -> Quantity {
        Quantity::from_u64(v)
    }

    #[test]
    fn faithful_small_sizes() {
        let s = build_preset("faithful-small").unwrap();
        assert_eq!(s.m(0).unwrap(), q(1));
        assert_eq!(s.m(1).unwrap(), q(4));
        assert_eq!(s.m(2).unwrap(), q(168));
        assert_eq!(s.n(0).unwrap(), &q(2));
        assert_eq!(s.n(1).unwrap(), &q(84));
        assert_eq!(s.n(2).unwrap().as_exact().unwrap(), &binomial(501, 167));
        assert_eq!(s.levels[2].status, LevelStatus::KneserStructure);
        assert_eq!(s.levels[0].status, LevelStatus::Certified);
        assert_eq!(s.materialized_depth(), 2);
        assert!(s.size_growth_holds().unwrap());
    }

    #[test]
    fn toy_c5_sizes() {
        let s = build_preset("toy-c5").unwrap();
        assert_eq!(s.m_usize(1), Some(10));
        assert_eq!(s.m_usize(2), Some(10));
        assert_eq!(s.levels[1].status, LevelStatus::Unverified);
    }

    #[test]
    fn faithful_rejects_uncertifiable_levels() {
        let specs = vec![LevelSpec::Cycle { n: 5 }, LevelSpec::Cycle { n: 5 }];
        let err = Schedule::build(Mode::Faithful, &specs, 1, &CertifyConfig::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("level 1") && msg.contains("partition"), "{msg}");
    }

    #[test]
    fn gauge_examples() {
        let s = build_preset("faithful-small").unwrap();
        assert_eq!(s.gauge_eval(&BigRational::zero()).unwrap(), BigRational::zero());
        assert_eq!(s.gauge_eval(&ratio(1, 2)).unwrap(), ratio(1, 4));
        assert_eq!(s.gauge_eval(&ratio(3, 4)).unwrap(), ratio(5, 8));
        assert_eq!(s.gauge_eval(&ratio(3, 2)).unwrap(), BigRational::one());
        assert_eq!(s.gauge_at_level(2).unwrap(), ratio(1, 672));
        assert!(s.gauge_at_level(3).is_ok());
        assert!(matches!(s.gauge_at_level(4), Err(Error::Horizon(_))));
    }

    #[test]
    fn ratio_identities() {
        let s = build_preset("faithful-small").unwrap();
        let r = s.ratio_diagnostics(16).unwrap();
        for (i, v) in r.r1.iter().enumerate() {
            assert_eq!(v.exact.as_ref().unwrap(), &pow2(-(i as i64) - 1), "r1({})", i + 1);
        }
        assert_eq!(r.r1_halving, Verdict::Pass);
        assert_eq!(r.r2_increasing, Verdict::Pass);
        assert_eq!(r.r2[0].exact.as_ref().unwrap(), &ratio(2, 1));
        assert_eq!(r.r2[1].exact.as_ref().unwrap(), &ratio(42, 1));
        assert!(r.r2[5].exact.is_none());
    }

    #[test]
    fn tail_towers() {
        let s = build_preset("faithful-small").unwrap();
        assert_eq!(s.levels.len(), 17);
        let towers: Vec<u32> = s.levels.iter().map(|l| l.n.magnitude().tower).collect();
        assert!(towers.windows(2).all(|w| w[0] <= w[1]), "{towers:?}");
        assert!(towers[16] >= 10);
    }

    #[test]
    fn floor_log2() {
        assert_eq!(floor_log2_recip(&ratio(1, 2)), 1);
        assert_eq!(floor_log2_recip(&ratio(3, 4)), 0);
        assert_eq!(floor_log2_recip(&ratio(1, 3)), 1);
        assert_eq!(floor_log2_recip(&ratio(1, 4)), 2);
        assert_eq!(floor_log2_recip(&ratio(999, 1000)), 0);
    }

    proptest! {
        #[test]
        fn gauge_is_monotone_and_telescopes(a in 1u64..10_000, b in 1u64..10_000) {
            let s = build_preset("faithful-small").unwrap();
            let (x, y) = (ratio(a.min(b) as i64, 10_000), ratio(a.max(b) as i64, 10_000));
            prop_assume!(x > ratio(1, 8));
            prop_assert!(s.gauge_eval(&x).unwrap() <= s.gauge_eval(&y).unwrap());
            for n in 0..3usize {
                let mono = Monomial::m_product(n + 1);
                let prod = s.eval(&mono).unwrap().exact.unwrap();
                prop_assert_eq!(s.gauge_at_level(n + 1).unwrap() * prod, BigRational::one());
            }
        }
    }
}
