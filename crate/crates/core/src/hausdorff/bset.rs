//! Bounds for the sections of `B = {(x, y) : ∃^∞ n  y(n) ∈ H(x(n))}`.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::witness::{geometric_tail, group_weight};
use super::{GroupKind, NullWitness, Semantics, WitnessGroup};
use crate::error::{invalid, Error, Result};
use crate::exact::{pq, pq_opt, ratio};
use crate::graphs::{build_cover_family, check_cover_family, CoverFamily, CoverStrategy, Provenance};
use crate::schedule::{Mode, Schedule};
use crate::Verdict;

/// Cover families for every materialized level, built with the default
/// strategy for each graph's provenance and checked.
pub fn level_cover_families(s: &Schedule) -> Result<Vec<CoverFamily>> {
    (0..s.materialized_depth())
        .map(|n| {
            let g = s.graph(n).expect("materialized");
            let strategy = match g.provenance() {
                Provenance::Kneser { .. } => CoverStrategy::StarBalanced,
                _ => CoverStrategy::Randomized,
            };
            build_cover_family(g, strategy, n as u64, 200, None)
        })
        .collect()
}

fn check_families(s: &Schedule, families: &[CoverFamily], upto: usize) -> Result<()> {
    for n in 0..upto.min(s.materialized_depth()) {
        let fam = families.get(n).ok_or_else(|| Error::InvalidInput(format!("no cover family for level {n}")))?;
        let check = check_cover_family(s.graph(n).expect("materialized"), fam);
        if !check.verdict.is_pass() {
            return Err(Error::Verification(format!(
                "cover family for level {n} is not certified: {:?}",
                check.violation
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct VerticalReport {
    pub n0: usize,
    pub horizon: usize,
    /// `Σ_{n0 ≤ n < horizon} N_0···N_{n−1}/(M_0···M_n)`.
    #[serde(with = "pq")]
    pub head: BigRational,
    /// Faithful schedules: `Σ_{n ≥ horizon}`, which is `2^{-horizon+1}/M_0`.
    #[serde(with = "pq_opt")]
    pub tail: Option<BigRational>,
    /// Faithful schedules: `2^{-n0+1}/M_0`.
    #[serde(with = "pq_opt")]
    pub closed_form: Option<BigRational>,
    /// `head + tail` (just `head` in toy mode).
    #[serde(with = "pq")]
    pub bound: BigRational,
    pub witness: NullWitness,
}

/// Covers the vertical section `B_x` from index `n0` on: at each index `n` the
/// rank-`n` pieces `(p, H(x(n)))` over every prefix `p`.
pub fn bset_vertical_bound(
    s: &Schedule,
    families: &[CoverFamily],
    x: &[usize],
    n0: usize,
    horizon: usize,
) -> Result<VerticalReport> {
    if n0 > horizon {
        return invalid(format!("n0 = {n0} exceeds the horizon {horizon}"));
    }
    if horizon > s.levels.len() {
        return Err(Error::Horizon(format!("horizon {horizon} exceeds the {} schedule levels", s.levels.len())));
    }
    if x.len() < horizon {
        return invalid(format!("x has length {} but the horizon is {horizon}", x.len()));
    }
    check_families(s, families, horizon)?;
    let mut groups = Vec::new();
    let mut head = BigRational::zero();
    for (n, &xn) in x.iter().enumerate().take(horizon).skip(n0) {
        let h = match s.graph(n) {
            Some(g) => {
                if xn >= g.vertex_count() {
                    return invalid(format!("x({n}) = {xn} is not a vertex of level {n}"));
                }
                Some(families[n].sets[xn].clone())
            }
            None => None,
        };
        let weight = group_weight(s, n)?;
        head += &weight;
        groups.push(WitnessGroup { index: n, kind: GroupKind::Section { h }, weight });
    }
    let faithful = s.mode == Mode::Faithful;
    let tail = if faithful { Some(geometric_tail(s, horizon)?) } else { None };
    let closed_form = if faithful { Some(geometric_tail(s, n0)?) } else { None };
    let bound = &head + tail.clone().unwrap_or_else(BigRational::zero);
    let witness = NullWitness {
        epsilon: bound.clone(),
        semantics: Semantics::Tail,
        pieces: Vec::new(),
        weights: Vec::new(),
        groups,
        tail_bound: tail.clone(),
    };
    Ok(VerticalReport { n0, horizon, head, tail, closed_form, bound, witness })
}

#[derive(Clone, Debug, Serialize)]
pub struct HorizontalFactor {
    pub level: usize,
    pub missed: usize,
    pub size: usize,
    #[serde(with = "pq")]
    pub factor: BigRational,
    pub at_most_three_quarters: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HorizontalReport {
    pub depth: usize,
    pub factors: Vec<HorizontalFactor>,
    #[serde(with = "pq")]
    pub product: BigRational,
    #[serde(with = "pq")]
    pub three_quarters_power: BigRational,
    pub verdict: Verdict,
}

/// `∏_{n < depth} |{a : y(n) ∉ H(a)}| / N_n`, the product measure of the
/// points `x` whose section misses `y` on the first `depth` levels.
pub fn bset_horizontal_bound(
    s: &Schedule,
    families: &[CoverFamily],
    y: &[usize],
    depth: usize,
) -> Result<HorizontalReport> {
    if depth > s.materialized_depth() {
        return Err(Error::Materialization(format!("depth {depth} exceeds the materialized depth")));
    }
    if y.len() < depth {
        return invalid(format!("y has length {} but the depth is {depth}", y.len()));
    }
    check_families(s, families, depth)?;
    let mut factors = Vec::new();
    let mut product = BigRational::one();
    let three_quarters = ratio(3, 4);
    for (n, &yn) in y.iter().enumerate().take(depth) {
        let size = s.graph(n).expect("materialized").vertex_count();
        if yn >= size {
            return invalid(format!("y({n}) = {yn} is not a vertex of level {n}"));
        }
        let missed = families[n].sets.iter().filter(|set| !set.contains(&yn)).count();
        let factor = ratio(missed as i64, size as i64);
        product *= &factor;
        factors.push(HorizontalFactor {
            level: n,
            missed,
            size,
            at_most_three_quarters: factor <= three_quarters,
            factor,
        });
    }
    let three_quarters_power = (0..depth).fold(BigRational::one(), |acc, _| acc * &three_quarters);
    let ok = factors.iter().all(|f| f.at_most_three_quarters) && product <= three_quarters_power;
    Ok(HorizontalReport { depth, factors, product, three_quarters_power, verdict: Verdict::from_bool(ok) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hausdorff::null_witness_check;
    use crate::schedule::build_preset;

    fn c5_family() -> CoverFamily {
        CoverFamily {
            sets: (0..5)
                .map(|x| {
                    let mut v = vec![x, (x + 2) % 5];
                    v.sort();
                    v
                })
                .collect(),
        }
    }

    #[test]
    fn vertical_faithful() {
        let s = build_preset("faithful-small").unwrap();
        let fams = level_cover_families(&s).unwrap();
        let x = vec![0; 16];
        let r = bset_vertical_bound(&s, &fams, &x, 2, 16).unwrap();
        assert_eq!(r.bound, ratio(1, 2));
        assert_eq!(r.closed_form, Some(ratio(1, 2)));
        assert_eq!(r.head, ratio(1, 2) - crate::exact::pow2(-15));
        assert_eq!(r.witness.groups.len(), 14);
        assert_eq!(r.witness.groups[0].kind, GroupKind::Section { h: None });
        let check = null_witness_check(&s, &r.witness, None).unwrap();
        assert_eq!(check.verdict, Verdict::Pass);

        let empty = bset_vertical_bound(&s, &fams, &x, 16, 16).unwrap();
        assert_eq!(empty.head, BigRational::zero());
        assert!(empty.witness.groups.is_empty());
        assert!(bset_vertical_bound(&s, &fams, &x[..3], 0, 4).is_err());
    }

    #[test]
    fn vertical_toy() {
        let s = build_preset("toy-c5").unwrap();
        let fams = vec![c5_family(), c5_family()];
        let r = bset_vertical_bound(&s, &fams, &[0, 1], 1, 2).unwrap();
        assert_eq!(r.bound, ratio(1, 2));
        assert_eq!(r.tail, None);
        assert_eq!(r.witness.groups[0].kind, GroupKind::Section { h: Some(vec![1, 3]) });
    }

    #[test]
    fn horizontal_factors() {
        let s = build_preset("toy-c5").unwrap();
        let fams = vec![c5_family(), c5_family()];
        let r = bset_horizontal_bound(&s, &fams, &[0, 4], 2).unwrap();
        assert_eq!(r.factors[0].factor, ratio(3, 5));
        assert_eq!(r.product, ratio(9, 25));
        assert_eq!(r.verdict, Verdict::Pass);
        let none = bset_horizontal_bound(&s, &fams, &[], 0).unwrap();
        assert_eq!(none.product, BigRational::one());

        let f = build_preset("faithful-small").unwrap();
        let fams = level_cover_families(&f).unwrap();
        let r = bset_horizontal_bound(&f, &fams, &[1, 7], 2).unwrap();
        assert_eq!(r.factors[0].factor, ratio(1, 2));
        assert!(r.factors[1].factor <= ratio(57, 84));
    }

    #[test]
    fn uncertified_family_is_refused() {
        let s = build_preset("toy-c5").unwrap();
        let bad = CoverFamily { sets: (0..5).map(|x| vec![x]).collect() };
        assert!(bset_horizontal_bound(&s, &[bad.clone(), bad], &[0, 0], 2).is_err());
    }
}
