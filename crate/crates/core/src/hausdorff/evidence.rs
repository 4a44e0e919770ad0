//! `H^h_δ(Ω)` along `δ = 2^{-j}`.

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use super::{optimal_cover_cost, CoverOptions, Optimality, TargetSet};
use crate::error::{Error, Result};
use crate::exact::{from_biguint, int, parse_pq, pow2, to_f64, to_pq};
use crate::magnitude::Quantity;
use crate::schedule::{Mode, Schedule};
use crate::Verdict;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvidenceValue {
    /// Optimal cover cost from the DP.
    Exact {
        value: String,
    },
    /// DP result when the rank cap or subset search is not exhaustive.
    UpperBound {
        value: String,
    },
    /// `N_0···N_{j−1}(M_j + 1)/(M_0···M_j) = 2^{-j}(M_j + 1)`.
    LowerBound {
        formula: String,
        m_plus_one: Quantity,
    },
    Unavailable {
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct EvidenceRow {
    pub j: usize,
    pub value: EvidenceValue,
    /// Bounds on `log2` of the value.
    pub log2: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfinityReport {
    pub rows: Vec<EvidenceRow>,
    /// Values are nondecreasing in `j` wherever comparable.
    pub monotone: Verdict,
}

fn rational_log2(r: &BigRational) -> Option<(f64, f64)> {
    if !r.is_positive() {
        return None;
    }
    let f = to_f64(r);
    if f.is_finite() && f > 0.0 {
        let l = f.log2();
        let slack = 1e-9 * l.abs().max(1.0);
        return Some((l - slack, l + slack));
    }
    let (n, d) = (r.numer().bits() as f64, r.denom().bits() as f64);
    Some((n - 1.0 - d, n - d + 1.0))
}

/// Exact `2^{-j}(M_j + 1)` when `M_j` is exact.
pub fn exact_lower_bound(s: &Schedule, j: usize) -> Option<BigRational> {
    let m = s.m(j)?;
    Some((from_biguint(m.as_exact()?) + int(1)) * pow2(-(j as i64)))
}

/// Optimal costs of covering `Ω` with pieces of diameter at most `2^{-j}`,
/// for `j = 0..=j_max`.
pub fn infinity_evidence(s: &Schedule, j_max: usize) -> Result<InfinityReport> {
    let mut rows = Vec::new();
    for j in 0..=j_max {
        if j > s.horizon() {
            rows.push(EvidenceRow {
                j,
                value: EvidenceValue::Unavailable { reason: format!("beyond horizon {}", s.horizon()) },
                log2: None,
            });
            continue;
        }
        let exact = |v: BigRational, upper: bool| {
            let log2 = rational_log2(&v);
            let value = to_pq(&v);
            let value = if upper { EvidenceValue::UpperBound { value } } else { EvidenceValue::Exact { value } };
            (value, log2)
        };
        let (value, log2) = match optimal_cover_cost(s, &TargetSet::whole(), &CoverOptions::delta(Some(-(j as i64)))) {
            Ok(sol) => match sol.value {
                Some(v) => exact(v, sol.optimality == Optimality::UpperBound),
                None => (EvidenceValue::Unavailable { reason: "no cover within the rank cap".into() }, None),
            },
            Err(Error::Horizon(_) | Error::Materialization(_)) if s.mode == Mode::Faithful => {
                let q = s.m(j).expect("within horizon").add(&Quantity::from_u64(1));
                let log2 = q.log2_bounds().map(|(lo, hi)| (lo - j as f64, hi - j as f64));
                (EvidenceValue::LowerBound { formula: format!("2^-{j}·(M_{j}+1)"), m_plus_one: q }, log2)
            }
            Err(Error::Horizon(m) | Error::Materialization(m)) => (EvidenceValue::Unavailable { reason: m }, None),
            Err(e) => return Err(e),
        };
        rows.push(EvidenceRow { j, value, log2 });
    }
    let monotone = monotonicity(&rows);
    Ok(InfinityReport { rows, monotone })
}

fn monotonicity(rows: &[EvidenceRow]) -> Verdict {
    let mut verdict = Verdict::Pass;
    let mut prev: Option<&EvidenceRow> = None;
    for row in rows {
        let Some((lo, hi)) = row.log2 else { continue };
        if let Some(p) = prev {
            let step = match (&p.value, &row.value) {
                (EvidenceValue::Exact { value: a }, EvidenceValue::Exact { value: b }) => {
                    Verdict::from_bool(parse_pq(a).expect("own output") <= parse_pq(b).expect("own output"))
                }
                _ => {
                    let (plo, phi) = p.log2.expect("kept only with bounds");
                    if phi <= lo {
                        Verdict::Pass
                    } else if plo > hi {
                        Verdict::Fail
                    } else {
                        Verdict::Indeterminate
                    }
                }
            };
            verdict = verdict.and(step);
        }
        prev = Some(row);
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::schedule::build_preset;

    #[test]
    fn faithful_small_table() {
        let s = build_preset("faithful-small").unwrap();
        let r = infinity_evidence(&s, 5).unwrap();
        let exact = |j: usize| match &r.rows[j].value {
            EvidenceValue::Exact { value } => crate::exact::parse_pq(value).unwrap(),
            other => panic!("row {j}: {other:?}"),
        };
        assert_eq!(exact(0), int(2));
        assert_eq!(exact(1), ratio(5, 2));
        assert_eq!(exact(2), ratio(169, 4));
        for j in 0..=3 {
            assert_eq!(exact(j), exact_lower_bound(&s, j).unwrap());
        }
        assert!(matches!(r.rows[4].value, EvidenceValue::LowerBound { .. } | EvidenceValue::Exact { .. }));
        assert!(matches!(r.rows[5].value, EvidenceValue::LowerBound { .. }));
        assert_eq!(r.monotone, Verdict::Pass);
    }

    #[test]
    fn beyond_horizon_is_unavailable() {
        let s = build_preset("toy-c5").unwrap();
        let r = infinity_evidence(&s, 3).unwrap();
        assert!(matches!(r.rows[2].value, EvidenceValue::Unavailable { .. }));
    }
}
