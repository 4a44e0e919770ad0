//! Fractional chromatic number with primal (fractional colouring) and dual
//! (worst-case vertex weights) certificates.
//!
//! The weight property "every nonnegative `w` has an independent set carrying
//! at least a quarter of `w(G)`" holds exactly when `chi_f <= 4`: by LP duality
//! `max_H w(H) >= w(G) / chi_f` for every `w`, with equality at the dual optimum.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::automorphism::is_vertex_transitive;
use super::coloring::greedy_classes;
use super::graph::{Graph, Provenance};
use super::independent::{max_independent_set, max_weight_independent_set};
use super::kneser::kneser_sets;
use super::simplex::maximize;
use crate::error::{Error, Result};
use crate::exact::{int, pq, pq_vec, to_pq};
use crate::Verdict;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChiMethod {
    /// `|V| / alpha`; `transitivity` says how vertex-transitivity was known.
    VertexTransitive { alpha: usize, transitivity: String },
    /// Column generation over independent sets.
    LinearProgram { columns: usize, rounds: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractionalCertificate {
    #[serde(with = "pq")]
    pub chi_f: BigRational,
    /// Rational-weighted independent sets covering every vertex at least once.
    #[serde(serialize_with = "weighted_sets")]
    pub primal: Option<Vec<(Vec<usize>, BigRational)>>,
    /// Vertex weights whose heaviest independent set carries `w(G)/chi_f`.
    #[serde(with = "pq_vec")]
    pub dual: Vec<BigRational>,
}

fn weighted_sets<S: serde::Serializer>(
    sets: &Option<Vec<(Vec<usize>, BigRational)>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Option<Vec<(&Vec<usize>, String)>> =
        sets.as_ref().map(|v| v.iter().map(|(set, w)| (set, to_pq(w))).collect());
    pairs.serialize(s)
}

impl FractionalCertificate {
    pub fn verify_primal(&self, g: &Graph) -> bool {
        let Some(primal) = &self.primal else {
            return false;
        };
        let mut cover = vec![BigRational::zero(); g.vertex_count()];
        let mut total = BigRational::zero();
        for (set, w) in primal {
            if *w < BigRational::zero() || !g.is_independent(set) {
                return false;
            }
            for &v in set {
                cover[v] += w;
            }
            total += w;
        }
        total == self.chi_f && cover.iter().all(|c| *c >= BigRational::one())
    }

    /// Exact check that the heaviest independent set under `dual` weighs
    /// exactly `w(G) / chi_f`.
    pub fn verify_dual(&self, g: &Graph) -> bool {
        if self.dual.len() != g.vertex_count() || self.dual.iter().any(|w| *w < BigRational::zero()) {
            return false;
        }
        let total: BigRational = self.dual.iter().sum();
        if total.is_zero() {
            return false;
        }
        let (_, best) = max_weight_independent_set(g, &self.dual);
        best == total / &self.chi_f
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightReport {
    #[serde(with = "pq")]
    pub chi_f: BigRational,
    pub verdict: Verdict,
    pub method: ChiMethod,
    pub certificate: FractionalCertificate,
}

/// Exact fractional chromatic number by column generation: the restricted
/// master is solved with the exact simplex, and pricing is an exact
/// maximum-weight independent set.
pub fn fractional_chromatic_lp(g: &Graph, max_rounds: usize) -> Result<(FractionalCertificate, ChiMethod)> {
    let n = g.vertex_count();
    let order: Vec<usize> = (0..n).collect();
    let mut columns: Vec<Vec<usize>> = greedy_classes(g, &order).into_iter().map(|c| extend_to_maximal(g, c)).collect();
    columns.sort();
    columns.dedup();
    let ones = vec![BigRational::one(); n];
    for round in 1..=max_rounds {
        let a: Vec<Vec<BigRational>> = columns
            .iter()
            .map(|s| {
                let mut row = vec![BigRational::zero(); n];
                for &v in s {
                    row[v] = BigRational::one();
                }
                row
            })
            .collect();
        let b = vec![BigRational::one(); columns.len()];
        let sol = maximize(&a, &b, &ones)?;
        let (set, best) = max_weight_independent_set(g, &sol.x);
        if best <= BigRational::one() {
            let primal = columns.iter().cloned().zip(sol.y).filter(|(_, w)| !w.is_zero()).collect();
            let cert = FractionalCertificate { chi_f: sol.value, primal: Some(primal), dual: sol.x };
            return Ok((cert, ChiMethod::LinearProgram { columns: columns.len(), rounds: round }));
        }
        columns.push(extend_to_maximal(g, set));
    }
    Err(Error::BudgetExhausted(format!("column generation exceeded {max_rounds} rounds")))
}

fn extend_to_maximal(g: &Graph, mut set: Vec<usize>) -> Vec<usize> {
    for v in 0..g.vertex_count() {
        if !set.contains(&v) && set.iter().all(|&u| !g.is_adjacent(u, v)) {
            set.push(v);
        }
    }
    set.sort_unstable();
    set
}

/// Budgets for [`check_weight_property`].
#[derive(Clone, Copy, Debug)]
pub struct WeightBudget {
    pub search_nodes: u64,
    pub lp_rounds: usize,
    /// Largest graph for which a primal certificate is produced by LP when
    /// the transitive shortcut is taken.
    pub lp_vertex_cap: usize,
}

impl Default for WeightBudget {
    fn default() -> Self {
        WeightBudget { search_nodes: 50_000_000, lp_rounds: 2_000, lp_vertex_cap: 40 }
    }
}

/// Computes `chi_f` exactly and passes iff `chi_f <= 4`.
pub fn check_weight_property(g: &Graph, budget: WeightBudget) -> Result<WeightReport> {
    let n = g.vertex_count();
    let transitivity = match g.provenance() {
        Provenance::Kneser { .. } => Some("kneser provenance".to_string()),
        _ => match is_vertex_transitive(g, budget.search_nodes) {
            Ok(true) => Some("verified".to_string()),
            Ok(false) => None,
            // Fall back to the program rather than fail.
            Err(_) => None,
        },
    };
    let (certificate, method) = match transitivity {
        Some(how) => {
            let all: Vec<usize> = (0..n).collect();
            let alpha = max_independent_set(g, &all, budget.search_nodes)?.len();
            let chi_f = BigRational::new(BigInt::from(n), BigInt::from(alpha));
            let primal = match g.provenance() {
                Provenance::Kneser { m, k } => Some(kneser_star_cover(*m, *k)),
                _ if n <= budget.lp_vertex_cap => {
                    let (lp, _) = fractional_chromatic_lp(g, budget.lp_rounds)?;
                    if lp.chi_f != chi_f {
                        return Err(Error::Verification(format!(
                            "transitive shortcut gave {chi_f}, program gave {}",
                            lp.chi_f
                        )));
                    }
                    lp.primal
                }
                _ => None,
            };
            let cert = FractionalCertificate { chi_f, primal, dual: vec![BigRational::one(); n] };
            (cert, ChiMethod::VertexTransitive { alpha, transitivity: how })
        }
        None => fractional_chromatic_lp(g, budget.lp_rounds)?,
    };
    let verdict = Verdict::from_bool(certificate.chi_f <= int(4));
    Ok(WeightReport { chi_f: certificate.chi_f.clone(), verdict, method, certificate })
}

/// The `m` stars of `K(m, k)`, each with weight `1/k`.
fn kneser_star_cover(m: usize, k: usize) -> Vec<(Vec<usize>, BigRational)> {
    let sets = kneser_sets(m, k);
    let w = BigRational::new(BigInt::one(), BigInt::from(k));
    (0..m)
        .map(|e| {
            let star = (0..sets.len()).filter(|&v| sets[v].contains(&e)).collect();
            (star, w.clone())
        })
        .collect()
}
