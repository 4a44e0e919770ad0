//! Bundles the three property checks into one certificate.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::cap::CapEmbedding;
use super::coloring::{find_coloring, ColoringOutcome};
use super::cover_family::{build_cover_family, check_cover_family, CoverCheck, CoverFamily, CoverStrategy};
use super::fractional::{check_weight_property, WeightBudget, WeightReport};
use super::graph::{Graph, Provenance};
use crate::error::{invalid, Error, Result};
use crate::Verdict;

/// Outcome of "no partition into `n` independent sets".
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PartitionResult {
    /// Search exhausted without finding a partition; the digest hashes the
    /// full assignment/backtrack trace.
    Pass {
        nodes: u64,
        trace_digest: String,
    },
    /// An explicit partition into at most `n` independent sets.
    Fail {
        partition: Vec<Vec<usize>>,
    },
    Indeterminate {
        nodes: u64,
    },
}

impl PartitionResult {
    pub fn verdict(&self) -> Verdict {
        match self {
            PartitionResult::Pass { .. } => Verdict::Pass,
            PartitionResult::Fail { .. } => Verdict::Fail,
            PartitionResult::Indeterminate { .. } => Verdict::Indeterminate,
        }
    }
}

pub fn check_partition_property(g: &Graph, n: usize, node_budget: u64) -> Result<PartitionResult> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    Ok(match find_coloring(g, &all, n, node_budget) {
        ColoringOutcome::Colorable { classes } => PartitionResult::Fail { partition: classes },
        ColoringOutcome::Refuted { nodes, trace_digest } => PartitionResult::Pass { nodes, trace_digest },
        ColoringOutcome::Exhausted { nodes } => PartitionResult::Indeterminate { nodes },
    })
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyConfig {
    pub search_nodes: u64,
    pub weight: WeightBudget,
    /// `None` picks by provenance: caps, star_balanced, else randomized.
    pub strategy: Option<CoverStrategy>,
    pub seed: u64,
    pub cover_attempts: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            search_nodes: 50_000_000,
            weight: WeightBudget::default(),
            strategy: None,
            seed: 0,
            cover_attempts: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphCertificate {
    pub n_target: usize,
    pub vertex_count: usize,
    pub partition: PartitionResult,
    pub weight: Option<WeightReport>,
    pub weight_note: Option<String>,
    pub cover_strategy: CoverStrategy,
    pub cover_family: Option<CoverFamily>,
    pub cover_check: Option<CoverCheck>,
    pub cover_note: Option<String>,
    pub verdict: Verdict,
}

impl GraphCertificate {
    /// `|V| >= (4/3)·n_target`, which any passing certificate must satisfy.
    pub fn size_bound_holds(&self) -> bool {
        let v = BigRational::from_integer(BigInt::from(self.vertex_count));
        let m = BigRational::new(BigInt::from(4 * self.n_target), BigInt::from(3));
        v >= m
    }
}

pub fn certify(
    g: &Graph,
    n_target: usize,
    embedding: Option<&CapEmbedding>,
    config: &CertifyConfig,
) -> Result<GraphCertificate> {
    let partition = check_partition_property(g, n_target, config.search_nodes)?;

    let (weight, weight_note, weight_verdict) = match check_weight_property(g, config.weight) {
        Ok(r) => {
            let v = r.verdict;
            (Some(r), None, v)
        }
        Err(e @ (Error::BudgetExhausted(_) | Error::Indeterminate(_))) => {
            (None, Some(e.to_string()), Verdict::Indeterminate)
        }
        Err(e) => return Err(e),
    };

    let strategy = config.strategy.unwrap_or(match g.provenance() {
        Provenance::Cap if embedding.is_some() => CoverStrategy::Caps,
        Provenance::Kneser { .. } => CoverStrategy::StarBalanced,
        _ => CoverStrategy::Randomized,
    });
    let (cover_family, cover_check, cover_note, cover_verdict) =
        match build_cover_family(g, strategy, config.seed, config.cover_attempts, embedding) {
            Ok(fam) => {
                let check = check_cover_family(g, &fam);
                let v = check.verdict;
                (Some(fam), Some(check), None, v)
            }
            Err(e @ (Error::BudgetExhausted(_) | Error::Verification(_))) => {
                (None, None, Some(e.to_string()), Verdict::Fail)
            }
            Err(e @ Error::Indeterminate(_)) => (None, None, Some(e.to_string()), Verdict::Indeterminate),
            Err(e) => return Err(e),
        };

    let verdict = partition.verdict().and(weight_verdict).and(cover_verdict);
    Ok(GraphCertificate {
        n_target,
        vertex_count: g.vertex_count(),
        partition,
        weight,
        weight_note,
        cover_strategy: strategy,
        cover_family,
        cover_check,
        cover_note,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn partition_examples() {
        let c5 = Graph::cycle(5);
        assert!(matches!(check_partition_property(&c5, 2, 1000).unwrap(), PartitionResult::Pass { .. }));
        assert!(matches!(
            check_partition_property(&Graph::single_edge(), 1, 1000).unwrap(),
            PartitionResult::Pass { .. }
        ));
        let c4 = Graph::cycle(4);
        match check_partition_property(&c4, 2, 1000).unwrap() {
            PartitionResult::Fail { mut partition } => {
                partition.sort();
                assert_eq!(partition, vec![vec![0, 2], vec![1, 3]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tiny_budget_is_indeterminate() {
        let k5 = Graph::complete(5);
        assert!(matches!(check_partition_property(&k5, 4, 2).unwrap(), PartitionResult::Indeterminate { .. }));
    }

    #[test]
    fn certify_small_graphs() {
        let cfg = CertifyConfig::default();
        let edge = certify(&Graph::single_edge(), 1, None, &cfg).unwrap();
        assert_eq!(edge.verdict, Verdict::Pass);
        assert!(edge.size_bound_holds());

        let c5 = certify(&Graph::cycle(5), 2, None, &cfg).unwrap();
        assert_eq!(c5.verdict, Verdict::Pass);
        assert_eq!(c5.weight.as_ref().unwrap().chi_f, ratio(5, 2));
        assert_eq!(c5.cover_check.as_ref().unwrap().min_coverage, 2);

        let c5n3 = certify(&Graph::cycle(5), 3, None, &cfg).unwrap();
        assert_eq!(c5n3.verdict, Verdict::Fail);
        assert!(matches!(c5n3.partition, PartitionResult::Fail { .. }));
    }

    #[test]
    fn kneser_9_3_certified_for_four() {
        let g = crate::graphs::generate_kneser_graph(9, 3, 5000).unwrap().graph().unwrap().clone();
        let cert = certify(&g, 4, None, &CertifyConfig::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert_eq!(cert.weight.as_ref().unwrap().chi_f, ratio(3, 1));
        assert!(cert.cover_check.as_ref().unwrap().min_coverage >= 21);
        assert!(cert.size_bound_holds());
    }

    #[test]
    fn certify_is_deterministic() {
        let cfg = CertifyConfig { seed: 11, ..Default::default() };
        let a = certify(&Graph::cycle(7), 2, None, &cfg).unwrap();
        let b = certify(&Graph::cycle(7), 2, None, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
