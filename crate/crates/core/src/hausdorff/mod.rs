//! Exact δ-approximation Hausdorff measure of cylinder unions by optimal
//! standard-set covers, null witnesses, the two bounds for the Borel set
//! `B = {(x, y) : ∃^∞ n  y(n) ∈ H(x(n))}`, and evidence for `H^h(Ω) = ∞`.

mod bset;
mod dp;
mod evidence;
mod witness;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::schedule::Schedule;

pub use bset::{bset_horizontal_bound, bset_vertical_bound, level_cover_families, HorizontalReport, VerticalReport};
pub use dp::{optimal_cover_cost, CoverOptions, CoverSolution, Optimality};
pub use evidence::{exact_lower_bound, infinity_evidence, EvidenceRow, EvidenceValue, InfinityReport};
pub use witness::{
    hull_weight, null_witness_check, refine_witness, GroupKind, NullWitness, Semantics, WitnessCheck, WitnessFile,
    WitnessGroup,
};

/// A finite union of pairwise distinct cylinders of one common depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSet {
    pub depth: usize,
    pub cylinders: Vec<Vec<usize>>,
}

impl TargetSet {
    pub fn new(depth: usize, mut cylinders: Vec<Vec<usize>>) -> Result<TargetSet> {
        if cylinders.iter().any(|c| c.len() != depth) {
            return invalid(format!("every cylinder must have length {depth}"));
        }
        cylinders.sort();
        let before = cylinders.len();
        cylinders.dedup();
        if cylinders.len() != before {
            return invalid("cylinders must be pairwise distinct");
        }
        Ok(TargetSet { depth, cylinders })
    }

    pub fn empty() -> TargetSet {
        TargetSet { depth: 0, cylinders: Vec::new() }
    }

    /// `Ω` itself.
    pub fn whole() -> TargetSet {
        TargetSet { depth: 0, cylinders: vec![Vec::new()] }
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    pub fn validate(&self, schedule: &Schedule) -> Result<()> {
        if self.depth > schedule.materialized_depth() {
            return invalid(format!(
                "target depth {} exceeds the materialized depth {}",
                self.depth,
                schedule.materialized_depth()
            ));
        }
        for c in &self.cylinders {
            for (n, &v) in c.iter().enumerate() {
                let size = schedule.graph(n).expect("materialized").vertex_count();
                if v >= size {
                    return invalid(format!("cylinder {c:?}: coordinate {n} out of range"));
                }
            }
        }
        Ok(())
    }

    /// Re-expresses both sets at the larger depth and takes the union.
    pub fn union(&self, other: &TargetSet, schedule: &Schedule) -> Result<TargetSet> {
        let depth = self.depth.max(other.depth);
        let mut all = self.extend_to(depth, schedule)?;
        all.extend(other.extend_to(depth, schedule)?);
        all.sort();
        all.dedup();
        Ok(TargetSet { depth, cylinders: all })
    }

    /// The cylinders refined to length `depth`.
    pub fn extend_to(&self, depth: usize, schedule: &Schedule) -> Result<Vec<Vec<usize>>> {
        let mut cur = self.cylinders.clone();
        for n in self.depth..depth {
            let size = schedule
                .graph(n)
                .ok_or_else(|| crate::Error::Materialization(format!("level {n} is symbolic")))?
                .vertex_count();
            cur = cur
                .into_iter()
                .flat_map(|c| {
                    (0..size).map(move |a| {
                        let mut d = c.clone();
                        d.push(a);
                        d
                    })
                })
                .collect();
        }
        Ok(cur)
    }
}
