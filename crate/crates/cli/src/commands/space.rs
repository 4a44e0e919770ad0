use anyhow::Result;
use clap::{Args, Subcommand};
use drlab::space::Space;
use drlab::Verdict;
use serde::Serialize;
use serde_json::json;

use super::parse_list;
use crate::report::{Ctx, Outcome};

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceCmd {
    /// Metric axioms of `ρ` on all length-`len` prefixes, plus an
    /// ultrametric counterexample when one exists.
    MetricCheck(MetricArgs),
    /// Standard hulls of every 2- and 3-point set have the set's diameter.
    HullCheck(HullArgs),
}

impl SpaceCmd {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceCmd::MetricCheck(_) => "space metric-check",
            SpaceCmd::HullCheck(_) => "space hull-check",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct MetricArgs {
    #[arg(long, default_value_t = 2)]
    len: usize,
    /// Random triples used when the exhaustive count exceeds the set budget.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct HullArgs {
    /// Point length; defaults to one less than the materialized depth.
    #[arg(long)]
    len: Option<usize>,
    /// Set sizes, comma-separated.
    #[arg(long, default_value = "2,3")]
    sizes: String,
}

pub fn run(cmd: &SpaceCmd, ctx: &mut Ctx) -> Result<Outcome> {
    let s = ctx.schedule()?;
    match cmd {
        SpaceCmd::MetricCheck(a) => {
            let space = Space::new(&s, a.len)?;
            let r = space.verify_metric_axioms(a.len, ctx.budgets.sets, a.samples, ctx.seed)?;
            let violation = space.find_ultrametric_violation(a.len);
            let verdict = if r.sampled && r.holds { Verdict::Indeterminate } else { Verdict::from_bool(r.holds) };
            Outcome::new(verdict, json!({ "toy": s.is_toy(), "metric": r, "ultrametric_violation": violation }))
        }
        SpaceCmd::HullCheck(a) => {
            let len = a.len.unwrap_or(s.materialized_depth().saturating_sub(1));
            let space = Space::new(&s, len + 1)?;
            let sizes: Vec<usize> = parse_list(&a.sizes)?;
            let r = space.hull_check(len, &sizes, ctx.budgets.sets)?;
            Outcome::new(Verdict::from_bool(r.holds), json!({ "toy": s.is_toy(), "hulls": r }))
        }
    }
}
