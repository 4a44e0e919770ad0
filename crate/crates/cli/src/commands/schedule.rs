use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Subcommand};
use drlab::schedule::MonomialValue;
use drlab::Verdict;
use serde::Serialize;
use serde_json::json;

use super::write_json;
use crate::report::{Ctx, Outcome};

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleCmd {
    /// Build (and certify) the schedule selected by `--schedule`.
    Build(BuildArgs),
    /// `r1(n) = N_0···N_{n−1}/(M_0···M_n)` and `r2(n) = N_0···N_n/(M_0···M_n)`.
    Ratios(RatiosArgs),
}

impl ScheduleCmd {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleCmd::Build(_) => "schedule build",
            ScheduleCmd::Ratios(_) => "schedule ratios",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    /// Schedule file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RatiosArgs {
    #[arg(long, default_value_t = 16)]
    n_max: usize,
}

pub fn run(cmd: &ScheduleCmd, ctx: &mut Ctx) -> Result<Outcome> {
    let s = ctx.schedule()?;
    match cmd {
        ScheduleCmd::Build(a) => {
            let file = s.to_file()?;
            if let Some(path) = &a.out {
                write_json(path, &file)?;
            }
            Outcome::new(Verdict::Pass, json!({ "toy": s.is_toy(), "schedule": file }))
        }
        ScheduleCmd::Ratios(a) => {
            let r = s.ratio_diagnostics(a.n_max)?;
            let text = |v: &[MonomialValue]| -> Vec<String> {
                v.iter()
                    .map(|m| m.exact.as_ref().map(drlab::exact::to_pq).unwrap_or_else(|| m.formula.clone()))
                    .collect()
            };
            let verdict = r.r1_halving.and(r.r2_increasing);
            Outcome::new(verdict, json!({ "r1": text(&r.r1), "r2": text(&r.r2), "report": r }))
        }
    }
}
