use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Subcommand, ValueEnum};
use drlab::exact::to_pq;
use drlab::hausdorff::{
    bset_horizontal_bound, bset_vertical_bound, infinity_evidence, level_cover_families, null_witness_check,
    optimal_cover_cost, refine_witness, CoverOptions, Optimality, TargetSet, WitnessFile,
};
use drlab::Verdict;
use serde::Serialize;
use serde_json::json;

use super::{parse_list, write_json};
use crate::report::{Ctx, Outcome};

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureCmd {
    /// Optimal standard-set cover cost of a cylinder union.
    Cover(CoverArgs),
    /// Check a null witness file.
    WitnessCheck(WitnessCheckArgs),
    /// Split witness pieces below rank `j`.
    Refine(RefineArgs),
    /// Vertical or horizontal bound for the sections of `B`.
    Bset(BsetArgs),
    /// Optimal cover costs of the whole space along `δ = 2^{-j}`.
    Infinity(InfinityArgs),
}

impl MeasureCmd {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureCmd::Cover(_) => "measure cover",
            MeasureCmd::WitnessCheck(_) => "measure witness-check",
            MeasureCmd::Refine(_) => "measure refine",
            MeasureCmd::Bset(_) => "measure bset",
            MeasureCmd::Infinity(_) => "measure infinity",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CoverArgs {
    /// Target set file `{"depth": d, "cylinders": [[…], …]}`; the whole space
    /// when absent.
    #[arg(long)]
    set: Option<PathBuf>,
    /// `δ` as `1`, `1/4`, `2^-3` or `inf`.
    #[arg(long, default_value = "1")]
    delta: String,
    #[arg(long)]
    rank_cap: Option<usize>,
    /// Use the per-level symmetry shortcut (results are upper bounds).
    #[arg(long)]
    shortcut: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct WitnessCheckArgs {
    #[arg(long)]
    witness: PathBuf,
    /// Target set the witness must cover (plain witnesses).
    #[arg(long)]
    set: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RefineArgs {
    #[arg(long)]
    witness: PathBuf,
    #[arg(long)]
    j: usize,
    /// Refined witness file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section {
    Vertical,
    Horizontal,
}

#[derive(Args, Debug, Serialize)]
pub struct BsetArgs {
    #[arg(long, value_enum)]
    section: Section,
    /// The fixed coordinate sequence (`x` or `y`), comma-separated.
    #[arg(long)]
    point: String,
    /// Vertical: first index covered.
    #[arg(long, default_value_t = 0)]
    n0: usize,
    /// Vertical: last index (exclusive) covered explicitly.
    #[arg(long)]
    horizon: Option<usize>,
    /// Horizontal: number of levels in the product.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct InfinityArgs {
    #[arg(long, default_value_t = 5)]
    j_max: usize,
}

pub fn run(cmd: &MeasureCmd, ctx: &mut Ctx) -> Result<Outcome> {
    let s = ctx.schedule()?;
    match cmd {
        MeasureCmd::Cover(a) => {
            let target = match &a.set {
                Some(path) => ctx.read_json::<TargetSet>(path)?,
                None => TargetSet::whole(),
            };
            let opts = CoverOptions {
                delta_exp: CoverOptions::parse_delta(&a.delta)?,
                rank_cap: a.rank_cap,
                symmetric_shortcut: a.shortcut,
            };
            let sol = optimal_cover_cost(&s, &target, &opts)?;
            let verdict = match sol.optimality {
                Optimality::Exact => Verdict::Pass,
                Optimality::UpperBound => Verdict::Indeterminate,
            };
            Outcome::new(verdict, sol)
        }
        MeasureCmd::WitnessCheck(a) => {
            let file: WitnessFile = ctx.read_json(&a.witness)?;
            let target = match &a.set {
                Some(path) => Some(ctx.read_json::<TargetSet>(path)?),
                None => None,
            };
            let check = null_witness_check(&s, &file.witness, target.as_ref())?;
            Outcome::new(check.verdict, json!({ "schedule_ref": file.schedule_ref, "check": check }))
        }
        MeasureCmd::Refine(a) => {
            let file: WitnessFile = ctx.read_json(&a.witness)?;
            let (refined, inflation) = refine_witness(&s, &file.witness, a.j)?;
            let check = null_witness_check(&s, &refined, None)?;
            let out = WitnessFile::new(file.schedule_ref.clone(), refined);
            if let Some(path) = &a.out {
                write_json(path, &out)?;
            }
            Outcome::new(
                check.verdict,
                json!({
                    "inflation": to_pq(&inflation),
                    "check": check,
                    "witness": if a.out.is_none() { Some(&out) } else { None },
                }),
            )
        }
        MeasureCmd::Bset(a) => {
            let point: Vec<usize> = parse_list(&a.point)?;
            let families = level_cover_families(&s)?;
            match a.section {
                Section::Vertical => {
                    let horizon = a.horizon.unwrap_or(point.len());
                    let r = bset_vertical_bound(&s, &families, &point, a.n0, horizon)?;
                    let closed = match &r.closed_form {
                        Some(c) => Verdict::from_bool(*c == r.bound),
                        None => Verdict::Pass,
                    };
                    Outcome::new(closed, json!({ "toy": s.is_toy(), "vertical": r }))
                }
                Section::Horizontal => {
                    let depth = a.depth.unwrap_or(point.len());
                    let r = bset_horizontal_bound(&s, &families, &point, depth)?;
                    Outcome::new(r.verdict, json!({ "toy": s.is_toy(), "horizontal": r }))
                }
            }
        }
        MeasureCmd::Infinity(a) => {
            let r = infinity_evidence(&s, a.j_max)?;
            Outcome::new(r.monotone, r)
        }
    }
}
