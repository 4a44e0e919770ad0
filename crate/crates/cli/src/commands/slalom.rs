use anyhow::{bail, Result};
use clap::{Args, Subcommand, ValueEnum};
use drlab::exact::{parse_pq, to_pq};
use drlab::magnitude::Quantity;
use drlab::slalom::{
    build_interval_partition, compare_partition_modes, cov_e_morphism_check, km_recursion, sample_cov_e_pair,
    sample_interval_slalom, vexists_morphism_check, PartitionMode,
};
use drlab::Verdict;
use serde::Serialize;
use serde_json::json;

use super::parse_list;
use crate::report::{Ctx, Outcome};

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlalomCmd {
    /// Hull-weight check of the cover of `{x : x↾I_n ∈ S(n)}` on a seeded slalom.
    CheckVexists(VexistsArgs),
    /// Partial products of `e(n)/a(n)` and the capture implication on sampled pairs.
    CheckCove(CoveArgs),
    /// The parameter table `d, e, H, a, c` and `log_{d(n)} H(n)/d(n)`.
    KmRecursion(KmArgs),
    /// Interval partitions in both modes and the per-index weight comparison.
    Partition(PartitionArgs),
}

impl SlalomCmd {
    pub fn name(&self) -> &'static str {
        match self {
            SlalomCmd::CheckVexists(_) => "slalom check-vexists",
            SlalomCmd::CheckCove(_) => "slalom check-cove",
            SlalomCmd::KmRecursion(_) => "slalom km-recursion",
            SlalomCmd::Partition(_) => "slalom partition",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Strengthened,
    Literal,
}

impl From<Mode> for PartitionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strengthened => PartitionMode::Strengthened,
            Mode::Literal => PartitionMode::Literal,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct VexistsArgs {
    /// Widths `H(n)`, comma-separated.
    #[arg(long, default_value = "1,1,1,1,1")]
    widths: String,
    #[arg(long, value_enum, default_value = "strengthened")]
    mode: Mode,
}

#[derive(Args, Debug, Serialize)]
pub struct CoveArgs {
    /// Alphabet sizes `a(n)`; defaults to `2^{n+1}` for `n < len`.
    #[arg(long)]
    a: Option<String>,
    /// Widths `e(n)`; defaults to 1.
    #[arg(long)]
    e: Option<String>,
    #[arg(long, default_value_t = 12)]
    len: usize,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value = "1/1000000")]
    tol: String,
    /// First index of the `∈*` window.
    #[arg(long, default_value_t = 0)]
    from: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct KmArgs {
    #[arg(long, default_value_t = 5)]
    n_max: usize,
    #[arg(long, value_enum, default_value = "strengthened")]
    mode: Mode,
}

#[derive(Args, Debug, Serialize)]
pub struct PartitionArgs {
    #[arg(long, default_value = "1,1,1,1,1")]
    widths: String,
    /// Also require `∏_{k∈I_n} N_k > H(n)`.
    #[arg(long)]
    require_product: bool,
}

fn widths(text: &str) -> Result<Vec<Quantity>> {
    let v: Vec<u64> = parse_list(text)?;
    if v.contains(&0) {
        bail!("widths must be positive");
    }
    Ok(v.into_iter().map(Quantity::from_u64).collect())
}

pub fn run(cmd: &SlalomCmd, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        SlalomCmd::CheckVexists(a) => {
            let s = ctx.schedule()?;
            let w = widths(&a.widths)?;
            let part = build_interval_partition(&s, &w, a.mode.into(), false)?;
            let slalom = sample_interval_slalom(&s, &part.partition, &w, ctx.seed)?;
            let mut r = vexists_morphism_check(&s, &part.partition, &slalom, w.len())?;
            r.mode = Some(a.mode.into());
            Outcome::new(r.verdict, json!({ "partition": part, "slalom": slalom, "check": r }))
        }
        SlalomCmd::CheckCove(a) => {
            let alpha: Vec<u64> = match &a.a {
                Some(t) => parse_list(t)?,
                None => (0..a.len).map(|n| 1u64 << (n + 1).min(62)).collect(),
            };
            let e: Vec<u64> = match &a.e {
                Some(t) => parse_list(t)?,
                None => vec![1; alpha.len()],
            };
            let tol = parse_pq(&a.tol)?;
            let window = (a.from, alpha.len());
            let mut first = None;
            let (mut captured, mut failures) = (0u64, Vec::new());
            for k in 0..a.samples {
                let seed = ctx.seed.wrapping_add(k);
                let (slalom, x) = sample_cov_e_pair(&alpha, &e, seed);
                let r = cov_e_morphism_check(&alpha, &e, &slalom, &x, window, &tol)?;
                captured += r.eventual as u64;
                if !r.implication.is_pass() {
                    failures.push(seed);
                }
                first.get_or_insert(r);
            }
            let Some(first) = first else { bail!("--samples must be positive") };
            let verdict = first.condition.and(Verdict::from_bool(failures.is_empty()));
            Outcome::new(
                verdict,
                json!({
                    "a": alpha,
                    "e": e,
                    "tol": to_pq(&tol),
                    "window": window,
                    "partial_products": first.partial_products.iter().map(to_pq).collect::<Vec<_>>(),
                    "strictly_decreasing": first.strict_where_smaller,
                    "first_below_tol": first.first_below_tol,
                    "condition": first.condition,
                    "samples": a.samples,
                    "captured": captured,
                    "implication_failures": failures,
                }),
            )
        }
        SlalomCmd::KmRecursion(a) => {
            let s = ctx.schedule()?;
            let r = km_recursion(&s, a.n_max, a.mode.into())?;
            let ratios_ok = r.rows.iter().all(|row| row.ratio == row.n as u64);
            Outcome::new(r.equalities.and(Verdict::from_bool(ratios_ok)), r)
        }
        SlalomCmd::Partition(a) => {
            let s = ctx.schedule()?;
            let r = compare_partition_modes(&s, &widths(&a.widths)?, a.require_product)?;
            let ok = r.strengthened_bounds.iter().all(|b| b.hull.at_most_two_pow_minus_n.is_pass());
            Outcome::new(Verdict::from_bool(ok), r)
        }
    }
}
