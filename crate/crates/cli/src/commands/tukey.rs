use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Subcommand};
use drlab::exact::{parse_pq, ratio};
use drlab::tukey_null::{
    build_ball_family, check_assumption_star, h_doubling_check, morphism_trials, FiniteMetricSpace, GaugeFn,
};
use serde::Serialize;
use serde_json::json;

use super::parse_rationals;
use crate::report::{Ctx, Outcome};

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TukeyCmd {
    /// Build the ball family and check Assumption(*) on every subset.
    StarCheck(StarArgs),
    /// `φ(A) ∈* S ⇒ A ⊆ ψ(S)` on seeded random instances.
    Morphism(MorphismArgs),
    /// `h(2x) < r·h(x)` on the dyadic grid and the level ratios `M_{n+1}`.
    Doubling(DoublingArgs),
}

impl TukeyCmd {
    pub fn name(&self) -> &'static str {
        match self {
            TukeyCmd::StarCheck(_) => "tukey star-check",
            TukeyCmd::Morphism(_) => "tukey morphism",
            TukeyCmd::Doubling(_) => "tukey doubling",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct StarArgs {
    /// Distance table `{"distances": [["0", "1/2", …], …]}`.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Points on a line instead of a file, comma-separated `p/q`.
    #[arg(long)]
    collinear: Option<String>,
    /// Gauge file `{"grid": [["0","0"], …], "extension": "constant"}`.
    #[arg(long)]
    gauge: Option<PathBuf>,
    /// Linear gauge `f(t) = slope·t` when no gauge file is given.
    #[arg(long, default_value = "1")]
    slope: String,
    #[arg(long, default_value = "3")]
    alpha: String,
    #[arg(long, default_value = "1/2,1/4,1/8")]
    eps: String,
    /// Radius grid; defaults to every distance plus `eta`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value = "1/16")]
    eta: String,
}

#[derive(Args, Debug, Serialize)]
pub struct MorphismArgs {
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    #[arg(long, default_value_t = 8)]
    max_points: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct DoublingArgs {
    #[arg(long, default_value = "1000")]
    r: String,
    #[arg(long, default_value_t = 4)]
    n_max: usize,
}

pub fn run(cmd: &TukeyCmd, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        TukeyCmd::StarCheck(a) => {
            let x = match (&a.space, &a.collinear) {
                (Some(path), None) => FiniteMetricSpace::from_json(&ctx.read(path)?)?,
                (None, Some(line)) => FiniteMetricSpace::collinear(&parse_rationals(line)?)?,
                _ => bail!("give exactly one of --space and --collinear"),
            };
            let f = match &a.gauge {
                Some(path) => {
                    let g: GaugeFn = ctx.read_json(path)?;
                    g.validate()?;
                    g
                }
                None => GaugeFn::linear(parse_pq(&a.slope)?)?,
            };
            let grid = match &a.grid {
                Some(g) => parse_rationals(g)?,
                None => x.fine_radius_grid(&parse_pq(&a.eta)?),
            };
            let balls = build_ball_family(&x, &grid)?;
            let star =
                check_assumption_star(&x, &f, &balls.family, &parse_pq(&a.alpha)?, &parse_rationals(&a.eps)?, None)?;
            Outcome::new(
                star.verdict,
                json!({
                    "points": x.len(),
                    "balls": balls.family.len(),
                    "ultrametric": balls.ultrametric,
                    "ball_family": {
                        "factor": balls.factor,
                        "checked": balls.checked,
                        "failure_count": balls.failure_count,
                        "failures": balls.failures,
                        "verdict": balls.verdict,
                    },
                    "star": star,
                }),
            )
        }
        TukeyCmd::Morphism(a) => {
            let t = morphism_trials(a.seeds, a.max_points)?;
            Outcome::new(t.verdict, t)
        }
        TukeyCmd::Doubling(a) => {
            let s = ctx.schedule()?;
            let r = parse_pq(&a.r)?;
            if r <= ratio(0, 1) {
                bail!("r must be positive");
            }
            let report = h_doubling_check(&s, &r, a.n_max)?;
            Outcome::new(report.verdict, report)
        }
    }
}
