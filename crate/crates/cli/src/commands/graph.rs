use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Subcommand, ValueEnum};
use drlab::exact::to_pq;
use drlab::graphs::io::GraphFile;
use drlab::graphs::{
    certify, generate_cap_graph, generate_kneser_graph, CapConfig, Graph, KneserGraph, DEFAULT_MATERIALIZATION_CAP,
};
use drlab::Verdict;
use serde::Serialize;
use serde_json::json;

use super::write_json;
use crate::report::{Ctx, Outcome};

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphCmd {
    /// Generate a graph file.
    Gen(GenArgs),
    /// Certify the three level properties for a target `n`.
    Verify(VerifyArgs),
}

impl GraphCmd {
    pub fn name(&self) -> &'static str {
        match self {
            GraphCmd::Gen(_) => "graph gen",
            GraphCmd::Verify(_) => "graph verify",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Kneser,
    Cycle,
    Complete,
    Cap,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Ground set size of a Kneser graph.
    #[arg(long)]
    m: Option<u64>,
    /// Subset size of a Kneser graph.
    #[arg(long)]
    k: Option<u64>,
    /// Vertex count of a cycle or complete graph.
    #[arg(long)]
    n: Option<usize>,
    /// Target `n` a cap graph is built for.
    #[arg(long)]
    target: Option<usize>,
    /// Number of cap points.
    #[arg(long)]
    points: Option<usize>,
    /// Graph file to write; otherwise the graph is embedded in the report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Target `n` (the level's `M`).
    #[arg(long)]
    n: usize,
}

pub fn run(cmd: &GraphCmd, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        GraphCmd::Gen(a) => gen(a, ctx),
        GraphCmd::Verify(a) => verify(a, ctx),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, kind: Kind) -> Result<T> {
    match v {
        Some(v) => Ok(v),
        None => bail!("--{flag} is required for {kind:?} graphs"),
    }
}

fn gen(a: &GenArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let (g, emb) = match a.kind {
        Kind::Kneser => {
            let (m, k) = (need(a.m, "m", a.kind)?, need(a.k, "k", a.kind)?);
            match generate_kneser_graph(m, k, DEFAULT_MATERIALIZATION_CAP)? {
                KneserGraph::Materialized(g) => (g, None),
                KneserGraph::Symbolic { vertex_count, .. } => {
                    return Outcome::new(
                        Verdict::Pass,
                        json!({ "materialized": false, "vertex_count": vertex_count.to_string() }),
                    );
                }
            }
        }
        Kind::Cycle => (Graph::cycle(need(a.n, "n", a.kind)?), None),
        Kind::Complete => (Graph::complete(need(a.n, "n", a.kind)?), None),
        Kind::Cap => {
            let target = need(a.target, "target", a.kind)?;
            let points = need(a.points, "points", a.kind)?;
            let (g, emb) = generate_cap_graph(target, points, ctx.seed, &CapConfig::default())?;
            (g, Some(emb))
        }
    };
    let file = GraphFile::new(&g, emb.as_ref());
    if let Some(path) = &a.out {
        write_json(path, &file)?;
    }
    Outcome::new(
        Verdict::Pass,
        json!({
            "materialized": true,
            "vertex_count": g.vertex_count(),
            "edge_count": g.edge_count(),
            "provenance": g.provenance(),
            "graph": if a.out.is_none() { Some(&file) } else { None },
        }),
    )
}

fn verify(a: &VerifyArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let file: GraphFile = ctx.read_json(&a.input)?;
    let (g, emb) = file.to_graph()?;
    let cert = certify(&g, a.n, emb.as_ref(), &ctx.budgets.certify_config(ctx.seed))?;
    let chi_f = cert.weight.as_ref().map(|w| to_pq(&w.chi_f));
    Outcome::new(
        cert.verdict,
        json!({
            "chi_f": chi_f,
            "size_bound_holds": cert.size_bound_holds(),
            "certificate": cert,
        }),
    )
}
