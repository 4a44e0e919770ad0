//! `drlab`: one subcommand per laboratory operation, each emitting a JSON
//! report. Exit status: 0 pass, 1 fail, 2 indeterminate or budget
//! exhausted, 3 invalid input or usage error.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use drlab::Verdict;

use commands::{graph, measure, schedule, slalom, space, tukey};
use report::{Budgets, Ctx, Outcome, Report};

#[derive(Parser, Debug)]
#[command(name = "drlab", version, about = "Exact-arithmetic laboratory for the Davies-Rogers measure space")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,

    /// Schedule preset (faithful-small, toy-c5, toy-k2) or schedule file.
    #[arg(long, global = true, default_value = "faithful-small")]
    schedule: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Level graphs and their certificates.
    #[command(subcommand)]
    Graph(graph::GraphCmd),
    /// The growth schedule and its ratios.
    #[command(subcommand)]
    Schedule(schedule::ScheduleCmd),
    /// The truncated product space and its metric.
    #[command(subcommand)]
    Space(space::SpaceCmd),
    /// Optimal covers, null witnesses and bounds.
    #[command(subcommand)]
    Measure(measure::MeasureCmd),
    /// Slaloms, interval partitions and the parameter recursion.
    #[command(subcommand)]
    Slalom(slalom::SlalomCmd),
    /// Finite metric spaces and the reduction to the null ideal.
    #[command(subcommand)]
    Tukey(tukey::TukeyCmd),
}

fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Indeterminate => 2,
    }
}

fn error_code(e: &anyhow::Error) -> u8 {
    use drlab::Error;
    match e.downcast_ref::<Error>() {
        Some(Error::Verification(_)) => 1,
        Some(Error::BudgetExhausted(_) | Error::Indeterminate(_)) => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<u8> {
    let start = Instant::now();
    let mut ctx =
        Ctx { seed: cli.seed, budgets: Budgets::from_env()?, schedule_arg: cli.schedule.clone(), inputs: Vec::new() };
    let (name, flags, outcome): (&str, serde_json::Value, Result<Outcome>) = match &cli.command {
        Command::Graph(c) => (c.name(), serde_json::to_value(c)?, graph::run(c, &mut ctx)),
        Command::Schedule(c) => (c.name(), serde_json::to_value(c)?, schedule::run(c, &mut ctx)),
        Command::Space(c) => (c.name(), serde_json::to_value(c)?, space::run(c, &mut ctx)),
        Command::Measure(c) => (c.name(), serde_json::to_value(c)?, measure::run(c, &mut ctx)),
        Command::Slalom(c) => (c.name(), serde_json::to_value(c)?, slalom::run(c, &mut ctx)),
        Command::Tukey(c) => (c.name(), serde_json::to_value(c)?, tukey::run(c, &mut ctx)),
    };
    let outcome = outcome?;
    let report = Report {
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION"),
        seed: ctx.seed,
        schedule: ctx.schedule_arg.clone(),
        flags,
        budgets: ctx.budgets,
        inputs: ctx.inputs,
        verdict: outcome.verdict,
        result: outcome.result,
        timing_ms: start.elapsed().as_millis() as u64,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    let line = match &cli.json_out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            format!("{name}: {:?}\n", report.verdict)
        }
        None => text,
    };
    match std::io::stdout().lock().write_all(line.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    Ok(exit_code(report.verdict))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
