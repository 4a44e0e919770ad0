//! Subcommand handlers.

pub mod graph;
pub mod measure;
pub mod schedule;
pub mod slalom;
pub mod space;
pub mod tukey;

use std::str::FromStr;

use anyhow::{Context, Result};
use drlab::exact::parse_pq;
use drlab::ExactScalar;

/// Comma-separated values.
pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().with_context(|| format!("bad list item {s:?}")))
        .collect()
}

/// Comma-separated `"p/q"` values.
pub fn parse_rationals(text: &str) -> Result<Vec<ExactScalar>> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| Ok(parse_pq(s)?)).collect()
}

pub fn write_json(path: &std::path::Path, value: &impl serde::Serialize) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}
