//! Report envelope, input digests and budget overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use drlab::graphs::CertifyConfig;
use drlab::schedule::{build_preset, Schedule, ScheduleFile};
use drlab::Verdict;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const BUDGET_ENV: &str = "DRLAB_BUDGETS";

/// Search budgets; `DRLAB_BUDGETS="nodes=…,subfamilies=…,sets=…"` overrides
/// any subset of them.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Budgets {
    /// Branch-and-bound nodes for colouring searches.
    pub nodes: u64,
    /// Entries per row of the packed cover index.
    pub subfamilies: u64,
    /// Point sets or standard sets enumerated by exhaustive checks.
    pub sets: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { nodes: 50_000_000, subfamilies: 1_000_000, sets: 10_000_000 }
    }
}

impl Budgets {
    pub fn from_env() -> Result<Self> {
        let mut b = Budgets::default();
        let Ok(text) = std::env::var(BUDGET_ENV) else { return Ok(b) };
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) =
                item.split_once('=').with_context(|| format!("{BUDGET_ENV}: expected key=value, got {item:?}"))?;
            let value: u64 = value.trim().parse().with_context(|| format!("{BUDGET_ENV}: bad number in {item:?}"))?;
            if value == 0 {
                bail!("{BUDGET_ENV}: budget {key} must be positive");
            }
            match key.trim() {
                "nodes" => b.nodes = value,
                "subfamilies" => b.subfamilies = value,
                "sets" => b.sets = value,
                other => bail!("{BUDGET_ENV}: unknown budget {other:?} (nodes, subfamilies, sets)"),
            }
        }
        Ok(b)
    }

    pub fn certify_config(&self, seed: u64) -> CertifyConfig {
        CertifyConfig { search_nodes: self.nodes, seed, ..CertifyConfig::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Shared state of one invocation: seed, budgets and the inputs read so far.
pub struct Ctx {
    pub seed: u64,
    pub budgets: Budgets,
    pub schedule_arg: String,
    pub inputs: Vec<InputDigest>,
}

impl Ctx {
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputDigest { path: path.to_path_buf(), sha256: sha256_hex(&bytes) });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T> {
        let text = self.read(path)?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// A preset name, or a path to a schedule file.
    pub fn schedule(&mut self) -> Result<Schedule> {
        let arg = self.schedule_arg.clone();
        let path = Path::new(&arg);
        if path.exists() {
            let file: ScheduleFile = self.read_json(path)?;
            return Ok(file.build(&self.budgets.certify_config(self.seed))?);
        }
        Ok(build_preset(&arg)?)
    }
}

pub struct Outcome {
    pub verdict: Verdict,
    pub result: serde_json::Value,
}

impl Outcome {
    pub fn new(verdict: Verdict, result: impl Serialize) -> Result<Self> {
        Ok(Outcome { verdict, result: serde_json::to_value(result)? })
    }
}

#[derive(Serialize)]
pub struct Report {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub schedule: String,
    pub flags: serde_json::Value,
    pub budgets: Budgets,
    pub inputs: Vec<InputDigest>,
    pub verdict: Verdict,
    pub result: serde_json::Value,
    pub timing_ms: u64,
}
