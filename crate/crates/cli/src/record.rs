//! Append-only JSON-lines log of CLI invocations, `runs.jsonl` in the output directory.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const RUN_LOG: &str = "runs.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub tool_version: String,
    pub baseline_version: u32,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    /// Base-sample generator, for commands that sample.
    pub sampler: Option<String>,
    pub threads: usize,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub evaluations: usize,
    pub failures: usize,
    pub manifest: Vec<String>,
    /// `ok`, or the error class.
    pub status: String,
    pub exit_code: i32,
    pub message: Option<String>,
}

/// Counters and stage timings collected while a command runs.
#[derive(Debug, Default)]
pub struct Stats {
    pub timings: BTreeMap<String, f64>,
    pub evaluations: usize,
    pub failures: usize,
    pub seed: Option<u64>,
    pub sampler: Option<String>,
}

impl Stats {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        *self.timings.entry(stage.to_string()).or_default() += t.elapsed().as_secs_f64();
        out
    }
}

pub fn append(dir: &Path, record: &RunRecord) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut f = OpenOptions::new().create(true).append(true).open(dir.join(RUN_LOG))?;
    let mut line = serde_json::to_string(record)?;
    line.push('\n');
    f.write_all(line.as_bytes())?;
    Ok(())
}

/// All records in file order. Unparseable lines are an error.
pub fn read_all(dir: &Path) -> Result<Vec<RunRecord>, CliError> {
    let path = dir.join(RUN_LOG);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CliError::Io(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}
