//! Config-file handling: a JSON file mirrors the command-line fields and
//! command-line flags override it. The seed falls back to `APMM_SEED`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ScheduleField {
    One(String),
    Many(Vec<String>),
}

impl ScheduleField {
    pub fn into_list(self) -> Vec<String> {
        match self {
            ScheduleField::One(s) => split_schedule_list(&s),
            ScheduleField::Many(v) => v,
        }
    }
}

/// Split a comma-separated schedule list. `constant:` selectors carry
/// commas of their own, so segments that do not start a new selector are
/// re-attached to the previous one.
pub fn split_schedule_list(text: &str) -> Vec<String> {
    const PREFIXES: [&str; 7] =
        ["paper", "theorem", "cp:", "file:", "constant:", "paper_experiment", "theorem_exact"];
    let mut out: Vec<String> = Vec::new();
    for raw in text.split(',') {
        let part = raw.trim();
        if part.is_empty() {
            continue;
        }
        let starts_selector = PREFIXES.iter().any(|p| part == *p || part.starts_with(p));
        match out.last_mut() {
            Some(prev) if !starts_selector => {
                prev.push(',');
                prev.push_str(part);
            }
            _ => out.push(part.to_string()),
        }
    }
    out
}

/// On-disk experiment configuration; every field optional so flags can
/// fill the gaps.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: Option<String>,
    pub schedule: Option<ScheduleField>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub gap_box_radius: Option<f64>,
    pub lyapunov: Option<bool>,
    pub distances: Option<bool>,
    pub samples: Option<usize>,
    pub cert_tol: Option<f64>,
    pub horizon: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<ConfigFile, Failure> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("bad config {}: {e}", path.display())))
    }
}

/// Seed resolution order: flag, config file, `APMM_SEED`, 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = file {
        return Ok(s);
    }
    match std::env::var("APMM_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|e| Failure::Config(format!("APMM_SEED must be an unsigned integer: {e}"))),
        Err(_) => Ok(0),
    }
}

/// Iteration budgets must be at least 1.
pub fn resolve_iters(flag: Option<usize>, file: Option<usize>) -> Result<usize, Failure> {
    let iters = flag
        .or(file)
        .ok_or_else(|| Failure::Config("missing --iters (or `iters` in the config file)".into()))?;
    if iters == 0 {
        return Err(Failure::Config("--iters must be at least 1".into()));
    }
    Ok(iters)
}
