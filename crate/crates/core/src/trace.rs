//! CSV serialization of solver traces.
//!
//! Layout: `#`-prefixed metadata lines, one header row
//! `k,f_xy,f_hat,res_x,res_y,dist_x,dist_y,gap,tau,sigma,alpha,beta`,
//! then one row per iteration. Floats print with 17 significant digits,
//! so parsing a written trace reproduces every `f64` bit-exactly.
//! Optional fields are empty between commas. No timestamps: identical
//! runs emit identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::solver::IterateRecord;
use crate::{Error, Result};

pub const TRACE_HEADER: &str = "k,f_xy,f_hat,res_x,res_y,dist_x,dist_y,gap,tau,sigma,alpha,beta";
const FORMAT_TAG: &str = "apmm-trace-v1";

/// Run provenance carried at the top of a trace file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceMetadata {
    /// Problem identity string (kind plus shape/seed).
    pub problem: String,
    /// Schedule label, e.g. `paper_experiment` or `cp:4`.
    pub schedule: String,
    /// Seed recorded verbatim from the run configuration.
    pub seed: Option<u64>,
    /// Requested iteration budget.
    pub iters: usize,
    /// Operator-norm estimate the schedule was built against.
    pub norm_k: Option<f64>,
    /// Inexact-prox disclosure (e.g. Dykstra tolerance for the lasso dual
    /// ball).
    pub prox_note: Option<String>,
    pub reference_value: Option<f64>,
    pub reference_provenance: Option<String>,
    /// Present when the run stopped early; human-readable reason.
    pub aborted: Option<String>,
}

/// A finished run: metadata plus per-iteration records.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterateTrace {
    pub metadata: TraceMetadata,
    pub records: Vec<IterateRecord>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl IterateTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(out, "# {FORMAT_TAG}");
        let _ = writeln!(out, "# problem: {}", m.problem);
        let _ = writeln!(out, "# schedule: {}", m.schedule);
        if let Some(seed) = m.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        let _ = writeln!(out, "# iters: {}", m.iters);
        if let Some(norm) = m.norm_k {
            let _ = writeln!(out, "# norm_k: {}", fmt_f64(norm));
        }
        if let Some(note) = &m.prox_note {
            let _ = writeln!(out, "# prox_tol: {note}");
        }
        if let Some(value) = m.reference_value {
            let _ = writeln!(out, "# reference_value: {}", fmt_f64(value));
        }
        if let Some(provenance) = &m.reference_provenance {
            let _ = writeln!(out, "# reference_provenance: {provenance}");
        }
        if let Some(reason) = &m.aborted {
            let _ = writeln!(out, "# aborted: {reason}");
        }
        let _ = writeln!(out, "{TRACE_HEADER}");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.k,
                fmt_f64(r.f_xy),
                fmt_f64(r.f_hat),
                fmt_f64(r.res_x),
                fmt_f64(r.res_y),
                fmt_opt(r.dist_x),
                fmt_opt(r.dist_y),
                fmt_opt(r.gap),
                fmt_f64(r.tau),
                fmt_f64(r.sigma),
                fmt_f64(r.alpha),
                fmt_f64(r.beta),
            );
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<IterateTrace> {
        let mut metadata = TraceMetadata::default();
        let mut records = Vec::new();
        let mut saw_header = false;
        let mut saw_tag = false;

        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if comment == FORMAT_TAG {
                    saw_tag = true;
                    continue;
                }
                if let Some((key, value)) = comment.split_once(':') {
                    let value = value.trim();
                    match key.trim() {
                        "problem" => metadata.problem = value.to_string(),
                        "schedule" => metadata.schedule = value.to_string(),
                        "seed" => {
                            metadata.seed = Some(value.parse().map_err(|e| {
                                Error::Parse(format!("line {}: bad seed: {e}", line_no + 1))
                            })?)
                        }
                        "iters" => {
                            metadata.iters = value.parse().map_err(|e| {
                                Error::Parse(format!("line {}: bad iters: {e}", line_no + 1))
                            })?
                        }
                        "norm_k" => metadata.norm_k = Some(parse_f64(value, line_no)?),
                        "prox_tol" => metadata.prox_note = Some(value.to_string()),
                        "reference_value" => {
                            metadata.reference_value = Some(parse_f64(value, line_no)?)
                        }
                        "reference_provenance" => {
                            metadata.reference_provenance = Some(value.to_string())
                        }
                        "aborted" => metadata.aborted = Some(value.to_string()),
                        _ => {} // unknown metadata is ignored, not fatal
                    }
                }
                continue;
            }
            if !saw_header {
                if line != TRACE_HEADER {
                    return Err(Error::Parse(format!(
                        "line {}: expected header `{TRACE_HEADER}`, got `{line}`",
                        line_no + 1
                    )));
                }
                saw_header = true;
                continue;
            }
            records.push(parse_record(line, line_no)?);
        }

        if !saw_tag {
            return Err(Error::Parse(format!("missing `# {FORMAT_TAG}` marker")));
        }
        if !saw_header {
            return Err(Error::Parse("missing column header row".into()));
        }
        Ok(IterateTrace { metadata, records })
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<IterateTrace> {
        let text = std::fs::read_to_string(path)?;
        IterateTrace::parse_csv(&text)
    }
}

fn parse_f64(token: &str, line_no: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {}: bad float `{token}`: {e}", line_no + 1)))
}

fn parse_opt_f64(token: &str, line_no: usize) -> Result<Option<f64>> {
    if token.is_empty() {
        Ok(None)
    } else {
        parse_f64(token, line_no).map(Some)
    }
}

fn parse_record(line: &str, line_no: usize) -> Result<IterateRecord> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 12 {
        return Err(Error::Parse(format!(
            "line {}: expected 12 fields, got {}",
            line_no + 1,
            fields.len()
        )));
    }
    Ok(IterateRecord {
        k: fields[0]
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: bad k `{}`: {e}", line_no + 1, fields[0])))?,
        f_xy: parse_f64(fields[1], line_no)?,
        f_hat: parse_f64(fields[2], line_no)?,
        res_x: parse_f64(fields[3], line_no)?,
        res_y: parse_f64(fields[4], line_no)?,
        dist_x: parse_opt_f64(fields[5], line_no)?,
        dist_y: parse_opt_f64(fields[6], line_no)?,
        gap: parse_opt_f64(fields[7], line_no)?,
        tau: parse_f64(fields[8], line_no)?,
        sigma: parse_f64(fields[9], line_no)?,
        alpha: parse_f64(fields[10], line_no)?,
        beta: parse_f64(fields[11], line_no)?,
    })
}
