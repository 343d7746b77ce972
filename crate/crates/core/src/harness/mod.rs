//! Experiment configuration, dispatch, deterministic result emission.

mod config;
mod run;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, Params, Subcommand, Target};
pub use run::run;

use crate::error::Result;
use crate::io::{atomic_write, csv_string, to_json};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Declared in the header of every record whose module works on the
/// truncated periodic interval in place of the half-line or whole line.
pub const PERIODIC_SUBSTITUTION: &str =
    "truncated periodic analogue: (−L, L) with periodic boundary conditions, |n| ≤ N";

/// Two named columns for an external plotter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub x_name: String,
    pub y_name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// One run. Wall time is kept in memory only so the emitted files are a pure
/// function of configuration, seed and version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub subcommand: Subcommand,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substitution: Option<String>,
    pub config: Params,
    pub payload: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub flags: BTreeMap<String, bool>,
    pub accepted: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// A record plus the CSV payloads it produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub tables: Vec<(String, String)>,
}

/// Two-column CSV of the record's sweep, or `None` (with a notice on stderr)
/// when there is nothing to plot.
pub fn emit_plotdata(record: &RunRecord) -> Result<Option<(String, String)>> {
    match &record.sweep {
        Some(s) if !s.x.is_empty() => {
            let body = csv_string(&[&s.x_name, &s.y_name], s.x.iter().zip(&s.y))?;
            Ok(Some((format!("{}_plot.csv", record.subcommand.name()), body)))
        }
        Some(_) => {
            eprintln!("notice: {} sweep is empty, no plot data written", record.subcommand.name());
            Ok(None)
        }
        None => {
            eprintln!("notice: {} has no sweep payload, no plot data written", record.subcommand.name());
            Ok(None)
        }
    }
}

/// Writes the record JSON and, with `csv`, every table plus plot data into
/// `out`. Returns the written paths in order.
pub fn write_outputs(cfg: &ExperimentConfig, output: &RunOutput) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let name = cfg.subcommand.name();
    let path = cfg.out.join(format!("{name}.json"));
    atomic_write(&path, to_json(&output.record)?.as_bytes())?;
    written.push(path);
    if cfg.csv {
        for (file, body) in &output.tables {
            let p = cfg.out.join(file);
            atomic_write(&p, body.as_bytes())?;
            written.push(p);
        }
        if let Some((file, body)) = emit_plotdata(&output.record)? {
            let p = cfg.out.join(file);
            atomic_write(&p, body.as_bytes())?;
            written.push(p);
        }
    }
    Ok(written)
}
