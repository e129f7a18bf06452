//! CSV and run-manifest files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::aggregate::AggregateTrace;
use crate::harness::run::ExperimentOutcome;

pub const CSV_HEADER: &str = "round,mean_cum_regret,std_cum_regret";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| io_err(dir, e)),
        _ => Ok(()),
    }
}

/// Renders the aggregate as CSV text. Numbers carry 17 significant digits,
/// enough to reproduce every f64 exactly.
pub fn csv_string(aggregate: &AggregateTrace) -> String {
    let mut out = String::with_capacity(48 * (aggregate.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, (m, s)) in aggregate.mean.iter().zip(&aggregate.std).enumerate() {
        out.push_str(&format!("{},{:.16e},{:.16e}\n", i + 1, m, s));
    }
    out
}

/// Writes the aggregate to `path`. Nothing is created for an empty aggregate.
pub fn emit_csv(aggregate: &AggregateTrace, path: &Path) -> Result<()> {
    if aggregate.is_empty() || aggregate.runs == 0 {
        return Err(Error::Aggregation("refusing to write an empty aggregate".into()));
    }
    create_parent(path)?;
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(csv_string(aggregate).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_err(path, e))
}

/// Parses a file written by [`emit_csv`]. The run count is not stored and
/// comes back as 0.
pub fn read_csv(path: &Path) -> Result<AggregateTrace> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<AggregateTrace> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Aggregation("missing or malformed CSV header".into()));
    }
    let mut mean = Vec::new();
    let mut std = Vec::new();
    for (i, line) in lines.enumerate() {
        let bad = || Error::Aggregation(format!("malformed CSV row {}: '{line}'", i + 1));
        let mut cols = line.split(',');
        let round: usize = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        if round != i + 1 {
            return Err(bad());
        }
        let m: f64 = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        let s: f64 = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        if cols.next().is_some() {
            return Err(bad());
        }
        mean.push(m);
        std.push(s);
    }
    Ok(AggregateTrace { mean, std, runs: 0 })
}

/// Serializes u64 values as decimal strings; TOML integers stop at i64::MAX.
pub mod decimal_u64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize)]
struct Derived {
    eta: f64,
    mu: f64,
    vacdb_layers: usize,
}

#[derive(Serialize)]
struct RunEntry {
    run: usize,
    key: String,
    instance_fingerprint: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_regret: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a crate::harness::config::ExperimentConfig,
    derived: Derived,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
    runs: Vec<RunEntry>,
}

/// The manifest as TOML text: resolved config, derived hyperparameters, and
/// one entry per run with its seed key and instance hash.
pub fn manifest_string(outcome: &ExperimentOutcome, csv: Option<&Path>) -> Result<String> {
    let config = &outcome.config;
    let manifest = Manifest {
        config,
        derived: Derived {
            eta: config.eta(),
            mu: config.mu(),
            vacdb_layers: config.layers(),
        },
        csv: csv.map(|p| p.display().to_string()),
        runs: outcome
            .runs
            .iter()
            .map(|r| RunEntry {
                run: r.run,
                key: format!("{:016x}", r.key),
                instance_fingerprint: format!("{:016x}", r.instance_fingerprint),
                status: if r.result.is_ok() { "ok" } else { "failed" },
                final_regret: r.result.as_ref().ok().map(|rep| rep.trace.final_regret()),
                error: r.result.as_ref().err().cloned(),
            })
            .collect(),
    };
    toml::to_string(&manifest).map_err(|e| Error::Internal(format!("manifest serialization: {e}")))
}

pub fn write_manifest(outcome: &ExperimentOutcome, path: &Path, csv: Option<&Path>) -> Result<()> {
    let text = manifest_string(outcome, csv)?;
    create_parent(path)?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// `out.csv` → `out.manifest.toml`.
pub fn manifest_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("manifest.toml")
}
