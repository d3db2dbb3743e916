//! Result serialization: CSV and JSON-lines with an embedded run manifest.
//!
//! Real numbers are written with 17 significant digits so parsing them back
//! reproduces the exact f64 values.

use chrono::{DateTime, Utc};
use mudet::harness::{confidence_interval, BerRecord, SweepConfig};
use mudet::DetectorId;
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "detector,N,K,M,snr_db,trials,bit_errors,bits_total,ber,ber_lo,ber_hi,mean_iterations,mean_op_count,wall_time_s";

/// Output formats of the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    #[value(name = "json-lines", alias = "jsonl")]
    JsonLines,
}

/// Run metadata embedded in every output document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub revision: String,
    pub command: String,
    pub started_utc: String,
    pub finished_utc: String,
    pub wall_time_s: f64,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: serde_json::Value,
        started: DateTime<Utc>,
        finished: DateTime<Utc>,
    ) -> Self {
        Self {
            tool: "mudet".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            revision: option_env!("MUDET_BUILD_REV").unwrap_or("unreleased").into(),
            command: command.into(),
            started_utc: started.to_rfc3339(),
            finished_utc: finished.to_rfc3339(),
            wall_time_s: (finished - started).num_milliseconds() as f64 / 1e3,
            config,
        }
    }

    pub fn for_sweep(command: &str, cfg: &SweepConfig, started: DateTime<Utc>) -> Self {
        Self::new(command, serde_json::to_value(cfg).unwrap(), started, Utc::now())
    }
}

/// One emitted result row; mirrors the CSV columns exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub detector: DetectorId,
    #[serde(rename = "N")]
    pub n_rx: usize,
    #[serde(rename = "K")]
    pub n_users: usize,
    #[serde(rename = "M")]
    pub qam_order: usize,
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub ber: f64,
    pub ber_lo: f64,
    pub ber_hi: f64,
    pub mean_iterations: f64,
    pub mean_op_count: f64,
    pub wall_time_s: f64,
}

impl From<&BerRecord> for ResultRow {
    fn from(r: &BerRecord) -> Self {
        let (ber_lo, ber_hi) = if r.bits_total > 0 {
            confidence_interval(r.bit_errors, r.bits_total)
        } else {
            (0.0, 1.0) // no observations: vacuous interval
        };
        Self {
            detector: r.detector,
            n_rx: r.n_rx,
            n_users: r.n_users,
            qam_order: r.qam_order,
            snr_db: r.snr_db,
            trials: r.trials,
            bit_errors: r.bit_errors,
            bits_total: r.bits_total,
            ber: r.ber,
            ber_lo,
            ber_hi,
            mean_iterations: r.mean_iterations,
            mean_op_count: r.mean_op_count,
            wall_time_s: r.wall_time_s,
        }
    }
}

/// Full-precision decimal form of an f64 (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn manifest_comment_lines(manifest: &RunManifest) -> String {
    let json = serde_json::to_string(manifest).unwrap();
    format!("# manifest: {json}\n")
}

/// Serializes rows (with the manifest) in the requested format.
///
/// CSV places the manifest on a leading `#` comment line followed by the
/// fixed header; JSON-lines emits the manifest object first and then one
/// object per row with the same field names as the CSV columns.
pub fn emit_results(
    rows: &[ResultRow],
    manifest: &RunManifest,
    format: OutputFormat,
) -> Result<String, String> {
    if rows.is_empty() {
        return Err("no result records to emit".into());
    }
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str(&manifest_comment_lines(manifest));
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.detector,
                    r.n_rx,
                    r.n_users,
                    r.qam_order,
                    fmt_f64(r.snr_db),
                    r.trials,
                    r.bit_errors,
                    r.bits_total,
                    fmt_f64(r.ber),
                    fmt_f64(r.ber_lo),
                    fmt_f64(r.ber_hi),
                    fmt_f64(r.mean_iterations),
                    fmt_f64(r.mean_op_count),
                    fmt_f64(r.wall_time_s),
                ));
            }
        }
        OutputFormat::JsonLines => {
            out.push_str(&serde_json::to_string(&serde_json::json!({ "manifest": manifest })).unwrap());
            out.push('\n');
            for r in rows {
                out.push_str(&serde_json::to_string(r).unwrap());
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Parses a document produced by [`emit_results`]; the inverse of emission,
/// used by the round-trip tests.
#[cfg(test)]
pub fn parse_results(doc: &str, format: OutputFormat) -> Result<Vec<ResultRow>, String> {
    use std::str::FromStr;
    let mut rows = Vec::new();
    match format {
        OutputFormat::Csv => {
            for line in doc.lines() {
                if line.starts_with('#') || line.is_empty() || line == CSV_HEADER {
                    continue;
                }
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 14 {
                    return Err(format!("expected 14 CSV fields, got {}: {line}", f.len()));
                }
                let num = |i: usize| -> Result<f64, String> {
                    f[i].parse::<f64>().map_err(|e| format!("field {i}: {e}"))
                };
                let int = |i: usize| -> Result<u64, String> {
                    f[i].parse::<u64>().map_err(|e| format!("field {i}: {e}"))
                };
                rows.push(ResultRow {
                    detector: DetectorId::from_str(f[0])?,
                    n_rx: int(1)? as usize,
                    n_users: int(2)? as usize,
                    qam_order: int(3)? as usize,
                    snr_db: num(4)?,
                    trials: int(5)?,
                    bit_errors: int(6)?,
                    bits_total: int(7)?,
                    ber: num(8)?,
                    ber_lo: num(9)?,
                    ber_hi: num(10)?,
                    mean_iterations: num(11)?,
                    mean_op_count: num(12)?,
                    wall_time_s: num(13)?,
                });
            }
        }
        OutputFormat::JsonLines => {
            for line in doc.lines() {
                if line.is_empty() {
                    continue;
                }
                let v: serde_json::Value =
                    serde_json::from_str(line).map_err(|e| e.to_string())?;
                if v.get("manifest").is_some() {
                    continue;
                }
                rows.push(serde_json::from_value(v).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(rows)
}
