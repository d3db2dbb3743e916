//! Sweep configuration: TOML document merged with command-line flags.
//!
//! Precedence: command-line flag, then config file, then the built-in
//! default (epsilon 1e-6, T_max 10, beta 0.9, 500 error events). Unknown
//! keys in the file are rejected with the offending key in the message.

use clap::Args;
use mudet::harness::SweepConfig;
use mudet::DetectorId;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Keys accepted in the TOML sweep configuration; every field is optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub detectors: Option<Vec<String>>,
    pub n_rx: Option<usize>,
    pub n_users: Option<usize>,
    pub qam_order: Option<usize>,
    pub snr_grid_db: Option<Vec<f64>>,
    pub n_trials: Option<u64>,
    pub base_seed: Option<u64>,
    pub lbl_epsilon: Option<f64>,
    pub lbl_t_max: Option<usize>,
    pub ep_damping: Option<f64>,
    pub ep_iterations: Option<usize>,
    pub min_error_events: Option<u64>,
}

/// Sweep-shaped command-line flags shared by the experiment subcommands.
#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Receive antennas N.
    #[arg(short = 'N', long)]
    pub n_rx: Option<usize>,
    /// Users K.
    #[arg(short = 'K', long)]
    pub n_users: Option<usize>,
    /// QAM order M (4, 16, 64 or 256).
    #[arg(short = 'M', long)]
    pub qam_order: Option<usize>,
    /// SNR grid in dB: comma list "0,2,4" or range "start:step:stop".
    #[arg(long)]
    pub snr: Option<String>,
    /// Comma-separated detector list (mrc, zf, mmse, pic, ep, lbl, ml).
    #[arg(long)]
    pub detectors: Option<String>,
    /// Trial ceiling per SNR point.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Early-stop once every detector has this many bit errors (0 disables).
    #[arg(long)]
    pub min_errors: Option<u64>,
    /// LBL stopping tolerance.
    #[arg(long)]
    pub lbl_epsilon: Option<f64>,
    /// LBL iteration cap.
    #[arg(long)]
    pub lbl_t_max: Option<usize>,
    /// EP damping factor beta.
    #[arg(long)]
    pub ep_beta: Option<f64>,
    /// EP iteration count.
    #[arg(long)]
    pub ep_iterations: Option<usize>,
}

pub fn parse_snr_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("snr range '{spec}' must be start:step:stop"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|e| format!("snr start: {e}"))?;
        let step: f64 = parts[1].trim().parse().map_err(|e| format!("snr step: {e}"))?;
        let stop: f64 = parts[2].trim().parse().map_err(|e| format!("snr stop: {e}"))?;
        if !(step > 0.0) || stop < start {
            return Err(format!("snr range '{spec}' must have step > 0 and stop >= start"));
        }
        let mut grid = Vec::new();
        let mut i = 0u32;
        loop {
            let v = start + step * f64::from(i);
            if v > stop + 1e-9 {
                break;
            }
            grid.push(v);
            i += 1;
        }
        Ok(grid)
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("snr value '{s}': {e}")))
            .collect()
    }
}

fn parse_detectors(spec: &str) -> Result<Vec<DetectorId>, String> {
    spec.split(',').map(|s| DetectorId::from_str(s)).collect()
}

fn load_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
}

/// Builds the validated sweep configuration from flags, the optional config
/// file and defaults. `seed` is the already-resolved base seed, if any.
pub fn parse_config(args: &SweepArgs, seed: Option<u64>) -> Result<SweepConfig, String> {
    let file = match &args.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let mut cfg = SweepConfig::default();

    if let Some(v) = &file.detectors {
        cfg.detectors = v
            .iter()
            .map(|s| DetectorId::from_str(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("detectors: {e}"))?;
    }
    if let Some(v) = file.n_rx {
        cfg.n_rx = v;
    }
    if let Some(v) = file.n_users {
        cfg.n_users = v;
    }
    if let Some(v) = file.qam_order {
        cfg.qam_order = v;
    }
    if let Some(v) = file.snr_grid_db {
        cfg.snr_grid_db = v;
    }
    if let Some(v) = file.n_trials {
        cfg.n_trials = v;
    }
    if let Some(v) = file.base_seed {
        cfg.base_seed = v;
    }
    if let Some(v) = file.lbl_epsilon {
        cfg.lbl_epsilon = v;
    }
    if let Some(v) = file.lbl_t_max {
        cfg.lbl_t_max = v;
    }
    if let Some(v) = file.ep_damping {
        cfg.ep_damping = v;
    }
    if let Some(v) = file.ep_iterations {
        cfg.ep_iterations = v;
    }
    if let Some(v) = file.min_error_events {
        cfg.min_error_events = v;
    }

    if let Some(v) = &args.detectors {
        cfg.detectors = parse_detectors(v)?;
    }
    if let Some(v) = args.n_rx {
        cfg.n_rx = v;
    }
    if let Some(v) = args.n_users {
        cfg.n_users = v;
    }
    if let Some(v) = args.qam_order {
        cfg.qam_order = v;
    }
    if let Some(v) = &args.snr {
        cfg.snr_grid_db = parse_snr_grid(v)?;
    }
    if let Some(v) = args.trials {
        cfg.n_trials = v;
    }
    if let Some(v) = args.min_errors {
        cfg.min_error_events = v;
    }
    if let Some(v) = args.lbl_epsilon {
        cfg.lbl_epsilon = v;
    }
    if let Some(v) = args.lbl_t_max {
        cfg.lbl_t_max = v;
    }
    if let Some(v) = args.ep_beta {
        cfg.ep_damping = v;
    }
    if let Some(v) = args.ep_iterations {
        cfg.ep_iterations = v;
    }
    if let Some(v) = seed {
        cfg.base_seed = v;
    }

    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}
