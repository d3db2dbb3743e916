//! Load-ratio study: BER at fixed SNR as the user-to-antenna ratio grows.

use crate::error::{Error, Result};
use crate::harness::{run_ber_sweep, BerRecord, SweepConfig};
use crate::result::DetectorId;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadRatioConfig {
    pub detectors: Vec<DetectorId>,
    pub n_rx: usize,
    pub alphas: Vec<f64>,
    pub qam_order: usize,
    pub snr_db: f64,
    pub n_trials: u64,
    pub base_seed: u64,
    pub min_error_events: u64,
    pub lbl_epsilon: f64,
    pub lbl_t_max: usize,
    pub ep_damping: f64,
    pub ep_iterations: usize,
}

/// Per-alpha BER results at a fixed SNR (one record per detector).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadRatioRecord {
    pub alpha: f64,
    pub n_users: usize,
    pub records: Vec<BerRecord>,
}

/// Runs one BER cell per `alpha = K/N` value, with `K = round(alpha * N)`.
pub fn run_load_ratio_study(cfg: &LoadRatioConfig) -> Result<Vec<LoadRatioRecord>> {
    let mut out = Vec::with_capacity(cfg.alphas.len());
    for &alpha in &cfg.alphas {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} must be in (0,1]")));
        }
        let n_users = ((alpha * cfg.n_rx as f64).round() as usize).max(1);
        let sweep = SweepConfig {
            detectors: cfg.detectors.clone(),
            n_rx: cfg.n_rx,
            n_users,
            qam_order: cfg.qam_order,
            snr_grid_db: vec![cfg.snr_db],
            n_trials: cfg.n_trials,
            base_seed: cfg.base_seed,
            lbl_epsilon: cfg.lbl_epsilon,
            lbl_t_max: cfg.lbl_t_max,
            ep_damping: cfg.ep_damping,
            ep_iterations: cfg.ep_iterations,
            min_error_events: cfg.min_error_events,
        };
        out.push(LoadRatioRecord { alpha, n_users, records: run_ber_sweep(&sweep)? });
    }
    Ok(out)
}
