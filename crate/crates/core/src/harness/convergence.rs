//! Convergence-behaviour study of the LBL receiver.

use crate::channel::snr_to_noise_variance;
use crate::constellation::build_constellation;
use crate::error::Result;
use crate::gram::compute_gram;
use crate::harness::draw_trial;
use crate::lbl::{detect_lbl_traced, LblConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub n_rx: usize,
    pub n_users: usize,
    pub qam_order: usize,
    pub snr_db: f64,
    pub n_trials: u64,
    pub base_seed: u64,
    pub lbl_epsilon: f64,
    pub lbl_t_max: usize,
}

/// Distribution summary of one iteration's DSC difference norms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationStats {
    /// Iteration index (the first DSC difference exists at t = 2).
    pub t: usize,
    /// Trials that reached this iteration.
    pub n: u64,
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

/// Aggregated convergence trace over many realizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub config: ConvergenceConfig,
    /// `histogram[t-1]` counts trials that stopped after exactly `t`
    /// iterations.
    pub iterations_histogram: Vec<u64>,
    pub median_iterations: f64,
    pub p99_iterations: f64,
    pub max_iterations: usize,
    pub per_iteration: Vec<IterationStats>,
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

fn histogram_percentile(hist: &[u64], total: u64, q: f64) -> f64 {
    let target = (q * total as f64).ceil() as u64;
    let mut seen = 0;
    for (i, &c) in hist.iter().enumerate() {
        seen += c;
        if seen >= target.max(1) {
            return (i + 1) as f64;
        }
    }
    hist.len() as f64
}

/// Runs LBL over `n_trials` independent realizations and aggregates the
/// per-iteration DSC difference norms and the iteration-count distribution.
pub fn run_convergence_study(cfg: &ConvergenceConfig) -> Result<ConvergenceTrace> {
    let c = build_constellation(cfg.qam_order)?;
    let lbl_cfg = LblConfig { epsilon: cfg.lbl_epsilon, t_max: cfg.lbl_t_max };
    lbl_cfg.validate()?;
    let sigma2 = snr_to_noise_variance(cfg.snr_db, cfg.n_users, c.average_energy());

    let per_trial: Vec<(usize, Vec<f64>)> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|trial| -> Result<(usize, Vec<f64>)> {
            let real = draw_trial(cfg.n_rx, cfg.n_users, &c, sigma2, cfg.base_seed, trial)?;
            let gram = compute_gram(&real.channel, &real.received, sigma2)?;
            let (res, trace) = detect_lbl_traced(&gram, &c, &lbl_cfg);
            Ok((res.iterations_used, trace))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut histogram = vec![0u64; cfg.lbl_t_max];
    let mut max_iterations = 0usize;
    for (iters, _) in &per_trial {
        histogram[iters - 1] += 1;
        max_iterations = max_iterations.max(*iters);
    }

    let mut per_iteration = Vec::new();
    for t in 2..=cfg.lbl_t_max {
        let mut diffs: Vec<f64> = per_trial
            .iter()
            .filter_map(|(_, trace)| trace.get(t - 2).copied())
            .collect();
        if diffs.is_empty() {
            break;
        }
        diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = diffs.len() as u64;
        let mean = diffs.iter().sum::<f64>() / n as f64;
        per_iteration.push(IterationStats {
            t,
            n,
            mean,
            p50: percentile_sorted(&diffs, 0.50),
            p90: percentile_sorted(&diffs, 0.90),
            p99: percentile_sorted(&diffs, 0.99),
        });
    }

    Ok(ConvergenceTrace {
        config: cfg.clone(),
        median_iterations: histogram_percentile(&histogram, cfg.n_trials, 0.50),
        p99_iterations: histogram_percentile(&histogram, cfg.n_trials, 0.99),
        max_iterations,
        iterations_histogram: histogram,
        per_iteration,
    })
}
