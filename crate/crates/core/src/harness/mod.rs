//! Deterministic Monte-Carlo experiment engine.
//!
//! Every trial draws fresh bits, channel and noise from its own
//! counter-derived random stream (`stream_id = trial index`), so results are
//! a pure function of the configuration regardless of how trials are
//! scheduled across threads. Within a trial all requested detectors see the
//! identical realization, which makes detector-to-detector comparisons
//! paired.

mod complexity;
mod convergence;
mod load_ratio;
pub mod selftest;
mod stats;

pub use complexity::{run_complexity_study, ComplexityConfig, ComplexityRecord};
pub use convergence::{run_convergence_study, ConvergenceConfig, ConvergenceTrace, IterationStats};
pub use load_ratio::{run_load_ratio_study, LoadRatioConfig, LoadRatioRecord};
pub use selftest::{run_selftest, SelfTestResult};
pub use stats::confidence_interval;

use crate::channel::{sample_channel, snr_to_noise_variance, transmit, ChannelMatrix, NoiseSpec, RngStream};
use crate::constellation::{build_constellation, modulate, Constellation};
use crate::ep::detect_ep;
use crate::error::{Error, Result};
use crate::gram::compute_gram;
use crate::lbl::{detect_lbl, LblConfig};
use crate::linear::{detect_mmse, detect_mrc, detect_zf};
use crate::ml::{detect_ml_with_budget, DEFAULT_ML_BUDGET};
use crate::pic::detect_pic_dsc;
use crate::result::{DetectorId, DetectorResult};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Trials evaluated between early-stop checks; fixed so that results do not
/// depend on the worker count.
const BATCH_TRIALS: u64 = 1024;

/// Full description of a BER sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub detectors: Vec<DetectorId>,
    pub n_rx: usize,
    pub n_users: usize,
    pub qam_order: usize,
    pub snr_grid_db: Vec<f64>,
    pub n_trials: u64,
    pub base_seed: u64,
    pub lbl_epsilon: f64,
    pub lbl_t_max: usize,
    pub ep_damping: f64,
    pub ep_iterations: usize,
    /// Early-stop once every detector in a cell has at least this many bit
    /// error events; 0 disables early stopping.
    pub min_error_events: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            detectors: vec![DetectorId::Mmse, DetectorId::Lbl],
            n_rx: 24,
            n_users: 8,
            qam_order: 4,
            snr_grid_db: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            n_trials: 100_000,
            base_seed: 1,
            lbl_epsilon: 1e-6,
            lbl_t_max: 10,
            ep_damping: 0.9,
            ep_iterations: 10,
            min_error_events: 500,
        }
    }
}

impl SweepConfig {
    pub fn lbl_config(&self) -> LblConfig {
        LblConfig { epsilon: self.lbl_epsilon, t_max: self.lbl_t_max }
    }

    pub fn validate(&self) -> Result<()> {
        if self.detectors.is_empty() {
            return Err(Error::InvalidParameter("detector set is empty".into()));
        }
        if self.n_rx < self.n_users || self.n_users == 0 {
            return Err(Error::InvalidParameter(format!(
                "need N >= K >= 1, got N={} K={}",
                self.n_rx, self.n_users
            )));
        }
        build_constellation(self.qam_order)?;
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidParameter("SNR grid is empty".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("SNR grid must be strictly increasing".into()));
        }
        if self.n_trials < 1 {
            return Err(Error::InvalidParameter("n_trials must be >= 1".into()));
        }
        self.lbl_config().validate()?;
        if !(self.ep_damping > 0.0 && self.ep_damping <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ep_damping {} must be in (0,1]",
                self.ep_damping
            )));
        }
        if self.ep_iterations < 1 {
            return Err(Error::InvalidParameter("ep_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Aggregated error statistics of one (detector, N, K, M, SNR) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub detector: DetectorId,
    pub n_rx: usize,
    pub n_users: usize,
    pub qam_order: usize,
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub ber: f64,
    pub symbol_errors: u64,
    pub mean_iterations: f64,
    pub mean_op_count: f64,
    pub wall_time_s: f64,
}

impl BerRecord {
    /// Equality ignoring the measured wall time.
    pub fn same_statistics(&self, other: &BerRecord) -> bool {
        self.detector == other.detector
            && self.n_rx == other.n_rx
            && self.n_users == other.n_users
            && self.qam_order == other.qam_order
            && self.snr_db == other.snr_db
            && self.trials == other.trials
            && self.bit_errors == other.bit_errors
            && self.bits_total == other.bits_total
            && self.ber == other.ber
            && self.symbol_errors == other.symbol_errors
            && self.mean_iterations == other.mean_iterations
            && self.mean_op_count == other.mean_op_count
    }
}

/// One channel use: source bits, transmitted symbols, channel and received
/// signal.
#[derive(Debug, Clone)]
pub struct TrialRealization {
    pub bits: Vec<u8>,
    pub symbols: Vec<C64>,
    pub channel: ChannelMatrix,
    pub received: Vec<C64>,
    pub sigma2: f64,
}

/// Draws the realization of `trial` deterministically from
/// `(base_seed, trial)`. The same trial index replays the same bits and
/// channel at every SNR; only the noise amplitude changes.
pub fn draw_trial(
    n_rx: usize,
    n_users: usize,
    c: &Constellation,
    sigma2: f64,
    base_seed: u64,
    trial: u64,
) -> Result<TrialRealization> {
    let mut rng = RngStream::new(base_seed, trial).rng();
    let n_bits = n_users * c.bits_per_symbol();
    let bits: Vec<u8> = (0..n_bits).map(|_| rand::Rng::gen_range(&mut rng, 0..2u8)).collect();
    let tx = modulate(&bits, c)?;
    let channel = sample_channel(n_rx, n_users, &mut rng)?;
    let received = transmit(&channel, &tx.symbols, NoiseSpec::new(sigma2)?, &mut rng)?;
    Ok(TrialRealization { bits, symbols: tx.symbols, channel, received, sigma2 })
}

/// Runs one detector on a realization (building the gram cache on demand).
pub fn run_detector(
    id: DetectorId,
    trial: &TrialRealization,
    c: &Constellation,
    lbl_cfg: &LblConfig,
    ep_damping: f64,
    ep_iterations: usize,
) -> Result<DetectorResult> {
    let gram = compute_gram(&trial.channel, &trial.received, trial.sigma2)?;
    match id {
        DetectorId::Mrc => Ok(detect_mrc(&gram, c)),
        DetectorId::Zf => detect_zf(&gram, c),
        DetectorId::Mmse => detect_mmse(&gram, c),
        DetectorId::Pic => Ok(detect_pic_dsc(&gram, c, lbl_cfg.t_max)),
        DetectorId::Ep => detect_ep(&gram, c, ep_damping, ep_iterations),
        DetectorId::Lbl => Ok(detect_lbl(&gram, c, lbl_cfg)),
        DetectorId::Ml => {
            detect_ml_with_budget(&trial.channel, &trial.received, c, DEFAULT_ML_BUDGET)
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CellAccumulator {
    trials: u64,
    bit_errors: u64,
    bits_total: u64,
    symbol_errors: u64,
    iterations_sum: u64,
    op_count_sum: u64,
    wall_nanos: u64,
}

fn bit_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

fn symbol_errors(truth: &[C64], hard: &[C64]) -> u64 {
    truth.iter().zip(hard).filter(|(x, y)| (*x - *y).norm() > 1e-9).count() as u64
}

/// Runs the BER sweep described by `cfg`.
///
/// ML detection is skipped (with a zero-trial warning record per SNR point)
/// when `M^K` exceeds the candidate budget.
pub fn run_ber_sweep(cfg: &SweepConfig) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let c = build_constellation(cfg.qam_order)?;
    let lbl_cfg = cfg.lbl_config();

    let ml_feasible = (cfg.qam_order as u128)
        .checked_pow(cfg.n_users as u32)
        .is_some_and(|needed| needed <= DEFAULT_ML_BUDGET);
    let active: Vec<DetectorId> = cfg
        .detectors
        .iter()
        .copied()
        .filter(|&d| d != DetectorId::Ml || ml_feasible)
        .collect();

    let mut records = Vec::new();
    for &snr_db in &cfg.snr_grid_db {
        let sigma2 = snr_to_noise_variance(snr_db, cfg.n_users, c.average_energy());
        let mut acc = vec![CellAccumulator::default(); active.len()];
        let mut next_trial: u64 = 0;

        while next_trial < cfg.n_trials {
            let end = (next_trial + BATCH_TRIALS).min(cfg.n_trials);
            let batch: Vec<Vec<(u64, u64, u64, u64, u64)>> = (next_trial..end)
                .into_par_iter()
                .map(|trial| -> Result<Vec<(u64, u64, u64, u64, u64)>> {
                    let real =
                        draw_trial(cfg.n_rx, cfg.n_users, &c, sigma2, cfg.base_seed, trial)?;
                    let mut out = Vec::with_capacity(active.len());
                    for &id in &active {
                        let t0 = Instant::now();
                        let r = run_detector(id, &real, &c, &lbl_cfg, cfg.ep_damping, cfg.ep_iterations)?;
                        let nanos = t0.elapsed().as_nanos() as u64;
                        out.push((
                            bit_errors(&real.bits, &r.hard_bits),
                            symbol_errors(&real.symbols, &r.hard_symbols),
                            r.iterations_used as u64,
                            r.op_count,
                            nanos,
                        ));
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?;

            let bits_per_trial = (cfg.n_users * c.bits_per_symbol()) as u64;
            for per_trial in &batch {
                for (a, &(be, se, it, ops, nanos)) in acc.iter_mut().zip(per_trial) {
                    a.trials += 1;
                    a.bit_errors += be;
                    a.bits_total += bits_per_trial;
                    a.symbol_errors += se;
                    a.iterations_sum += it;
                    a.op_count_sum += ops;
                    a.wall_nanos += nanos;
                }
            }
            next_trial = end;

            if cfg.min_error_events > 0
                && acc.iter().all(|a| a.bit_errors >= cfg.min_error_events)
            {
                break;
            }
        }

        for (&id, a) in active.iter().zip(&acc) {
            records.push(BerRecord {
                detector: id,
                n_rx: cfg.n_rx,
                n_users: cfg.n_users,
                qam_order: cfg.qam_order,
                snr_db,
                trials: a.trials,
                bit_errors: a.bit_errors,
                bits_total: a.bits_total,
                ber: if a.bits_total == 0 { 0.0 } else { a.bit_errors as f64 / a.bits_total as f64 },
                symbol_errors: a.symbol_errors,
                mean_iterations: if a.trials == 0 { 0.0 } else { a.iterations_sum as f64 / a.trials as f64 },
                mean_op_count: if a.trials == 0 { 0.0 } else { a.op_count_sum as f64 / a.trials as f64 },
                wall_time_s: a.wall_nanos as f64 * 1e-9,
            });
        }
        if cfg.detectors.contains(&DetectorId::Ml) && !ml_feasible {
            records.push(BerRecord {
                detector: DetectorId::Ml,
                n_rx: cfg.n_rx,
                n_users: cfg.n_users,
                qam_order: cfg.qam_order,
                snr_db,
                trials: 0,
                bit_errors: 0,
                bits_total: 0,
                ber: 0.0,
                symbol_errors: 0,
                mean_iterations: 0.0,
                mean_op_count: 0.0,
                wall_time_s: 0.0,
            });
        }
    }
    Ok(records)
}

/// Log-linear interpolation of the SNR at which a BER curve crosses `level`.
/// The curve is given as `(snr_db, ber)` points in increasing SNR order;
/// returns `None` when the curve never crosses from above to below.
pub fn snr_at_ber(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    for w in curve.windows(2) {
        let (s1, b1) = w[0];
        let (s2, b2) = w[1];
        if b1 >= level && level >= b2 && b1 > 0.0 && b2 > 0.0 {
            let (l1, l2, l) = (b1.log10(), b2.log10(), level.log10());
            return Some(s1 + (s2 - s1) * (l - l1) / (l2 - l1));
        }
    }
    None
}

/// Log-linear interpolation of a BER curve at `snr_db`.
pub fn ber_at_snr(curve: &[(f64, f64)], snr_db: f64) -> Option<f64> {
    for w in curve.windows(2) {
        let (s1, b1) = w[0];
        let (s2, b2) = w[1];
        if s1 <= snr_db && snr_db <= s2 && b1 > 0.0 && b2 > 0.0 {
            let f = (snr_db - s1) / (s2 - s1);
            return Some(10f64.powf(b1.log10() + f * (b2.log10() - b1.log10())));
        }
    }
    None
}

/// Extracts one detector's `(snr, ber)` curve from sweep records.
pub fn curve_of(records: &[BerRecord], id: DetectorId) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.detector == id && r.trials > 0)
        .map(|r| (r.snr_db, r.ber))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pts
}
