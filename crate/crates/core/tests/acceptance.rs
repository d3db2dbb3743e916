//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS/FAIL line with the measured quantities.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! measurements.

use mudet::harness::{
    ber_at_snr, curve_of, run_ber_sweep, run_complexity_study, run_convergence_study,
    run_load_ratio_study, run_selftest, snr_at_ber, ComplexityConfig, ConvergenceConfig,
    LoadRatioConfig, SweepConfig,
};
use mudet::{
    build_constellation, compute_gram, detect_ep, detect_lbl, detect_ml, snr_to_noise_variance,
    DetectorId, LblConfig,
};

fn verdict(pass: bool, line: &str) {
    println!("{}: {line}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{line}");
}

/// Criterion 1: near-ML reliability at N=24, K=8, M=4. At the SNR where ML
/// reaches BER 1e-3, LBL's BER is within 1.5x of ML's, and LBL's SNR at BER
/// 1e-3 is within 0.5 dB of EP's.
#[test]
fn criterion_1_near_ml_reliability() {
    let cfg = SweepConfig {
        detectors: vec![DetectorId::Ml, DetectorId::Ep, DetectorId::Lbl],
        n_rx: 24,
        n_users: 8,
        qam_order: 4,
        snr_grid_db: vec![4.0, 4.75, 5.5, 6.25, 7.0],
        n_trials: 400_000,
        base_seed: 20240801,
        min_error_events: 500,
        ..SweepConfig::default()
    };
    let records = run_ber_sweep(&cfg).unwrap();
    let ml = curve_of(&records, DetectorId::Ml);
    let ep = curve_of(&records, DetectorId::Ep);
    let lbl = curve_of(&records, DetectorId::Lbl);

    let snr_ml = snr_at_ber(&ml, 1e-3).expect("ML curve must cross 1e-3");
    let lbl_at_ml = ber_at_snr(&lbl, snr_ml).expect("LBL curve must cover the ML crossing");
    let snr_lbl = snr_at_ber(&lbl, 1e-3).expect("LBL curve must cross 1e-3");
    let snr_ep = snr_at_ber(&ep, 1e-3).expect("EP curve must cross 1e-3");

    let factor = lbl_at_ml / 1e-3;
    let gap = (snr_lbl - snr_ep).abs();
    verdict(
        factor <= 1.5 && gap <= 0.5,
        &format!(
            "criterion 1 (near-ML): BER(LBL)/BER(ML) at ML@1e-3 = {factor:.3} (<= 1.5); \
             |SNR(LBL@1e-3) - SNR(EP@1e-3)| = {gap:.3} dB (<= 0.5)"
        ),
    );
}

/// Criterion 2: LBL reaches BER 1e-4 at least 1.5 dB earlier than MMSE on the
/// same realizations at N=24, K=8, M=4.
#[test]
fn criterion_2_linear_receiver_gain() {
    let cfg = SweepConfig {
        detectors: vec![DetectorId::Mmse, DetectorId::Lbl],
        n_rx: 24,
        n_users: 8,
        qam_order: 4,
        snr_grid_db: vec![6.5, 7.5, 8.5, 9.5],
        n_trials: 2_000_000,
        base_seed: 20240802,
        min_error_events: 1000,
        ..SweepConfig::default()
    };
    let records = run_ber_sweep(&cfg).unwrap();
    let mmse = curve_of(&records, DetectorId::Mmse);
    let lbl = curve_of(&records, DetectorId::Lbl);
    let snr_mmse = snr_at_ber(&mmse, 1e-4).expect("MMSE curve must cross 1e-4");
    let snr_lbl = snr_at_ber(&lbl, 1e-4).expect("LBL curve must cross 1e-4");
    let gain = snr_mmse - snr_lbl;
    verdict(
        gain >= 1.5,
        &format!(
            "criterion 2 (gain over MMSE): SNR(MMSE@1e-4) = {snr_mmse:.3} dB, \
             SNR(LBL@1e-4) = {snr_lbl:.3} dB, gain = {gain:.3} dB (>= 1.5)"
        ),
    );
}

/// Criterion 3: with epsilon=1e-6 and T_max=10 the iteration count stays
/// small: 99th percentile <= 8 and median <= 6 at both paper configurations.
#[test]
fn criterion_3_convergence() {
    let mut all_pass = true;
    let mut details = Vec::new();
    for (n, k) in [(24usize, 8usize), (192, 64)] {
        let cfg = ConvergenceConfig {
            n_rx: n,
            n_users: k,
            qam_order: 4,
            snr_db: 10.0,
            n_trials: 10_000,
            base_seed: 20240803,
            lbl_epsilon: 1e-6,
            lbl_t_max: 10,
        };
        let trace = run_convergence_study(&cfg).unwrap();
        let ok = trace.p99_iterations <= 8.0 && trace.median_iterations <= 6.0;
        all_pass &= ok;
        details.push(format!(
            "({n},{k}): median = {}, p99 = {}, max = {}",
            trace.median_iterations, trace.p99_iterations, trace.max_iterations
        ));
    }
    verdict(
        all_pass,
        &format!("criterion 3 (convergence, 1e4 trials @10 dB): {}", details.join("; ")),
    );
}

/// Criterion 4: instrumented op counts at (192,64,T=10) give MMSE/LBL >= 15
/// and EP/LBL >= 100.
#[test]
fn criterion_4_complexity_ratios() {
    let configs: Vec<ComplexityConfig> = [DetectorId::Lbl, DetectorId::Mmse, DetectorId::Ep]
        .into_iter()
        .map(|detector| ComplexityConfig {
            detector,
            n_rx: 192,
            n_users: 64,
            qam_order: 4,
            iterations: 10,
        })
        .collect();
    let recs = run_complexity_study(&configs, 20240804, 4).unwrap();
    let lbl = recs[0].mean_op_count;
    let mmse = recs[1].mean_op_count;
    let ep = recs[2].mean_op_count;
    let r_mmse = mmse / lbl;
    let r_ep = ep / lbl;
    let no_inversion = recs[0].mean_factorizations == 0.0;
    verdict(
        r_mmse >= 15.0 && r_ep >= 100.0 && no_inversion,
        &format!(
            "criterion 4 (complexity @192x64,T=10): MMSE/LBL = {r_mmse:.1} (>= 15), \
             EP/LBL = {r_ep:.1} (>= 100), LBL factorizations = {}",
            recs[0].mean_factorizations
        ),
    );
}

/// Criterion 5: LBL op count scales as O(NKT): doubling N and K together
/// multiplies the count by 4 within 10%.
#[test]
fn criterion_5_scaling_law() {
    let mk = |n, k| ComplexityConfig {
        detector: DetectorId::Lbl,
        n_rx: n,
        n_users: k,
        qam_order: 4,
        iterations: 10,
    };
    let recs = run_complexity_study(&[mk(96, 32), mk(192, 64)], 20240805, 4).unwrap();
    let ratio = recs[1].mean_op_count / recs[0].mean_op_count;
    verdict(
        (ratio - 4.0).abs() / 4.0 <= 0.10,
        &format!("criterion 5 (O(NKT) scaling): count(192,64)/count(96,32) = {ratio:.3} (= 4 +/- 10%)"),
    );
}

/// Criterion 6: oracle equivalence. At K=2, M=4, 12 dB over 1e4 paired
/// trials, LBL and EP symbol-error counts stay within 1.2x of ML's; at K=1
/// LBL hard decisions equal ML's on every realization.
#[test]
fn criterion_6_oracle_equivalence() {
    let c = build_constellation(4).unwrap();
    let lbl_cfg = LblConfig::default();

    // K=2 paired comparison at N=8
    let (n_rx, n_users) = (8usize, 2usize);
    let sigma2 = snr_to_noise_variance(12.0, n_users, c.average_energy());
    let (mut se_ml, mut se_ep, mut se_lbl) = (0u64, 0u64, 0u64);
    for trial in 0..10_000u64 {
        let real =
            mudet::harness::draw_trial(n_rx, n_users, &c, sigma2, 20240806, trial).unwrap();
        let gram = compute_gram(&real.channel, &real.received, sigma2).unwrap();
        let ml = detect_ml(&real.channel, &real.received, &c).unwrap();
        let ep = detect_ep(&gram, &c, 0.9, 10).unwrap();
        let lbl = detect_lbl(&gram, &c, &lbl_cfg);
        for k in 0..n_users {
            let truth = real.symbols[k];
            se_ml += u64::from((ml.hard_symbols[k] - truth).norm() > 1e-9);
            se_ep += u64::from((ep.hard_symbols[k] - truth).norm() > 1e-9);
            se_lbl += u64::from((lbl.hard_symbols[k] - truth).norm() > 1e-9);
        }
    }
    let k2_ok = se_lbl as f64 <= 1.2 * se_ml as f64 && se_ep as f64 <= 1.2 * se_ml as f64;

    // K=1: exact ML equivalence on every realization
    let sigma1 = snr_to_noise_variance(6.0, 1, c.average_energy());
    let mut k1_ok = true;
    for trial in 0..2_000u64 {
        let real = mudet::harness::draw_trial(4, 1, &c, sigma1, 20240807, trial).unwrap();
        let gram = compute_gram(&real.channel, &real.received, sigma1).unwrap();
        let ml = detect_ml(&real.channel, &real.received, &c).unwrap();
        let lbl = detect_lbl(&gram, &c, &lbl_cfg);
        k1_ok &= ml.hard_symbols == lbl.hard_symbols;
    }

    verdict(
        k2_ok && k1_ok,
        &format!(
            "criterion 6 (oracle equivalence): K=2 symbol errors over 1e4 paired trials: \
             ML = {se_ml}, EP = {se_ep}, LBL = {se_lbl} (each <= 1.2x ML); \
             K=1 LBL == ML on all 2000 realizations: {k1_ok}"
        ),
    );
}

/// Criterion 7: the property suite runs clean (BSE normalization, DSC
/// convexity, sigma invariance, EP cavity identity, noiseless recovery,
/// deterministic replay, and friends).
#[test]
fn criterion_7_property_suite() {
    let results = run_selftest(20240808);
    let mut all = true;
    for r in &results {
        println!("  selftest {}: {} ({})", if r.passed { "ok " } else { "FAIL" }, r.name, r.detail);
        all &= r.passed;
    }
    verdict(all, &format!("criterion 7 (property suite): {}/{} checks passed", results.iter().filter(|r| r.passed).count(), results.len()));
}

/// Criterion 8: at N=256 and fixed SNR the LBL BER crosses 1e-4 between
/// alpha = 0.5 and alpha = 0.75.
#[test]
fn criterion_8_load_ratio_trend() {
    let cfg = LoadRatioConfig {
        detectors: vec![DetectorId::Lbl],
        n_rx: 256,
        alphas: vec![0.5, 0.625, 0.75],
        qam_order: 4,
        snr_db: 9.0,
        n_trials: 20_000,
        base_seed: 20240809,
        min_error_events: 100,
        lbl_epsilon: 1e-6,
        lbl_t_max: 10,
        ep_damping: 0.9,
        ep_iterations: 10,
    };
    let study = run_load_ratio_study(&cfg).unwrap();
    let ber_of = |alpha: f64| -> f64 {
        study
            .iter()
            .find(|r| (r.alpha - alpha).abs() < 1e-12)
            .and_then(|r| r.records.first())
            .map(|r| r.ber)
            .unwrap()
    };
    let (b_lo, b_mid, b_hi) = (ber_of(0.5), ber_of(0.625), ber_of(0.75));
    verdict(
        b_lo < 1e-4 && b_hi > 1e-4,
        &format!(
            "criterion 8 (load ratio, N=256 @ 9 dB): BER(alpha=0.5) = {b_lo:.2e} (< 1e-4), \
             BER(alpha=0.625) = {b_mid:.2e}, BER(alpha=0.75) = {b_hi:.2e} (> 1e-4)"
        ),
    );
}
