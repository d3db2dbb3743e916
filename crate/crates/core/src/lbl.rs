//! Linear Bayesian learning receiver: Bayesian symbol observation (BSO),
//! Bayesian symbol estimation (BSE) and decision statistic combining (DSC).
//!
//! Per iteration the BSO stage forms per-user observations by parallel
//! interference cancellation against the fed-back estimates; the BSE stage
//! projects each observation onto the alphabet, producing soft symbols and
//! their posterior variances plus a per-user residual error statistic; the
//! DSC stage combines the soft symbols of the current and previous iteration
//! with weights inversely proportional to those error statistics. The DSC
//! output is fed back to the BSO stage, and iteration stops when consecutive
//! DSC outputs agree within `epsilon` or `t_max` is reached. The whole path
//! is elementwise and matrix-vector work only; no matrix is ever factorized
//! or inverted.
//!
//! The BSE likelihood width tracks the quality of the fed-back estimates:
//! user `k` sees variance `(sigma² g_kk + Σ_{j≠k} |g_kj|² v_j) / g_kk²`,
//! where `v_j` is the posterior variance of user `j`'s previous soft symbol
//! (`E_x` before the first iteration, since the feedback starts at zero).
//! The interference term vanishes as the estimates harden, recovering the
//! noise-only variance `sigma²/g_kk` of the plain observation model.

use crate::constellation::Constellation;
use crate::gram::GramCache;
use crate::opcount;
use crate::result::DetectorResult;
use crate::C64;

/// Floor applied to BSE posterior variances.
const VARIANCE_FLOOR: f64 = 1e-8;

/// Threshold below which both DSC error statistics count as zero.
const DSC_DEGENERATE: f64 = 1e-30;

/// Stopping rule of the iterative receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LblConfig {
    /// Tolerance on the Euclidean distance between consecutive DSC outputs.
    pub epsilon: f64,
    /// Iteration cap.
    pub t_max: usize,
}

impl Default for LblConfig {
    fn default() -> Self {
        Self { epsilon: 1e-6, t_max: 10 }
    }
}

impl LblConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(crate::error::Error::InvalidParameter(format!(
                "epsilon {} must be > 0",
                self.epsilon
            )));
        }
        if self.t_max < 1 {
            return Err(crate::error::Error::InvalidParameter("t_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// Bayesian symbol observation: interference-cancelled per-user estimates
/// `x_obs_k = ((H^H y)_k - Σ_{j≠k} g_kj x_prev_j) / g_kk` together with the
/// noise-normalized observation variances `sigma²/g_kk`. Elementwise division
/// only; the variances depend only on the channel and the noise level.
pub fn bso(gram: &GramCache, x_prev: &[C64]) -> (Vec<C64>, Vec<f64>) {
    let off = gram.off_diag_mul(x_prev);
    let x_obs = gram
        .matched_filter()
        .iter()
        .zip(&off)
        .zip(gram.gram_diag())
        .map(|((&z, &o), &d)| (z - o) / d)
        .collect();
    let sigma = gram.gram_diag().iter().map(|&d| gram.noise_var() / d).collect();
    (x_obs, sigma)
}

/// Residual-adaptive BSE likelihood widths given the posterior variances of
/// the fed-back estimates (see the module docs).
pub fn observation_variance(gram: &GramCache, v_feedback: &[f64]) -> Vec<f64> {
    let k = gram.n_users();
    let g = gram.gram();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let d = gram.gram_diag()[i];
        let mut interf = 0.0;
        for j in 0..k {
            if j != i {
                interf += g[(i, j)].norm_sqr() * v_feedback[j];
            }
        }
        out.push((gram.noise_var() * d + interf) / (d * d));
    }
    out
}

/// BSE soft symbols: the posterior mean of each user's symbol over the
/// alphabet under a Gaussian likelihood of width `sigma`, computed in the log
/// domain.
pub fn bse_soft_symbol(x_obs: &[C64], sigma: &[f64], c: &Constellation) -> Vec<C64> {
    x_obs
        .iter()
        .zip(sigma)
        .map(|(&mu, &v)| c.posterior_moments(mu, v).0)
        .collect()
}

fn bse_moments(x_obs: &[C64], sigma: &[f64], c: &Constellation) -> (Vec<C64>, Vec<f64>) {
    let mut means = Vec::with_capacity(x_obs.len());
    let mut vars = Vec::with_capacity(x_obs.len());
    for (&mu, &v) in x_obs.iter().zip(sigma) {
        let (m, var) = c.posterior_moments(mu, v);
        means.push(m);
        vars.push(var.max(VARIANCE_FLOOR));
    }
    (means, vars)
}

/// Per-user error statistic between estimates and observations:
/// `V_k = |(H^H y - H^H H x)_k|²`, the diagonal of the residual outer
/// product under the Hermitian reading.
pub fn bse_error(gram: &GramCache, x: &[C64]) -> Vec<f64> {
    let gx = gram.gram().mat_vec(x);
    gram.matched_filter()
        .iter()
        .zip(&gx)
        .map(|(&z, &g)| (z - g).norm_sqr())
        .collect()
}

/// Decision statistic combining: elementwise inverse-error weighting of the
/// current and previous soft estimates. When both error statistics vanish,
/// the current estimate wins.
pub fn dsc_combine(x_t: &[C64], x_prev: &[C64], v_t: &[f64], v_prev: &[f64]) -> Vec<C64> {
    x_t.iter()
        .zip(x_prev)
        .zip(v_t.iter().zip(v_prev))
        .map(|((&xt, &xp), (&vt, &vp))| {
            let den = vt + vp;
            if den < DSC_DEGENERATE {
                xt
            } else {
                (xt * vp + xp * vt) / den
            }
        })
        .collect()
}

/// Stopping test: converged when the Euclidean distance between consecutive
/// DSC outputs is within `epsilon`, or when the iteration cap is reached.
pub fn lbl_converged(x_dsc: &[C64], x_dsc_prev: &[C64], t: usize, cfg: &LblConfig) -> bool {
    debug_assert!(t >= 1);
    if t >= cfg.t_max {
        return true;
    }
    let diff: f64 = x_dsc
        .iter()
        .zip(x_dsc_prev)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    diff <= cfg.epsilon
}

/// Full LBL detection.
pub fn detect_lbl(gram: &GramCache, c: &Constellation, cfg: &LblConfig) -> DetectorResult {
    detect_lbl_traced(gram, c, cfg).0
}

/// LBL detection that also returns the per-iteration DSC difference norms
/// (first entry belongs to iteration 2).
pub fn detect_lbl_traced(
    gram: &GramCache,
    c: &Constellation,
    cfg: &LblConfig,
) -> (DetectorResult, Vec<f64>) {
    cfg.validate().expect("invalid LBL configuration");
    run_loop(gram, c, Some(cfg.epsilon), cfg.t_max)
}

/// Runs exactly `iterations` LBL rounds with the stopping test disabled;
/// used by complexity measurements that pin the iteration budget.
pub fn detect_lbl_fixed_iterations(
    gram: &GramCache,
    c: &Constellation,
    iterations: usize,
) -> DetectorResult {
    assert!(iterations >= 1, "need at least one iteration");
    run_loop(gram, c, None, iterations).0
}

fn run_loop(
    gram: &GramCache,
    c: &Constellation,
    epsilon: Option<f64>,
    t_max: usize,
) -> (DetectorResult, Vec<f64>) {
    let k = gram.n_users();

    let mut feedback = vec![C64::new(0.0, 0.0); k];
    let mut v_feedback = vec![c.average_energy(); k];
    let mut x_tilde_prev: Vec<C64> = Vec::new();
    let mut v_prev: Vec<f64> = Vec::new();
    let mut x_dsc_prev: Vec<C64> = Vec::new();
    let mut x_dsc: Vec<C64> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = t_max;

    for t in 1..=t_max {
        let (x_obs, _) = bso(gram, &feedback);
        let sigma_t = observation_variance(gram, &v_feedback);
        let (x_tilde, v_post) = bse_moments(&x_obs, &sigma_t, c);
        let v_err = bse_error(gram, &x_tilde);

        let combined = if t == 1 {
            x_tilde.clone()
        } else {
            dsc_combine(&x_tilde, &x_tilde_prev, &v_err, &v_prev)
        };

        if t >= 2 {
            let diff: f64 = combined
                .iter()
                .zip(&x_dsc_prev)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            trace.push(diff);
            if let Some(eps) = epsilon {
                if diff <= eps {
                    iterations = t;
                    x_dsc = combined;
                    break;
                }
            }
        }

        iterations = t;
        x_dsc_prev = combined.clone();
        x_dsc = combined;
        x_tilde_prev = x_tilde;
        v_prev = v_err;
        feedback = x_dsc.clone();
        v_feedback = v_post;
    }

    let ops = opcount::lbl(gram.n_rx(), k, c.order(), iterations);
    (DetectorResult::from_soft(x_dsc, c, iterations, ops, 0), trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, transmit, ChannelMatrix, NoiseSpec, RngStream};
    use crate::constellation::{build_constellation, modulate};
    use crate::gram::compute_gram;
    use crate::linalg::CMat;
    use crate::linear::detect_mrc;
    use crate::ml::detect_ml;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn c64(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn bso_zero_feedback_is_mrc() {
        let mut rng = RngStream::new(80, 0).rng();
        let h = sample_channel(4, 3, &mut rng).unwrap();
        let y = transmit(&h, &[c64(1.0, 0.0); 3], NoiseSpec::new(0.2).unwrap(), &mut rng).unwrap();
        let g = compute_gram(&h, &y, 0.2).unwrap();
        let c = build_constellation(4).unwrap();
        let (x_obs, sigma) = bso(&g, &[c64(0.0, 0.0); 3]);
        let mrc = detect_mrc(&g, &c);
        for (a, b) in x_obs.iter().zip(&mrc.soft_symbols) {
            assert!((a - b).norm() < 1e-14);
        }
        for (s, d) in sigma.iter().zip(g.gram_diag()) {
            assert_abs_diff_eq!(*s, 0.2 / d, epsilon = 1e-15);
        }
    }

    #[test]
    fn bso_orthogonal_columns_ignore_feedback() {
        let h = ChannelMatrix::from_mat(CMat::from_rows(
            2,
            2,
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0)],
        ))
        .unwrap();
        let y = [c64(0.4, 0.2), c64(-0.6, 1.0)];
        let g = compute_gram(&h, &y, 0.1).unwrap();
        let (a, _) = bso(&g, &[c64(0.0, 0.0); 2]);
        let (b, _) = bso(&g, &[c64(5.0, -3.0), c64(-2.0, 7.0)]);
        for (x, z) in a.iter().zip(&b) {
            assert!((x - z).norm() < 1e-14);
        }
    }

    #[test]
    fn bso_two_user_hand_computed() {
        let mut rng = RngStream::new(81, 0).rng();
        let h = sample_channel(3, 2, &mut rng).unwrap();
        let y = transmit(&h, &[c64(0.5, 0.5), c64(-0.5, 0.5)], NoiseSpec::new(0.3).unwrap(), &mut rng)
            .unwrap();
        let g = compute_gram(&h, &y, 0.3).unwrap();
        let prev = [c64(0.2, -0.7), c64(-1.1, 0.4)];
        let (x_obs, _) = bso(&g, &prev);
        let gm = g.gram();
        let z = g.matched_filter();
        let want0 = (z[0] - gm[(0, 1)] * prev[1]) / g.gram_diag()[0];
        let want1 = (z[1] - gm[(1, 0)] * prev[0]) / g.gram_diag()[1];
        assert!((x_obs[0] - want0).norm() < 1e-12);
        assert!((x_obs[1] - want1).norm() < 1e-12);
    }

    #[test]
    fn bso_sigma_is_iteration_invariant() {
        let mut rng = RngStream::new(82, 0).rng();
        let h = sample_channel(4, 2, &mut rng).unwrap();
        let y = transmit(&h, &[c64(1.0, 0.0); 2], NoiseSpec::new(0.4).unwrap(), &mut rng).unwrap();
        let g = compute_gram(&h, &y, 0.4).unwrap();
        let (_, s1) = bso(&g, &[c64(0.0, 0.0); 2]);
        let (_, s2) = bso(&g, &[c64(3.0, -1.0), c64(0.5, 2.0)]);
        assert_eq!(s1, s2); // bit-for-bit: depends only on H and sigma2
    }

    #[test]
    fn bse_soft_symbol_limits() {
        let c = build_constellation(4).unwrap();
        // hard-decision limit
        let target = c.points()[2];
        let xt = bse_soft_symbol(&[target + c64(0.02, -0.01)], &[1e-12], &c);
        assert!((xt[0] - target).norm() < 1e-9);
        // symmetric input -> zero mean
        let xt = bse_soft_symbol(&[c64(0.0, 0.0)], &[0.7], &c);
        assert!(xt[0].norm() < 1e-12);
        // 4-point enumeration oracle at x_obs = 0.5
        let mean = c64(0.5, 0.0);
        let var = 1.0;
        let mut num = c64(0.0, 0.0);
        let mut den = 0.0;
        for p in c.points() {
            let w = (-(mean - p).norm_sqr() / var).exp();
            num += p * w;
            den += w;
        }
        let xt = bse_soft_symbol(&[mean], &[var], &c);
        assert!((xt[0] - num / den).norm() < 1e-12);
    }

    #[test]
    fn bse_error_cases() {
        let mut rng = RngStream::new(83, 0).rng();
        let h = sample_channel(4, 2, &mut rng).unwrap();
        let c = build_constellation(4).unwrap();
        let x = [c.points()[0], c.points()[3]];
        let y = transmit(&h, &x, NoiseSpec::new(0.0).unwrap(), &mut rng).unwrap();
        let g = compute_gram(&h, &y, 0.0).unwrap();
        // perfect estimate, noiseless: V = 0 exactly
        let v = bse_error(&g, &x);
        for vk in &v {
            assert!(*vk < 1e-24);
        }
        // zero estimate: V_k = |z_k|^2
        let v = bse_error(&g, &[c64(0.0, 0.0); 2]);
        for (vk, z) in v.iter().zip(g.matched_filter()) {
            assert_abs_diff_eq!(*vk, z.norm_sqr(), epsilon = 1e-12);
        }
        // hand-expanded residual on a fixed estimate
        let est = [c64(0.3, -0.4), c64(-0.8, 0.2)];
        let v = bse_error(&g, &est);
        let gm = g.gram();
        let z = g.matched_filter();
        for k in 0..2 {
            let r = z[k] - (gm[(k, 0)] * est[0] + gm[(k, 1)] * est[1]);
            assert_abs_diff_eq!(v[k], r.norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn dsc_combine_rules() {
        let xt = [c64(1.0, 0.0)];
        let xp = [c64(0.0, 0.0)];
        // equal weights -> midpoint
        let out = dsc_combine(&xt, &xp, &[0.5], &[0.5]);
        assert!((out[0] - c64(0.5, 0.0)).norm() < 1e-15);
        // zero current error -> full weight on current estimate
        let out = dsc_combine(&xt, &xp, &[0.0], &[0.7]);
        assert!((out[0] - xt[0]).norm() < 1e-15);
        // scalar arithmetic: (2*1 + 1*0)/3
        let out = dsc_combine(&xt, &xp, &[1.0], &[2.0]);
        assert!((out[0] - c64(2.0 / 3.0, 0.0)).norm() < 1e-15);
        // degenerate: both statistics ~ 0 -> current wins
        let out = dsc_combine(&xt, &xp, &[0.0], &[0.0]);
        assert!((out[0] - xt[0]).norm() == 0.0);
    }

    #[test]
    fn dsc_is_convex_combination() {
        let mut rng = RngStream::new(84, 0).rng();
        for _ in 0..200 {
            let xt = [c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
            let xp = [c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
            let vt = [rng.gen_range(0.0..2.0)];
            let vp = [rng.gen_range(0.0..2.0)];
            let out = dsc_combine(&xt, &xp, &vt, &vp);
            if vt[0] + vp[0] > 0.0 {
                let w = vp[0] / (vt[0] + vp[0]);
                let want = xt[0] * w + xp[0] * (1.0 - w);
                assert!((out[0] - want).norm() < 1e-12);
                assert!((0.0..=1.0).contains(&w));
            }
        }
    }

    #[test]
    fn convergence_test_rules() {
        let cfg = LblConfig::default();
        let a = [c64(0.5, 0.5), c64(-0.5, 0.5)];
        assert!(lbl_converged(&a, &a, 2, &cfg));
        let mut b = a;
        b[0] += c64(1.0, 0.0);
        assert!(lbl_converged(&a, &b, 10, &cfg)); // iteration cap
        let mut c2 = a;
        c2[0] += c64(2e-6, 0.0); // difference norm = 2 epsilon
        assert!(!lbl_converged(&a, &c2, 5, &cfg));
    }

    #[test]
    fn identity_channel_noiseless_recovery() {
        let h = ChannelMatrix::from_mat(CMat::identity(2)).unwrap();
        let c = build_constellation(4).unwrap();
        let x = [c.points()[1], c.points()[2]];
        let y = vec![x[0], x[1]];
        let g = compute_gram(&h, &y, 0.0).unwrap();
        let r = detect_lbl(&g, &c, &LblConfig::default());
        assert_eq!(r.hard_symbols, x.to_vec());
        assert_eq!(r.iterations_used, 2);
        assert_eq!(r.factorizations, 0);
        // soft output equals the exact symbols
        for (s, t) in r.soft_symbols.iter().zip(&x) {
            assert!((s - t).norm() < 1e-9);
        }
    }

    #[test]
    fn huge_epsilon_stops_at_two_iterations() {
        let mut rng = RngStream::new(85, 0).rng();
        let h = sample_channel(6, 3, &mut rng).unwrap();
        let c = build_constellation(4).unwrap();
        let bits: Vec<u8> = (0..6).map(|_| rng.gen_range(0..2u8)).collect();
        let tx = modulate(&bits, &c).unwrap();
        let y = transmit(&h, &tx.symbols, NoiseSpec::new(0.5).unwrap(), &mut rng).unwrap();
        let g = compute_gram(&h, &y, 0.5).unwrap();
        let r = detect_lbl(&g, &c, &LblConfig { epsilon: 1e6, t_max: 10 });
        assert_eq!(r.iterations_used, 2);
    }

    #[test]
    fn iterations_never_exceed_t_max() {
        let c = build_constellation(4).unwrap();
        for trial in 0..100 {
            let mut rng = RngStream::new(86, trial).rng();
            let h = sample_channel(4, 4, &mut rng).unwrap();
            let bits: Vec<u8> = (0..8).map(|_| rng.gen_range(0..2u8)).collect();
            let tx = modulate(&bits, &c).unwrap();
            let y = transmit(&h, &tx.symbols, NoiseSpec::new(1.0).unwrap(), &mut rng).unwrap();
            let g = compute_gram(&h, &y, 1.0).unwrap();
            let cfg = LblConfig { epsilon: 1e-12, t_max: 7 };
            let r = detect_lbl(&g, &c, &cfg);
            assert!(r.iterations_used <= 7 && r.iterations_used >= 1);
        }
    }

    #[test]
    fn single_user_matches_ml_on_every_realization() {
        let c = build_constellation(4).unwrap();
        for trial in 0..500 {
            let mut rng = RngStream::new(87, trial).rng();
            let h = sample_channel(3, 1, &mut rng).unwrap();
            let bits: Vec<u8> = (0..2).map(|_| rng.gen_range(0..2u8)).collect();
            let tx = modulate(&bits, &c).unwrap();
            let sigma2 = crate::channel::snr_to_noise_variance(6.0, 1, 1.0);
            let y = transmit(&h, &tx.symbols, NoiseSpec::new(sigma2).unwrap(), &mut rng).unwrap();
            let g = compute_gram(&h, &y, sigma2).unwrap();
            let lbl = detect_lbl(&g, &c, &LblConfig::default());
            let ml = detect_ml(&h, &y, &c).unwrap();
            assert_eq!(lbl.hard_symbols, ml.hard_symbols, "trial {trial}");
        }
    }

    #[test]
    fn soft_symbols_stay_in_convex_hull() {
        let c = build_constellation(16).unwrap();
        let limit = c.max_axis_coordinate() + 1e-12;
        for trial in 0..100 {
            let mut rng = RngStream::new(88, trial).rng();
            let h = sample_channel(6, 4, &mut rng).unwrap();
            let bits: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2u8)).collect();
            let tx = modulate(&bits, &c).unwrap();
            let y = transmit(&h, &tx.symbols, NoiseSpec::new(0.8).unwrap(), &mut rng).unwrap();
            let g = compute_gram(&h, &y, 0.8).unwrap();
            let r = detect_lbl(&g, &c, &LblConfig::default());
            for s in &r.soft_symbols {
                assert!(s.re.abs() <= limit && s.im.abs() <= limit);
            }
        }
    }
}
