//! Fast self-contained property suite, runnable from the CLI.
//!
//! Each check re-derives its expected values independently of the code path
//! it exercises and finishes in well under a minute overall.

use crate::channel::{sample_channel, transmit, NoiseSpec, RngStream};
use crate::constellation::{build_constellation, demap_hard, modulate};
use crate::ep::{ep_extrinsic, EpState};
use crate::error::Result;
use crate::gram::compute_gram;
use crate::harness::{confidence_interval, run_ber_sweep, SweepConfig};
use crate::lbl::{bso, detect_lbl, dsc_combine, LblConfig};
use crate::linear::{detect_mmse, detect_zf};
use crate::ml::detect_ml;
use crate::result::DetectorId;
use crate::C64;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct SelfTestResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, out: &mut Vec<SelfTestResult>, f: impl FnOnce() -> Result<String>) {
    match f() {
        Ok(detail) => out.push(SelfTestResult { name, passed: true, detail }),
        Err(e) => out.push(SelfTestResult { name, passed: false, detail: e.to_string() }),
    }
}

fn fail(msg: String) -> crate::error::Error {
    crate::error::Error::InvalidParameter(msg)
}

/// Runs the whole property suite; returns one result per check.
pub fn run_selftest(seed: u64) -> Vec<SelfTestResult> {
    let mut out = Vec::new();

    check("constellation-energy", &mut out, || {
        for m in [4usize, 16, 64, 256] {
            let c = build_constellation(m)?;
            let e: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            if (e - 1.0).abs() > 1e-12 {
                return Err(fail(format!("M={m}: energy {e}")));
            }
        }
        Ok("mean |s|^2 = 1 within 1e-12 for M in {4,16,64,256}".into())
    });

    check("modem-round-trip", &mut out, || {
        let mut rng = RngStream::new(seed, 1).rng();
        for m in [4usize, 16, 64, 256] {
            let c = build_constellation(m)?;
            for _ in 0..200 {
                let bits: Vec<u8> =
                    (0..3 * c.bits_per_symbol()).map(|_| rng.gen_range(0..2u8)).collect();
                let tx = modulate(&bits, &c)?;
                if demap_hard(&tx.symbols, &c) != bits {
                    return Err(fail(format!("round trip failed at M={m}")));
                }
            }
        }
        Ok("demap(modulate(b)) = b across all orders".into())
    });

    check("bse-weight-normalization", &mut out, || {
        let mut rng = RngStream::new(seed, 2).rng();
        let c = build_constellation(16)?;
        let hull = c.max_axis_coordinate() + 1e-12;
        for _ in 0..500 {
            let mean = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let var = rng.gen_range(1e-6..4.0);
            // independent weight enumeration
            let mut wsum = 0.0;
            let mut mu_ref = C64::new(0.0, 0.0);
            let mx = c.points().iter().map(|p| -(mean - p).norm_sqr() / var).fold(f64::MIN, f64::max);
            for p in c.points() {
                let w = (-(mean - p).norm_sqr() / var - mx).exp();
                wsum += w;
                mu_ref += p * w;
            }
            mu_ref /= wsum;
            let norm_check: f64 = c
                .points()
                .iter()
                .map(|p| (-(mean - p).norm_sqr() / var - mx).exp() / wsum)
                .sum();
            if (norm_check - 1.0).abs() > 1e-12 {
                return Err(fail(format!("weights sum to {norm_check}")));
            }
            let (mu, _) = c.posterior_moments(mean, var);
            if (mu - mu_ref).norm() > 1e-12 {
                return Err(fail("posterior mean disagrees with enumeration".into()));
            }
            if mu.re.abs() > hull || mu.im.abs() > hull {
                return Err(fail("posterior mean escaped the convex hull".into()));
            }
        }
        Ok("weights normalized to 1e-12; means match enumeration and stay in hull".into())
    });

    check("dsc-convex-combination", &mut out, || {
        let mut rng = RngStream::new(seed, 3).rng();
        for _ in 0..500 {
            let xt = [C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
            let xp = [C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
            let vt = [rng.gen_range(0.0..3.0)];
            let vp = [rng.gen_range(0.0..3.0)];
            let got = dsc_combine(&xt, &xp, &vt, &vp)[0];
            if vt[0] + vp[0] > 0.0 {
                let w = vp[0] / (vt[0] + vp[0]);
                if !(0.0..=1.0).contains(&w) {
                    return Err(fail("weight outside [0,1]".into()));
                }
                let want = xt[0] * w + xp[0] * (1.0 - w);
                if (got - want).norm() > 1e-12 {
                    return Err(fail("combination mismatch".into()));
                }
            }
        }
        Ok("weights nonnegative, sum to 1, combination matches direct formula".into())
    });

    check("sigma-iteration-invariance", &mut out, || {
        let mut rng = RngStream::new(seed, 4).rng();
        let h = sample_channel(8, 4, &mut rng)?;
        let x = vec![C64::new(0.5, 0.5); 4];
        let y = transmit(&h, &x, NoiseSpec::new(0.7)?, &mut rng)?;
        let g = compute_gram(&h, &y, 0.7)?;
        let (_, s0) = bso(&g, &vec![C64::new(0.0, 0.0); 4]);
        for _ in 0..10 {
            let fb: Vec<C64> = (0..4)
                .map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let (_, s) = bso(&g, &fb);
            if s != s0 {
                return Err(fail("sigma changed across iterations".into()));
            }
        }
        Ok("bso variances bit-identical for any feedback".into())
    });

    check("ep-cavity-identity", &mut out, || {
        let mut rng = RngStream::new(seed, 5).rng();
        for _ in 0..200 {
            let k = 3;
            let mut s = EpState::new(k, 1.0, 0.9);
            for i in 0..k {
                s.lambda[i] = rng.gen_range(0.05..2.0);
                s.gamma[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                // keep 1 - sigma*lambda > 0
                s.posterior_var[i] = rng.gen_range(0.01..0.9) / (1.0 + s.lambda[i]);
                s.posterior_mean[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            ep_extrinsic(&mut s);
            for i in 0..k {
                let lhs = 1.0 / s.extrinsic_var[i] + s.lambda[i];
                let rhs = 1.0 / s.posterior_var[i];
                if (lhs - rhs).abs() > 1e-10 * rhs.abs().max(1.0) {
                    return Err(fail(format!("precision identity off: {lhs} vs {rhs}")));
                }
                let lm = s.extrinsic_mean[i] / s.extrinsic_var[i] + s.gamma[i];
                let rm = s.posterior_mean[i] / s.posterior_var[i];
                if (lm - rm).norm() > 1e-10 * rm.norm().max(1.0) {
                    return Err(fail("mean identity off".into()));
                }
            }
        }
        Ok("1/v_ext + lambda = 1/sigma and mean identity hold to 1e-10".into())
    });

    check("noiseless-exact-recovery", &mut out, || {
        let c = build_constellation(4)?;
        for trial in 0..200u64 {
            let mut rng = RngStream::new(seed, 100 + trial).rng();
            let h = sample_channel(8, 3, &mut rng)?;
            let bits: Vec<u8> = (0..6).map(|_| rng.gen_range(0..2u8)).collect();
            let tx = modulate(&bits, &c)?;
            let y = transmit(&h, &tx.symbols, NoiseSpec::new(0.0)?, &mut rng)?;
            let g = compute_gram(&h, &y, 0.0)?;
            let zf = detect_zf(&g, &c)?;
            let lbl = detect_lbl(&g, &c, &LblConfig::default());
            let ml = detect_ml(&h, &y, &c)?;
            for r in [&zf, &lbl, &ml] {
                if r.hard_symbols != tx.symbols {
                    return Err(fail(format!("trial {trial}: noiseless recovery failed")));
                }
            }
            if lbl.factorizations != 0 {
                return Err(fail("LBL performed a factorization".into()));
            }
        }
        Ok("ZF, ML and LBL recover noiseless transmissions exactly".into())
    });

    check("mmse-zf-limit", &mut out, || {
        let mut rng = RngStream::new(seed, 6).rng();
        let h = sample_channel(6, 4, &mut rng)?;
        let c = build_constellation(4)?;
        let x = vec![c.points()[1]; 4];
        let y = transmit(&h, &x, NoiseSpec::new(0.1)?, &mut rng)?;
        let zf = detect_zf(&compute_gram(&h, &y, 0.0)?, &c)?;
        let mmse = detect_mmse(&compute_gram(&h, &y, 1e-12)?, &c)?;
        let d: f64 = zf
            .soft_symbols
            .iter()
            .zip(&mmse.soft_symbols)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if d > 1e-6 {
            return Err(fail(format!("||mmse(1e-12) - zf|| = {d}")));
        }
        Ok(format!("||mmse(sigma2=1e-12) - zf|| = {d:.2e}"))
    });

    check("pic-fixed-point", &mut out, || {
        let mut rng = RngStream::new(seed, 7).rng();
        let h = sample_channel(6, 3, &mut rng)?;
        let c = build_constellation(4)?;
        let x = vec![c.points()[0]; 3];
        let y = transmit(&h, &x, NoiseSpec::new(0.2)?, &mut rng)?;
        let g = compute_gram(&h, &y, 0.2)?;
        // the PIC fixed point solves G x = z, i.e. the ZF point
        let xs = detect_zf(&g, &c)?.soft_symbols;
        let off = g.off_diag_mul(&xs);
        for ((&z, &o), (&d, &xk)) in g
            .matched_filter()
            .iter()
            .zip(&off)
            .zip(g.gram_diag().iter().zip(&xs))
        {
            if ((z - o) / d - xk).norm() > 1e-12 {
                return Err(fail("fixed point moved".into()));
            }
        }
        Ok("one more PIC pass leaves the fixed point unchanged (1e-12)".into())
    });

    check("deterministic-replay", &mut out, || {
        let cfg = SweepConfig {
            detectors: vec![DetectorId::Mmse, DetectorId::Lbl],
            n_rx: 8,
            n_users: 2,
            qam_order: 4,
            snr_grid_db: vec![6.0],
            n_trials: 300,
            base_seed: seed,
            min_error_events: 0,
            ..SweepConfig::default()
        };
        let a = run_ber_sweep(&cfg)?;
        let b = run_ber_sweep(&cfg)?;
        for (x, y) in a.iter().zip(&b) {
            if !x.same_statistics(y) {
                return Err(fail("replay diverged".into()));
            }
        }
        Ok("two runs with the same seed agree field-for-field".into())
    });

    check("wilson-interval", &mut out, || {
        let (lo, hi) = confidence_interval(0, 1_000_000);
        if lo != 0.0 || !(3.7e-6..3.9e-6).contains(&hi) {
            return Err(fail(format!("0/1e6 interval [{lo}, {hi}]")));
        }
        let (lo, hi) = confidence_interval(500, 1_000_000);
        if !(lo < 5e-4 && 5e-4 < hi) {
            return Err(fail("interval misses the point estimate".into()));
        }
        Ok("0/1e6 upper bound near 3.84e-6; intervals contain point estimates".into())
    });

    out
}
