//! Uplink system model: Rayleigh channel draws, AWGN and the received signal
//! `y = H x + n`.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Complex `N x K` channel between `K` single-antenna users and `N` receive
/// antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    mat: CMat,
}

impl ChannelMatrix {
    pub fn from_mat(mat: CMat) -> Result<Self> {
        if mat.rows() < mat.cols() || mat.cols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "need N >= K >= 1, got N={} K={}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Self { mat })
    }

    /// Number of receive antennas `N`.
    pub fn n_rx(&self) -> usize {
        self.mat.rows()
    }

    /// Number of users `K`.
    pub fn n_users(&self) -> usize {
        self.mat.cols()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }
}

/// Additive white Gaussian noise with per-antenna variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma2: f64,
}

impl NoiseSpec {
    pub fn new(sigma2: f64) -> Result<Self> {
        if sigma2 < 0.0 || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!("noise variance {sigma2} must be >= 0")));
        }
        Ok(Self { sigma2 })
    }
}

/// A reproducible, splittable random stream: the same `(seed, stream_id)`
/// always replays the same draws, and distinct stream ids are statistically
/// independent. One stream per Monte-Carlo trial keeps parallel workers
/// deterministic regardless of scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn standard_complex<R: Rng>(rng: &mut R) -> C64 {
    // unit-variance circularly-symmetric complex Gaussian
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws an `N x K` channel with i.i.d. unit-variance circularly-symmetric
/// complex Gaussian entries (real and imaginary parts each of variance 1/2).
pub fn sample_channel<R: Rng>(n_rx: usize, n_users: usize, rng: &mut R) -> Result<ChannelMatrix> {
    if n_rx < n_users || n_users == 0 {
        return Err(Error::DimensionMismatch(format!(
            "need N >= K >= 1, got N={n_rx} K={n_users}"
        )));
    }
    let data: Vec<C64> = (0..n_rx * n_users).map(|_| standard_complex(rng)).collect();
    ChannelMatrix::from_mat(CMat::from_rows(n_rx, n_users, data))
}

/// Received signal `y = H x + n` with `n` i.i.d. complex Gaussian of variance
/// `noise.sigma2` per entry. With `sigma2 = 0` the output is exactly `H x`.
pub fn transmit<R: Rng>(
    h: &ChannelMatrix,
    x: &[C64],
    noise: NoiseSpec,
    rng: &mut R,
) -> Result<Vec<C64>> {
    if x.len() != h.n_users() {
        return Err(Error::DimensionMismatch(format!(
            "symbol vector length {} != K={}",
            x.len(),
            h.n_users()
        )));
    }
    let mut y = h.mat.mat_vec(x);
    let amp = noise.sigma2.sqrt();
    for yi in y.iter_mut() {
        *yi += standard_complex(rng) * amp;
    }
    Ok(y)
}

/// Noise variance for a target SNR in dB, with SNR defined as the average
/// received signal power per antenna over the noise power per antenna:
/// `sigma2 = K * E_x / 10^(snr_db/10)` under unit-variance channel entries.
pub fn snr_to_noise_variance(snr_db: f64, n_users: usize, avg_energy: f64) -> f64 {
    assert!(n_users >= 1, "need at least one user");
    assert!(avg_energy > 0.0, "average symbol energy must be positive");
    n_users as f64 * avg_energy / 10f64.powf(snr_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn snr_conversion_known_values() {
        assert_abs_diff_eq!(snr_to_noise_variance(0.0, 1, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(snr_to_noise_variance(10.0, 1, 1.0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(snr_to_noise_variance(3.0103, 2, 1.0), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn channel_draws_are_reproducible() {
        let s = RngStream::new(42, 7);
        let a = sample_channel(4, 2, &mut s.rng()).unwrap();
        let b = sample_channel(4, 2, &mut s.rng()).unwrap();
        assert_eq!(a, b);
        // distinct stream ids give different draws
        let c = sample_channel(4, 2, &mut RngStream::new(42, 8).rng()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn channel_entry_variance_converges() {
        let mut rng = RngStream::new(123, 0).rng();
        let n = 1_000_000usize;
        let h = sample_channel(1000, 1000, &mut rng).unwrap();
        let mean_sq: f64 = h.mat().as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        // variance of |entry|^2 is 1 for CN(0,1); 3 standard errors at 1e6
        assert!((mean_sq - 1.0).abs() < 3.0 / (n as f64).sqrt(), "mean |h|^2 = {mean_sq}");
    }

    #[test]
    fn undersized_channel_rejected() {
        let mut rng = RngStream::new(1, 0).rng();
        assert!(sample_channel(1, 2, &mut rng).is_err());
        assert!(sample_channel(3, 0, &mut rng).is_err());
    }

    #[test]
    fn noiseless_transmit_is_exact_product() {
        let mut rng = RngStream::new(5, 0).rng();
        let h = sample_channel(3, 2, &mut rng).unwrap();
        let x = [C64::new(1.0, -1.0), C64::new(-0.5, 0.25)];
        let y = transmit(&h, &x, NoiseSpec::new(0.0).unwrap(), &mut rng).unwrap();
        let hx = h.mat().mat_vec(&x);
        assert_eq!(y, hx);
    }

    #[test]
    fn identity_channel_recovers_symbols() {
        let h = ChannelMatrix::from_mat(CMat::identity(2)).unwrap();
        let x = [C64::new(0.3, 0.4), C64::new(-0.7, 0.1)];
        let mut rng = RngStream::new(9, 0).rng();
        let y = transmit(&h, &x, NoiseSpec::new(0.0).unwrap(), &mut rng).unwrap();
        assert_eq!(y, x.to_vec());
    }

    #[test]
    fn scalar_channel() {
        let h = ChannelMatrix::from_mat(CMat::from_rows(1, 1, vec![C64::new(2.0, 0.0)])).unwrap();
        let mut rng = RngStream::new(9, 0).rng();
        let y = transmit(&h, &[C64::new(1.0, 0.0)], NoiseSpec::new(0.0).unwrap(), &mut rng).unwrap();
        assert_eq!(y, vec![C64::new(2.0, 0.0)]);
    }

    #[test]
    fn transmit_rejects_dimension_mismatch() {
        let mut rng = RngStream::new(5, 0).rng();
        let h = sample_channel(3, 2, &mut rng).unwrap();
        let x = [C64::new(1.0, 0.0)];
        assert!(transmit(&h, &x, NoiseSpec::new(0.1).unwrap(), &mut rng).is_err());
    }
}
