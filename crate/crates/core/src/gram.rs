//! Shared per-trial cache of `H^H H` and `H^H y`.
//!
//! All gram-based detectors in this crate work on these statistics rather
//! than on `H` and `y` directly, so one trial builds the cache once and every
//! detector reuses it.

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::C64;

/// Precomputed `H^H H`, `H^H y` and the diagonal/off-diagonal split used by
/// the iterative receivers. Immutable once built; shareable across detectors
/// within a trial.
#[derive(Debug, Clone)]
pub struct GramCache {
    gram: CMat,
    matched_filter: Vec<C64>,
    gram_diag: Vec<f64>,
    noise_var: f64,
    n_rx: usize,
}

/// Builds the cache. Rejects channels with a zero column, whose gram diagonal
/// would not be strictly positive.
pub fn compute_gram(h: &ChannelMatrix, y: &[C64], sigma2: f64) -> Result<GramCache> {
    if y.len() != h.n_rx() {
        return Err(Error::DimensionMismatch(format!(
            "received vector length {} != N={}",
            y.len(),
            h.n_rx()
        )));
    }
    let gram = h.mat().gram();
    let matched_filter = h.mat().herm_vec(y);
    let k = h.n_users();
    let mut gram_diag = Vec::with_capacity(k);
    for i in 0..k {
        let d = gram[(i, i)].re;
        if !(d > 0.0) {
            return Err(Error::ZeroColumn(i));
        }
        gram_diag.push(d);
    }
    Ok(GramCache { gram, matched_filter, gram_diag, noise_var: sigma2, n_rx: h.n_rx() })
}

impl GramCache {
    pub fn n_users(&self) -> usize {
        self.gram_diag.len()
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    /// The `K x K` matrix `H^H H`.
    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    /// The matched-filter vector `H^H y`.
    pub fn matched_filter(&self) -> &[C64] {
        &self.matched_filter
    }

    /// Real, strictly positive diagonal of the gram matrix.
    pub fn gram_diag(&self) -> &[f64] {
        &self.gram_diag
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// `off(H^H H) * v`, the gram product with the diagonal contribution
    /// removed.
    pub fn off_diag_mul(&self, v: &[C64]) -> Vec<C64> {
        let mut out = self.gram.mat_vec(v);
        for ((o, &d), &vi) in out.iter_mut().zip(&self.gram_diag).zip(v) {
            *o -= vi * d;
        }
        out
    }

    /// `gram` with the diagonal zeroed, materialized as a matrix.
    pub fn gram_off(&self) -> CMat {
        let k = self.n_users();
        let mut off = self.gram.clone();
        for i in 0..k {
            off[(i, i)] = C64::new(0.0, 0.0);
        }
        off
    }
}
