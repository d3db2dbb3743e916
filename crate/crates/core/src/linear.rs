//! Classical linear receivers: MRC, ZF and MMSE.

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::gram::GramCache;
use crate::linalg::Cholesky;
use crate::opcount;
use crate::result::DetectorResult;
use crate::C64;

/// Maximum-ratio combining: `x_k = (H^H y)_k / ||h_k||^2`, no interference
/// suppression.
pub fn detect_mrc(gram: &GramCache, c: &Constellation) -> DetectorResult {
    let soft: Vec<C64> = gram
        .matched_filter()
        .iter()
        .zip(gram.gram_diag())
        .map(|(&z, &d)| z / d)
        .collect();
    DetectorResult::from_soft(soft, c, 1, opcount::mrc(gram.n_rx(), gram.n_users()), 0)
}

/// MMSE filtering: solves `(H^H H + sigma2 I) x = H^H y` by a Hermitian
/// positive-definite factorization.
pub fn detect_mmse(gram: &GramCache, c: &Constellation) -> Result<DetectorResult> {
    detect_regularized(gram, c, gram.noise_var())
}

/// Zero forcing: solves `(H^H H) x = H^H y`; requires full column rank.
pub fn detect_zf(gram: &GramCache, c: &Constellation) -> Result<DetectorResult> {
    detect_regularized(gram, c, 0.0)
}

fn detect_regularized(gram: &GramCache, c: &Constellation, reg: f64) -> Result<DetectorResult> {
    let k = gram.n_users();
    let mut a = gram.gram().clone();
    for i in 0..k {
        a[(i, i)] += C64::new(reg, 0.0);
    }
    let chol = Cholesky::new(&a).map_err(|_| Error::SingularMatrix)?;
    let soft = chol.solve(gram.matched_filter());
    Ok(DetectorResult::from_soft(soft, c, 1, opcount::mmse(gram.n_rx(), k), 1))
}
