//! Expectation-propagation receiver with damped moment matching.
//!
//! Each iteration refines a Gaussian approximation of the symbol posterior:
//! a joint Gaussian observation step, per-user extrinsic (cavity) extraction,
//! discrete posterior moments over the alphabet, and a damped update of the
//! per-user prior parameters `(gamma, lambda)`. `lambda` acts as a precision
//! added to the regularized filter.

use crate::constellation::Constellation;
use crate::error::Result;
use crate::gram::GramCache;
use crate::linalg::Cholesky;
use crate::opcount;
use crate::result::DetectorResult;
use crate::C64;

/// Floor applied to the discrete posterior variance.
const VARIANCE_FLOOR: f64 = 1e-8;

/// Working state of the EP iteration for all `K` users.
#[derive(Debug, Clone)]
pub struct EpState {
    /// Per-user prior precisions (diagonal of the paper's lambda matrix).
    pub lambda: Vec<f64>,
    /// Per-user prior mean parameters.
    pub gamma: Vec<C64>,
    /// Joint-observation posterior mean.
    pub posterior_mean: Vec<C64>,
    /// Diagonal of the joint-observation posterior covariance.
    pub posterior_var: Vec<f64>,
    /// Extrinsic (cavity) means.
    pub extrinsic_mean: Vec<C64>,
    /// Extrinsic (cavity) variances.
    pub extrinsic_var: Vec<f64>,
    /// Discrete posterior means over the alphabet.
    pub soft_mean: Vec<C64>,
    /// Discrete posterior variances, floored at 1e-8.
    pub soft_var: Vec<f64>,
    /// Damping factor in (0, 1].
    pub damping: f64,
    /// Number of per-user extrinsic fallbacks taken so far.
    pub fallback_count: u64,
}

impl EpState {
    /// Uninformative initialization: precision `1/E_x`, zero mean, extrinsic
    /// set to the alphabet prior.
    pub fn new(n_users: usize, avg_energy: f64, damping: f64) -> Self {
        assert!(damping > 0.0 && damping <= 1.0, "damping must be in (0,1]");
        Self {
            lambda: vec![1.0 / avg_energy; n_users],
            gamma: vec![C64::new(0.0, 0.0); n_users],
            posterior_mean: vec![C64::new(0.0, 0.0); n_users],
            posterior_var: vec![avg_energy; n_users],
            extrinsic_mean: vec![C64::new(0.0, 0.0); n_users],
            extrinsic_var: vec![avg_energy; n_users],
            soft_mean: vec![C64::new(0.0, 0.0); n_users],
            soft_var: vec![avg_energy; n_users],
            damping,
            fallback_count: 0,
        }
    }
}

/// Joint Gaussian observation step: solves
/// `(sigma^-2 H^H H + diag(lambda)) mu = sigma^-2 H^H y + gamma` and keeps
/// the diagonal of the posterior covariance.
pub fn ep_posterior(gram: &GramCache, state: &mut EpState) -> Result<()> {
    let k = gram.n_users();
    let inv_s2 = 1.0 / gram.noise_var();
    let mut a = gram.gram().clone();
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] *= inv_s2;
        }
        a[(i, i)] += C64::new(state.lambda[i], 0.0);
    }
    let rhs: Vec<C64> = gram
        .matched_filter()
        .iter()
        .zip(&state.gamma)
        .map(|(&z, &g)| z * inv_s2 + g)
        .collect();
    let chol = Cholesky::new(&a)?;
    state.posterior_mean = chol.solve(&rhs);
    state.posterior_var = chol.inverse_diagonal();
    Ok(())
}

/// Cavity extraction: divides the per-user prior out of the joint posterior.
/// Users whose cavity variance would not be positive keep their previous
/// extrinsic values; each such event bumps `fallback_count`.
pub fn ep_extrinsic(state: &mut EpState) {
    for k in 0..state.lambda.len() {
        let sigma = state.posterior_var[k];
        let den = 1.0 - sigma * state.lambda[k];
        if den > 1e-12 {
            let v_ext = sigma / den;
            state.extrinsic_mean[k] =
                (state.posterior_mean[k] / sigma - state.gamma[k]) * v_ext;
            state.extrinsic_var[k] = v_ext;
        } else {
            state.fallback_count += 1;
        }
    }
}

/// Discrete posterior moments of each user's symbol under the extrinsic
/// Gaussian likelihood, variance floored at 1e-8.
pub fn ep_moments(state: &mut EpState, c: &Constellation) {
    for k in 0..state.lambda.len() {
        let (mu, v) = c.posterior_moments(state.extrinsic_mean[k], state.extrinsic_var[k]);
        state.soft_mean[k] = mu;
        state.soft_var[k] = v.max(VARIANCE_FLOOR);
    }
}

/// Damped moment-matching update of `(gamma, lambda)`. A user whose matched
/// precision would be non-positive keeps its previous parameters undamped.
pub fn ep_update_params(state: &mut EpState) {
    let beta = state.damping;
    for k in 0..state.lambda.len() {
        let lambda_new = 1.0 / state.soft_var[k] - 1.0 / state.extrinsic_var[k];
        if lambda_new > 0.0 {
            let gamma_new = state.soft_mean[k] / state.soft_var[k]
                - state.extrinsic_mean[k] / state.extrinsic_var[k];
            state.lambda[k] = beta * lambda_new + (1.0 - beta) * state.lambda[k];
            state.gamma[k] = gamma_new * beta + state.gamma[k] * (1.0 - beta);
        }
    }
}

/// Runs `iterations` EP rounds and hard-slices the final soft means.
pub fn detect_ep(
    gram: &GramCache,
    c: &Constellation,
    damping: f64,
    iterations: usize,
) -> Result<DetectorResult> {
    assert!(iterations >= 1, "need at least one iteration");
    let mut state = EpState::new(gram.n_users(), c.average_energy(), damping);
    for _ in 0..iterations {
        ep_posterior(gram, &mut state)?;
        ep_extrinsic(&mut state);
        ep_moments(&mut state, c);
        ep_update_params(&mut state);
    }
    Ok(DetectorResult::from_soft(
        state.soft_mean.clone(),
        c,
        iterations,
        opcount::ep(gram.n_rx(), gram.n_users(), iterations),
        iterations as u64,
    ))
}
