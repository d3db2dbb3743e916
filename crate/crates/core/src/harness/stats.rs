//! Interval estimates for Monte-Carlo error rates.

/// 95% Wilson score interval for a Bernoulli rate observed as
/// `successes / trials`. Panics if `trials` is zero.
pub fn confidence_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials >= 1, "confidence interval needs at least one observation");
    let z = 1.959963984540054_f64; // 97.5% standard normal quantile
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // at the boundaries center - half and center + half are exactly p
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}
