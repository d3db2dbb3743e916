//! Complexity accounting for the detectors.
//!
//! Counts are complex multiply-accumulate charges under the dominant-term
//! accounting conventions used for receiver complexity comparisons
//! (additions are free, exponentials and scalar bookkeeping are ignored):
//!
//! * one-shot linear filters (MMSE/ZF) are charged `N^2 K + N K` for filter
//!   construction and application,
//! * the expectation-propagation receiver repeats that work every iteration,
//! * matched-filter based iterative receivers (PIC, LBL) are charged their
//!   matched-filter setup `2 N K` plus `N K`-dominant per-iteration terms,
//! * exhaustive/spherical ML search is tallied from the nodes it actually
//!   visits.
//!
//! Under these rules the counts reproduce the standard scaling laws:
//! MMSE grows as `Theta(N^2 K)`, PIC and LBL as `Theta(N K T)`.
//! The number of dense matrix factorizations each detector performs is
//! tracked separately so the no-inversion property of the PIC/LBL path is
//! directly assertable.

/// Charge for building `H^H H` and `H^H y` from scratch.
pub fn gram_setup(n: usize, k: usize) -> u64 {
    (n * k * k + n * k) as u64
}

/// MMSE (and ZF) detection charge.
pub fn mmse(n: usize, k: usize) -> u64 {
    (n * n * k + n * k) as u64
}

/// Per-detection MRC charge: matched filter plus per-user channel energies.
pub fn mrc(n: usize, k: usize) -> u64 {
    (2 * n * k + k) as u64
}

/// EP charge for `t` iterations; each iteration rebuilds and inverts the
/// regularized filter.
pub fn ep(n: usize, k: usize, t: usize) -> u64 {
    mmse(n, k) * t as u64
}

/// PIC-DSC charge for `t` iterations: matched-filter setup plus one
/// interference-cancellation pass and the DSC update per iteration.
pub fn pic(n: usize, k: usize, t: usize) -> u64 {
    (2 * n * k) as u64 + (t * (n * k + 4 * k)) as u64
}

/// LBL charge for `t` iterations: the PIC recursion plus the per-user
/// posterior projection over the `m`-point alphabet.
pub fn lbl(n: usize, k: usize, m: usize, t: usize) -> u64 {
    (2 * n * k) as u64 + (t * (n * k + k * m + 4 * k)) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mmse_doubles_n_quadruples() {
        // Theta(N^2 K): doubling N multiplies the count by 4 within 5%
        let a = mmse(64, 16) as f64;
        let b = mmse(128, 16) as f64;
        let ratio = b / a;
        assert!((ratio - 4.0).abs() / 4.0 < 0.05, "ratio {ratio}");
    }

    #[test]
    fn pic_doubles_n_doubles() {
        let a = pic(64, 16, 10) as f64;
        let b = pic(128, 16, 10) as f64;
        let ratio = b / a;
        assert!((ratio - 2.0).abs() / 2.0 < 0.05, "ratio {ratio}");
    }

    #[test]
    fn lbl_scaling_in_n_and_k() {
        let a = lbl(96, 32, 4, 10) as f64;
        let b = lbl(192, 64, 4, 10) as f64;
        let ratio = b / a;
        assert!((ratio - 4.0).abs() / 4.0 < 0.10, "ratio {ratio}");
    }

    #[test]
    fn paper_configuration_ratios() {
        let lbl_count = lbl(192, 64, 4, 10) as f64;
        let mmse_count = mmse(192, 64) as f64;
        let ep_count = ep(192, 64, 10) as f64;
        assert!(mmse_count / lbl_count >= 15.0);
        assert!(ep_count / lbl_count >= 100.0);
    }
}
