//! Uplink multi-user detection toolkit for massive MIMO.
//!
//! The crate models a flat-fading uplink in which `K` single-antenna users
//! transmit square-QAM symbols towards an `N`-antenna base station over an
//! i.i.d. complex Rayleigh channel, `y = H x + n`. On top of that model it
//! implements a family of symbol detectors:
//!
//! * classical linear receivers: MRC, ZF, MMSE ([`detect_mrc`], [`detect_zf`],
//!   [`detect_mmse`])
//! * iterative parallel interference cancellation with decision statistic
//!   combining ([`detect_pic_dsc`])
//! * an expectation-propagation receiver with damped moment matching
//!   ([`detect_ep`])
//! * a linear Bayesian learning receiver built from Bayesian symbol
//!   observation, Bayesian symbol estimation and decision statistic
//!   combining stages ([`detect_lbl`])
//! * an exact maximum-likelihood reference ([`detect_ml`])
//!
//! The [`harness`] module runs deterministic, paired Monte-Carlo experiments
//! over these detectors: BER sweeps, convergence traces, load-ratio studies
//! and complexity comparisons.

pub mod channel;
pub mod constellation;
pub mod ep;
pub mod error;
pub mod gram;
pub mod harness;
pub mod lbl;
pub mod linalg;
pub mod linear;
pub mod ml;
pub mod opcount;
pub mod pic;
pub mod result;

pub use channel::{sample_channel, snr_to_noise_variance, transmit, ChannelMatrix, NoiseSpec, RngStream};
pub use constellation::{build_constellation, demap_hard, modulate, Constellation, TransmitVector};
pub use ep::{detect_ep, EpState};
pub use error::Error;
pub use gram::{compute_gram, GramCache};
pub use lbl::{detect_lbl, LblConfig};
pub use linear::{detect_mmse, detect_mrc, detect_zf};
pub use ml::detect_ml;
pub use pic::detect_pic_dsc;
pub use result::{DetectorId, DetectorResult};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
