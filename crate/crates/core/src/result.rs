//! Common detector output type and detector identifiers.

use crate::constellation::{demap_hard, Constellation};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Output of one detection: hard and soft symbol decisions plus the
/// bookkeeping the harness aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorResult {
    /// Hard symbol decisions, each a constellation point.
    pub hard_symbols: Vec<C64>,
    /// Final soft symbol estimates before slicing.
    pub soft_symbols: Vec<C64>,
    /// Hard bits demapped from `hard_symbols`.
    pub hard_bits: Vec<u8>,
    /// Iterations executed (1 for one-shot detectors).
    pub iterations_used: usize,
    /// Complex multiply-accumulate charge (see [`crate::opcount`]).
    pub op_count: u64,
    /// Dense matrix factorizations performed during detection.
    pub factorizations: u64,
}

impl DetectorResult {
    /// Builds a result by slicing `soft` to the nearest constellation points.
    pub fn from_soft(
        soft: Vec<C64>,
        c: &Constellation,
        iterations_used: usize,
        op_count: u64,
        factorizations: u64,
    ) -> Self {
        let hard_symbols: Vec<C64> = soft.iter().map(|&z| c.slice(z)).collect();
        let hard_bits = demap_hard(&hard_symbols, c);
        Self { hard_symbols, soft_symbols: soft, hard_bits, iterations_used, op_count, factorizations }
    }
}

/// Identifies one of the implemented detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorId {
    Mrc,
    Zf,
    Mmse,
    Pic,
    Ep,
    Lbl,
    Ml,
}

impl DetectorId {
    pub const ALL: [DetectorId; 7] = [
        DetectorId::Mrc,
        DetectorId::Zf,
        DetectorId::Mmse,
        DetectorId::Pic,
        DetectorId::Ep,
        DetectorId::Lbl,
        DetectorId::Ml,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorId::Mrc => "mrc",
            DetectorId::Zf => "zf",
            DetectorId::Mmse => "mmse",
            DetectorId::Pic => "pic",
            DetectorId::Ep => "ep",
            DetectorId::Lbl => "lbl",
            DetectorId::Ml => "ml",
        }
    }
}

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mrc" => Ok(DetectorId::Mrc),
            "zf" => Ok(DetectorId::Zf),
            "mmse" => Ok(DetectorId::Mmse),
            "pic" | "pic-dsc" => Ok(DetectorId::Pic),
            "ep" => Ok(DetectorId::Ep),
            "lbl" => Ok(DetectorId::Lbl),
            "ml" => Ok(DetectorId::Ml),
            other => Err(format!("unknown detector '{other}'")),
        }
    }
}
