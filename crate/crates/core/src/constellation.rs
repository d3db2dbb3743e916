//! Square M-QAM constellations with reflected Gray labeling.
//!
//! Points live on the odd-integer grid scaled to unit average symbol energy.
//! The canonical point ordering is row-major from the most-negative
//! real/imaginary corner; per-axis indices carry a reflected Gray code, with
//! the first half of each symbol's bit group addressing the real axis and the
//! second half the imaginary axis.

use crate::error::{Error, Result};
use crate::C64;

/// A square M-QAM alphabet with Gray bit labels and unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<C64>,
    labels: Vec<u32>,
    label_to_index: Vec<usize>,
    axis_levels: usize,
    average_energy: f64,
}

/// Modulated symbols together with the bits that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitVector {
    pub symbols: Vec<C64>,
    pub source_bits: Vec<u8>,
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: u32) -> u32 {
    let mut i = g;
    while g > 0 {
        g >>= 1;
        i ^= g;
    }
    i
}

/// Builds the Gray-labeled square QAM constellation of the given order.
///
/// Supported orders are 4, 16, 64 and 256. Points are scaled so the mean of
/// `|point|^2` over the alphabet is exactly 1.
pub fn build_constellation(order: usize) -> Result<Constellation> {
    if ![4, 16, 64, 256].contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let bits_per_symbol = order.trailing_zeros() as usize;
    let axis_levels = 1usize << (bits_per_symbol / 2);
    // mean of level^2 over {±1, ±3, ..} per axis is (L^2-1)/3; two axes.
    let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();

    let mut points = Vec::with_capacity(order);
    let mut labels = Vec::with_capacity(order);
    let half = bits_per_symbol / 2;
    for i_re in 0..axis_levels {
        let re = (2.0 * i_re as f64 - (axis_levels as f64 - 1.0)) * scale;
        for i_im in 0..axis_levels {
            let im = (2.0 * i_im as f64 - (axis_levels as f64 - 1.0)) * scale;
            points.push(C64::new(re, im));
            labels.push((gray(i_re as u32) << half) | gray(i_im as u32));
        }
    }
    let mut label_to_index = vec![0usize; order];
    for (idx, &lab) in labels.iter().enumerate() {
        label_to_index[lab as usize] = idx;
    }
    let average_energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
    Ok(Constellation {
        order,
        bits_per_symbol,
        points,
        labels,
        label_to_index,
        axis_levels,
        average_energy,
    })
}

impl Constellation {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    /// Gray label of the point at `index`, packed MSB-first into the low
    /// `bits_per_symbol` bits.
    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    /// Average symbol energy `E_x` (1 by construction).
    pub fn average_energy(&self) -> f64 {
        self.average_energy
    }

    /// Largest per-axis coordinate; the alphabet's convex hull is the square
    /// `[-max, max]^2`.
    pub fn max_axis_coordinate(&self) -> f64 {
        self.points[self.points.len() - 1].re
    }

    /// Index of the nearest point in Euclidean distance; ties resolve to the
    /// smaller index in the canonical ordering.
    pub fn nearest_index(&self, z: C64) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Nearest constellation point (same tie rule as [`Self::nearest_index`]).
    pub fn slice(&self, z: C64) -> C64 {
        self.points[self.nearest_index(z)]
    }

    fn push_label_bits(&self, label: u32, out: &mut Vec<u8>) {
        for b in (0..self.bits_per_symbol).rev() {
            out.push(((label >> b) & 1) as u8);
        }
    }

    /// Mean and variance of the alphabet under a Gaussian likelihood centered
    /// at `mean` with variance `var`, i.e. weights `w(s) ∝ exp(-|mean-s|²/var)`
    /// normalized over the alphabet. Computed in the log domain with
    /// per-call max subtraction so small variances cannot underflow.
    pub fn posterior_moments(&self, mean: C64, var: f64) -> (C64, f64) {
        let inv = 1.0 / var.max(1e-300);
        let mut scores = Vec::with_capacity(self.order);
        let mut max_score = f64::NEG_INFINITY;
        for p in &self.points {
            let s = -(mean - p).norm_sqr() * inv;
            if s > max_score {
                max_score = s;
            }
            scores.push(s);
        }
        let mut norm = 0.0;
        let mut mu = C64::new(0.0, 0.0);
        for (p, s) in self.points.iter().zip(&scores) {
            let w = (s - max_score).exp();
            norm += w;
            mu += p * w;
        }
        mu /= norm;
        let mut v = 0.0;
        for (p, s) in self.points.iter().zip(&scores) {
            let w = (s - max_score).exp() / norm;
            v += (p - mu).norm_sqr() * w;
        }
        (mu, v)
    }
}

/// Maps a bit stream onto constellation symbols, one symbol per
/// `bits_per_symbol` group. The stream must be nonempty and a multiple of the
/// group size.
pub fn modulate(bits: &[u8], c: &Constellation) -> Result<TransmitVector> {
    let m = c.bits_per_symbol;
    if bits.is_empty() || bits.len() % m != 0 {
        return Err(Error::BadBitLength { len: bits.len(), bits_per_symbol: m });
    }
    let half = m / 2;
    let mut symbols = Vec::with_capacity(bits.len() / m);
    for group in bits.chunks_exact(m) {
        let mut v: u32 = 0;
        for &b in group {
            debug_assert!(b <= 1, "bits must be 0 or 1");
            v = (v << 1) | u32::from(b);
        }
        let i_re = gray_inverse(v >> half) as usize;
        let i_im = gray_inverse(v & ((1 << half) - 1)) as usize;
        symbols.push(c.points[i_re * c.axis_levels + i_im]);
    }
    Ok(TransmitVector { symbols, source_bits: bits.to_vec() })
}

/// Hard-demaps symbols to the bit labels of their nearest constellation
/// points.
pub fn demap_hard(symbols: &[C64], c: &Constellation) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * c.bits_per_symbol);
    for &s in symbols {
        let label = c.labels[c.nearest_index(s)];
        c.push_label_bits(label, &mut bits);
    }
    bits
}
