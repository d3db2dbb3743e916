//! Exact maximum-likelihood detection.
//!
//! Small instances are enumerated exhaustively in lexicographic candidate
//! order (which also fixes the tie-breaking rule); larger instances within
//! the candidate budget run a depth-first sphere search over the QR
//! decomposition of the channel, which visits a tiny fraction of the
//! candidate tree while returning the same minimizer.

use crate::channel::ChannelMatrix;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linalg::{qr, CMat};
use crate::result::DetectorResult;
use crate::C64;

/// Default cap on the number of ML candidates `M^K`.
pub const DEFAULT_ML_BUDGET: u128 = 1 << 20;

/// Instances up to this many candidates use plain lexicographic enumeration.
const EXHAUSTIVE_LIMIT: u128 = 4096;

/// Exhaustive-search ML detection with the default candidate budget.
pub fn detect_ml(h: &ChannelMatrix, y: &[C64], c: &Constellation) -> Result<DetectorResult> {
    detect_ml_with_budget(h, y, c, DEFAULT_ML_BUDGET)
}

/// Exhaustive-search ML detection; rejects instances whose candidate count
/// `M^K` exceeds `budget`.
pub fn detect_ml_with_budget(
    h: &ChannelMatrix,
    y: &[C64],
    c: &Constellation,
    budget: u128,
) -> Result<DetectorResult> {
    if y.len() != h.n_rx() {
        return Err(Error::DimensionMismatch(format!(
            "received vector length {} != N={}",
            y.len(),
            h.n_rx()
        )));
    }
    let k = h.n_users();
    let m = c.order() as u128;
    let needed = m
        .checked_pow(k as u32)
        .ok_or(Error::MlBudgetExceeded { needed: u128::MAX, budget })?;
    if needed > budget {
        return Err(Error::MlBudgetExceeded { needed, budget });
    }
    let (soft, ops) = if needed <= EXHAUSTIVE_LIMIT {
        exhaustive(h.mat(), y, c)
    } else {
        sphere(h.mat(), y, c)?
    };
    Ok(DetectorResult::from_soft(soft, c, 1, ops, 0))
}

/// Lexicographic enumeration with strict improvement, so the first minimum in
/// candidate order wins ties.
fn exhaustive(h: &CMat, y: &[C64], c: &Constellation) -> (Vec<C64>, u64) {
    let k = h.cols();
    let m = c.order();
    let mut idx = vec![0usize; k];
    let mut best_idx = idx.clone();
    let mut best_metric = f64::INFINITY;
    let mut ops: u64 = 0;
    let mut x = vec![C64::new(0.0, 0.0); k];
    loop {
        for (xi, &i) in x.iter_mut().zip(&idx) {
            *xi = c.points()[i];
        }
        let hx = h.mat_vec(&x);
        let metric: f64 = y.iter().zip(&hx).map(|(a, b)| (a - b).norm_sqr()).sum();
        ops += (h.rows() * k + h.rows()) as u64;
        if metric < best_metric {
            best_metric = metric;
            best_idx.copy_from_slice(&idx);
        }
        // next candidate in lexicographic order, last user fastest
        let mut level = k;
        loop {
            if level == 0 {
                let soft = best_idx.iter().map(|&i| c.points()[i]).collect();
                return (soft, ops);
            }
            level -= 1;
            idx[level] += 1;
            if idx[level] < m {
                break;
            }
            idx[level] = 0;
        }
    }
}

struct SphereSearch<'a> {
    r: CMat,
    b: Vec<C64>,
    points: &'a [C64],
    best_metric: f64,
    best: Vec<C64>,
    current: Vec<C64>,
    ops: u64,
}

impl SphereSearch<'_> {
    fn descend(&mut self, level: usize, partial: f64) {
        let k = self.r.cols();
        // residual at this level given the symbols fixed above it
        let mut interf = C64::new(0.0, 0.0);
        for j in level + 1..k {
            interf += self.r[(level, j)] * self.current[j];
        }
        let target = self.b[level] - interf;
        let rll = self.r[(level, level)];
        self.ops += (k - level) as u64;

        // Schnorr-Euchner: children by increasing partial distance
        let mut order: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, &s)| ((target - rll * s).norm_sqr(), i))
            .collect();
        self.ops += self.points.len() as u64;
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        for (d, i) in order {
            let pd = partial + d;
            if pd >= self.best_metric {
                break; // all remaining children are at least as far
            }
            self.current[level] = self.points[i];
            if level == 0 {
                self.best_metric = pd;
                self.best.copy_from_slice(&self.current);
            } else {
                self.descend(level - 1, pd);
            }
        }
    }
}

fn sphere(h: &CMat, y: &[C64], c: &Constellation) -> Result<(Vec<C64>, u64)> {
    let k = h.cols();
    let (q, r) = qr(h)?;
    let b = q.herm_vec(y);
    let mut search = SphereSearch {
        r,
        b,
        points: c.points(),
        best_metric: f64::INFINITY,
        best: vec![C64::new(0.0, 0.0); k],
        current: vec![C64::new(0.0, 0.0); k],
        ops: (h.rows() * k * k + h.rows() * k) as u64,
    };
    search.descend(k - 1, 0.0);
    Ok((search.best, search.ops))
}
