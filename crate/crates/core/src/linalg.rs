//! Small dense complex linear algebra used by the detectors.
//!
//! The systems solved here are at most `K x K` with `K` in the tens to low
//! hundreds, so a straightforward row-major matrix and an unblocked Cholesky
//! factorization are all that is needed.

use crate::error::{Error, Result};
use crate::C64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    data: Vec<C64>,
    rows: usize,
    cols: usize,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { data: vec![C64::new(0.0, 0.0); rows * cols], rows, cols }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must be rows*cols");
        Self { data, rows, cols }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// `A^H A` for this matrix (the Gram matrix of its columns).
    pub fn gram(&self) -> CMat {
        let (n, k) = (self.rows, self.cols);
        let mut g = CMat::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..n {
                    acc += self[(r, i)].conj() * self[(r, j)];
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
        }
        g
    }

    /// `A^H v`.
    pub fn herm_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.rows, "vector length must equal rows");
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for r in 0..self.rows {
            let row = self.row(r);
            let vr = v[r];
            for (o, a) in out.iter_mut().zip(row.iter()) {
                *o += a.conj() * vr;
            }
        }
        out
    }

    /// `A v`.
    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length must equal cols");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Lower-triangular Cholesky factor `L` of a Hermitian positive-definite `A`,
/// with `A = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: CMat,
}

impl Cholesky {
    /// Factorizes `a`. Fails with [`Error::SingularMatrix`] when a pivot is
    /// not strictly positive.
    pub fn new(a: &CMat) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "Cholesky needs a square matrix");
        let n = a.rows;
        let mut l = CMat::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::SingularMatrix);
            }
            let dj = d.sqrt();
            l[(j, j)] = C64::new(dj, 0.0);
            for i in j + 1..n {
                let mut acc = a[(i, j)];
                for k in 0..j {
                    acc -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = acc / dj;
            }
        }
        Ok(Self { l })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.l.rows;
        assert_eq!(b.len(), n, "rhs length must equal matrix size");
        // forward: L z = b
        let mut z = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[(i, k)];
                z[i] = z[i] - lik * z[k];
            }
            z[i] /= self.l[(i, i)];
        }
        // backward: L^H x = z
        for i in (0..n).rev() {
            for k in i + 1..n {
                let lki = self.l[(k, i)].conj();
                z[i] = z[i] - lki * z[k];
            }
            z[i] /= self.l[(i, i)];
        }
        z
    }

    /// Diagonal of `A^{-1}`.
    ///
    /// Column `k` of `L^{-1}` is obtained by a forward solve against `e_k`;
    /// the inverse diagonal entry is that column's squared norm.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.l.rows;
        let mut diag = vec![0.0; n];
        let mut w = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            for wi in w.iter_mut() {
                *wi = C64::new(0.0, 0.0);
            }
            w[k] = C64::new(1.0, 0.0) / self.l[(k, k)];
            for i in k + 1..n {
                let mut acc = C64::new(0.0, 0.0);
                for j in k..i {
                    acc += self.l[(i, j)] * w[j];
                }
                w[i] = -acc / self.l[(i, i)];
            }
            diag[k] = w[k..].iter().map(|x| x.norm_sqr()).sum();
        }
        diag
    }
}

/// QR decomposition by modified Gram-Schmidt; returns `(Q, R)` with `Q` of
/// size rows x cols and `R` upper triangular cols x cols.
pub fn qr(a: &CMat) -> Result<(CMat, CMat)> {
    let (m, n) = (a.rows, a.cols);
    let mut q = a.clone();
    let mut r = CMat::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let mut dot = C64::new(0.0, 0.0);
            for k in 0..m {
                dot += q[(k, i)].conj() * q[(k, j)];
            }
            r[(i, j)] = dot;
            for k in 0..m {
                let qki = q[(k, i)];
                q[(k, j)] = q[(k, j)] - dot * qki;
            }
        }
        let norm: f64 = (0..m).map(|k| q[(k, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            return Err(Error::SingularMatrix);
        }
        r[(j, j)] = C64::new(norm, 0.0);
        for k in 0..m {
            q[(k, j)] /= norm;
        }
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    // 2x2 Hermitian solve checked against the explicit adjugate inverse.
    #[test]
    fn cholesky_matches_2x2_adjugate() {
        let a = CMat::from_rows(2, 2, vec![c(3.0, 0.0), c(0.5, -0.7), c(0.5, 0.7), c(2.0, 0.0)]);
        let b = [c(1.0, 2.0), c(-0.3, 0.4)];
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let x0 = (a[(1, 1)] * b[0] - a[(0, 1)] * b[1]) / det;
        let x1 = (a[(0, 0)] * b[1] - a[(1, 0)] * b[0]) / det;
        let x = Cholesky::new(&a).unwrap().solve(&b);
        assert_abs_diff_eq!(x[0].re, x0.re, epsilon = 1e-12);
        assert_abs_diff_eq!(x[0].im, x0.im, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1].re, x1.re, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1].im, x1.im, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CMat::from_rows(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(Cholesky::new(&a).unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn inverse_diagonal_matches_full_inverse_2x2() {
        let a = CMat::from_rows(2, 2, vec![c(4.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(3.0, 0.0)]);
        let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).re;
        let inv_diag = [a[(1, 1)].re / det, a[(0, 0)].re / det];
        let got = Cholesky::new(&a).unwrap().inverse_diagonal();
        assert_abs_diff_eq!(got[0], inv_diag[0], epsilon = 1e-12);
        assert_abs_diff_eq!(got[1], inv_diag[1], epsilon = 1e-12);
    }

    #[test]
    fn gram_matches_triple_loop() {
        // random-ish fixed 4x2 matrix
        let h = CMat::from_rows(
            4,
            2,
            vec![
                c(0.3, -0.2), c(1.1, 0.4),
                c(-0.7, 0.9), c(0.2, -1.3),
                c(0.5, 0.5), c(-0.6, 0.1),
                c(1.0, -0.8), c(0.4, 0.7),
            ],
        );
        let g = h.gram();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for r in 0..4 {
                    acc += h[(r, i)].conj() * h[(r, j)];
                }
                assert_abs_diff_eq!(g[(i, j)].re, acc.re, epsilon = 1e-12);
                assert_abs_diff_eq!(g[(i, j)].im, acc.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn qr_reconstructs() {
        let h = CMat::from_rows(
            3,
            2,
            vec![c(1.0, 0.2), c(0.3, -0.4), c(-0.5, 0.8), c(0.9, 0.1), c(0.2, -0.6), c(0.7, 0.3)],
        );
        let (q, r) = qr(&h).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..2 {
                    acc += q[(i, k)] * r[(k, j)];
                }
                assert_abs_diff_eq!(acc.re, h[(i, j)].re, epsilon = 1e-12);
                assert_abs_diff_eq!(acc.im, h[(i, j)].im, epsilon = 1e-12);
            }
        }
    }
}
