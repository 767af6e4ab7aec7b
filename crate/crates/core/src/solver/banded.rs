//! Symmetric positive definite band matrices and their Cholesky factor.

use crate::error::{Error, Result};

/// Lower band of a symmetric matrix: row `k` stores columns `k - bw ..= k`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> usize {
        debug_assert!(col <= row && row - col <= self.bw);
        row * (self.bw + 1) + (col + self.bw - row)
    }

    /// Entry `(row, col)` of the symmetric matrix.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        if r - c > self.bw {
            0.0
        } else {
            self.data[self.slot(r, c)]
        }
    }

    /// Adds `v` to entry `(row, col)` (and its mirror).
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        assert!(r - c <= self.bw, "entry ({r}, {c}) outside bandwidth {}", self.bw);
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    /// In-place Cholesky factorization `A = L Lᵀ`.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for k in 0..n {
            let k0 = k.saturating_sub(bw);
            for j in k0..=k {
                let j0 = j.saturating_sub(bw).max(k0);
                let mut s = self.data[k * w + (j + bw - k)];
                let rk = k * w + bw - k;
                let rj = j * w + bw - j;
                for m in j0..j {
                    s -= self.data[rk + m] * self.data[rj + m];
                }
                if j == k {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::SingularSystem { pivot: k, value: s });
                    }
                    self.data[k * w + bw] = s.sqrt();
                } else {
                    self.data[k * w + (j + bw - k)] = s / self.data[j * w + bw];
                }
            }
        }
        Ok(BandCholesky { factor: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    factor: BandMatrix,
}

impl BandCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let l = &self.factor;
        let (n, bw) = (l.n, l.bw);
        let w = bw + 1;
        assert_eq!(rhs.len(), n);
        let mut y = rhs.to_vec();
        for k in 0..n {
            let mut s = y[k];
            for m in k.saturating_sub(bw)..k {
                s -= l.data[k * w + (m + bw - k)] * y[m];
            }
            y[k] = s / l.data[k * w + bw];
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for r in (k + 1)..n.min(k + bw + 1) {
                s -= l.data[r * w + (k + bw - r)] * y[r];
            }
            y[k] = s / l.data[k * w + bw];
        }
        y
    }
}
