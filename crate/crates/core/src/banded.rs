//! Pentadiagonal matrices and their LU factorisation without pivoting.

use crate::error::{Error, Result};

const BW: usize = 2;
const WIDTH: usize = 2 * BW + 1;

/// Square matrix with non-zeros only on diagonals `-2..=2`.
#[derive(Debug, Clone)]
pub struct Pentadiagonal {
    n: usize,
    // row-major, entry (i, j) at i * WIDTH + (j + BW - i)
    bands: Vec<f64>,
}

impl Pentadiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            bands: vec![0.0; n * WIDTH],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n && j + BW >= i && j <= i + BW);
        i * WIDTH + (j + BW - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + BW < i || j > i + BW {
            0.0
        } else {
            self.bands[self.slot(i, j)]
        }
    }

    /// Adds `v` at `(i, j)`; silently drops entries outside the matrix.
    #[inline]
    pub fn add(&mut self, i: isize, j: isize, v: f64) {
        if i < 0 || j < 0 || i as usize >= self.n || j as usize >= self.n {
            return;
        }
        let s = self.slot(i as usize, j as usize);
        self.bands[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(BW);
                let hi = (i + BW).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place Doolittle factorisation. Fails on a zero or non-finite pivot.
    pub fn factor(mut self) -> Result<PentaLu> {
        let n = self.n;
        for k in 0..n {
            let pivot = self.bands[self.slot(k, k)];
            if !pivot.is_finite() || pivot.abs() < f64::MIN_POSITIVE {
                return Err(Error::Tolerance(format!("zero pivot at row {k}")));
            }
            for i in k + 1..(k + BW + 1).min(n) {
                let s = self.slot(i, k);
                let l = self.bands[s] / pivot;
                self.bands[s] = l;
                for j in k + 1..(k + BW + 1).min(n) {
                    let upper = self.bands[self.slot(k, j)];
                    let t = self.slot(i, j);
                    self.bands[t] -= l * upper;
                }
            }
        }
        Ok(PentaLu { lu: self })
    }
}

/// Factored form of a [`Pentadiagonal`] matrix.
#[derive(Debug, Clone)]
pub struct PentaLu {
    lu: Pentadiagonal,
}

impl PentaLu {
    /// Solves `A x = b`, overwriting `b` with `x`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.lu.n;
        for i in 0..n {
            let lo = i.saturating_sub(BW);
            let mut s = b[i];
            for (j, bj) in b.iter().enumerate().take(i).skip(lo) {
                s -= self.lu.get(i, j) * bj;
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + BW).min(n - 1);
            let mut s = b[i];
            for (j, bj) in b.iter().enumerate().take(hi + 1).skip(i + 1) {
                s -= self.lu.get(i, j) * bj;
            }
            b[i] = s / self.lu.get(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn solves_diagonally_dominant_systems(
            n in 3usize..40,
            seed in proptest::collection::vec(-1.0f64..1.0, 200),
        ) {
            let mut a = Pentadiagonal::zeros(n);
            let mut k = 0;
            let mut next = || { k += 1; seed[k % seed.len()] };
            for i in 0..n as isize {
                for d in -2..=2isize {
                    let v = if d == 0 { 6.0 + next().abs() } else { next() };
                    a.add(i, i + d, v);
                }
            }
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
            let mut b = a.mul_vec(&x);
            a.factor().unwrap().solve_in_place(&mut b);
            for (xi, bi) in x.iter().zip(&b) {
                prop_assert!((xi - bi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = Pentadiagonal::zeros(4);
        assert!(a.factor().is_err());
    }
}
