//! Symmetric tridiagonal matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length must be n - 1");
        SymTridiagonal { diag, off }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n.saturating_sub(1)])
    }

    pub fn from_diagonal(diag: Vec<f64>) -> Self {
        let n = diag.len();
        Self::new(diag, vec![0.0; n.saturating_sub(1)])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Entry `(i, j)` with zero-based indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `x . M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        crate::numeric::dot(x, &self.mul_vec(x))
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self::new(
            self.diag.iter().map(|v| v * f).collect(),
            self.off.iter().map(|v| v * f).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.diag.iter().zip(&other.diag).map(|(a, b)| a + b).collect(),
            self.off.iter().zip(&other.off).map(|(a, b)| a + b).collect(),
        )
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Determinant by the three-term recurrence.
    pub fn det(&self) -> f64 {
        self.leading_minors().last().copied().unwrap_or(1.0)
    }

    /// Leading principal minors of orders `1..=n`.
    pub fn leading_minors(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        let (mut prev2, mut prev1) = (1.0, 1.0);
        for i in 0..n {
            let cur = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] * prev1 - self.off[i - 1] * self.off[i - 1] * prev2
            };
            out.push(cur);
            prev2 = prev1;
            prev1 = cur;
        }
        out
    }

    /// Determinant and its directional derivative along `dir`, obtained by
    /// differentiating the recurrence.
    pub fn det_with_derivative(&self, dir: &Self) -> (f64, f64) {
        let n = self.dim();
        if n == 0 {
            return (1.0, 0.0);
        }
        let (mut f2, mut f1) = (1.0, self.diag[0]);
        let (mut g2, mut g1) = (0.0, dir.diag[0]);
        for i in 1..n {
            let b = self.off[i - 1];
            let db = dir.off[i - 1];
            let f = self.diag[i] * f1 - b * b * f2;
            let g = dir.diag[i] * f1 + self.diag[i] * g1 - 2.0 * b * db * f2 - b * b * g2;
            f2 = f1;
            f1 = f;
            g2 = g1;
            g1 = g;
        }
        (f1, g1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_matches_dense() {
        let t = SymTridiagonal::new(vec![2.0, 3.0, 4.0], vec![1.0, -0.5]);
        assert!((t.det() - t.to_dense().determinant()).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_difference() {
        let t = SymTridiagonal::new(vec![2.0, 3.0, 4.0], vec![1.0, -0.5]);
        let d = SymTridiagonal::new(vec![0.3, -0.1, 0.2], vec![0.7, 0.4]);
        let (_, dd) = t.det_with_derivative(&d);
        let e = 1e-6;
        let fd = (t.add(&d.scaled(e)).det() - t.add(&d.scaled(-e)).det()) / (2.0 * e);
        assert!((dd - fd).abs() < 1e-8);
    }
}
