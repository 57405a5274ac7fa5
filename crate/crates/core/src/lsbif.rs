//! Multi-parameter Lyapunov-Schmidt reduction in finite dimensions.
//!
//! A smooth map `F(x, c)` with `F(0, c) = 0` has, at `c*`, an
//! `n`-dimensional kernel spanned by `x_1..x_n` and a cokernel spanned by
//! `y_1..y_n`. Writing `x = sum s_i x_i + x_rest` with `x_rest` orthogonal to
//! the kernel, the complementary equations `(I - P) F = 0` are solved for
//! `x_rest`, and the reduced map `H_i(s, c) = y_i* F / s_i` is then solved
//! for `c` at fixed `s`. Jacobians are formed by finite differences.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Map = Box<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

pub struct BifProblem {
    map: Map,
    dim: usize,
    c_star: Vec<f64>,
    kernel: DMatrix<f64>,
    kernel_dual: DMatrix<f64>,
    cokernel_dual: DMatrix<f64>,
    domain_rest: DMatrix<f64>,
    range_rest: DMatrix<f64>,
}

fn orthogonal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n_total = basis.nrows();
    let n = basis.ncols();
    let gram = basis.transpose() * basis;
    let inv = gram.try_inverse().expect("independent basis");
    let proj = DMatrix::identity(n_total, n_total) - basis * inv * basis.transpose();
    let proj = (&proj + proj.transpose()) * 0.5;
    let (values, vectors) = crate::numeric::sym_eigen_raw(&proj);
    let cols: Vec<DVector<f64>> = (n..n_total)
        .filter(|&i| values[i].is_finite())
        .map(|i| DVector::from_column_slice(&vectors[i]))
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n_total, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn dual_rows(basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gram = basis.transpose() * basis;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Invalid("basis vectors are linearly dependent".into()))?;
    Ok(inv * basis.transpose())
}

fn columns(vectors: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::Invalid(format!("basis vectors must have length {dim}")));
    }
    let cols: Vec<DVector<f64>> = vectors.iter().map(|v| DVector::from_column_slice(v)).collect();
    Ok(DMatrix::from_columns(&cols))
}

/// A point on the solution set near the bifurcation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub s: Vec<f64>,
    pub c: Vec<f64>,
    pub x: Vec<f64>,
    /// `||F(x, c)||`.
    pub residual: f64,
    /// Some `s_i` vanishes, so `c_i` is not determined uniquely.
    pub may_be_non_unique: bool,
}

const NEWTON_ITERS: usize = 60;

impl BifProblem {
    /// `kernel` and `cokernel` each hold `n` vectors of length `dim`; the
    /// number of parameters equals `n`.
    pub fn new(map: Map, dim: usize, c_star: Vec<f64>, kernel: Vec<Vec<f64>>, cokernel: Vec<Vec<f64>>) -> Result<Self> {
        let n = kernel.len();
        if n == 0 || cokernel.len() != n || c_star.len() != n || n > dim {
            return Err(Error::Invalid("kernel, cokernel and parameters must have equal size n <= dim".into()));
        }
        let kernel = columns(&kernel, dim)?;
        let cokernel = columns(&cokernel, dim)?;
        Ok(BifProblem {
            map,
            dim,
            c_star,
            kernel_dual: dual_rows(&kernel)?,
            cokernel_dual: dual_rows(&cokernel)?,
            domain_rest: orthogonal_complement(&kernel),
            range_rest: orthogonal_complement(&cokernel),
            kernel,
        })
    }

    pub fn n(&self) -> usize {
        self.c_star.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c_star(&self) -> &[f64] {
        &self.c_star
    }

    pub fn eval(&self, x: &[f64], c: &[f64]) -> Vec<f64> {
        (self.map)(x, c)
    }

    /// Kernel coordinates `s` of `x`.
    pub fn kernel_coordinates(&self, x: &[f64]) -> Vec<f64> {
        (&self.kernel_dual * DVector::from_column_slice(x)).iter().copied().collect()
    }

    fn kernel_part(&self, s: &[f64]) -> DVector<f64> {
        &self.kernel * DVector::from_column_slice(s)
    }

    /// Solves `(I - P) F(sum s_i x_i + x_rest, c) = 0` for `x_rest`.
    pub fn reduce(&self, s: &[f64], c: &[f64]) -> Result<Vec<f64>> {
        let m = self.domain_rest.ncols();
        if m == 0 || s.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; self.dim]);
        }
        let base = self.kernel_part(s);
        let mut w = DVector::zeros(m);
        let residual = |w: &DVector<f64>| -> DVector<f64> {
            let x = &base + &self.domain_rest * w;
            let f = DVector::from_vec(self.eval(x.as_slice(), c));
            self.range_rest.transpose() * f
        };
        let mut g = residual(&w);
        let scale = 1.0 + base.norm();
        for _ in 0..NEWTON_ITERS {
            if g.norm() < 1e-15 * scale {
                break;
            }
            let mut jac = DMatrix::zeros(m, m);
            for col in 0..m {
                let h = 1e-7 * (1.0 + w[col].abs());
                let mut wp = w.clone();
                wp[col] += h;
                jac.set_column(col, &((residual(&wp) - &g) / h));
            }
            let step = jac
                .lu()
                .solve(&g)
                .ok_or_else(|| Error::Numerical("singular complement Jacobian".into()))?;
            let next = &w - step;
            let g_next = residual(&next);
            if g_next.norm() >= g.norm() && g.norm() < 1e-12 * scale {
                break;
            }
            w = next;
            g = g_next;
        }
        if g.norm() > 1e-9 * scale {
            return Err(Error::Numerical(format!("complement equations not solved: residual {:e}", g.norm())));
        }
        Ok((&self.domain_rest * w).iter().copied().collect())
    }

    /// Full state `sum s_i x_i + x_rest(s, c)`.
    pub fn state(&self, s: &[f64], c: &[f64]) -> Result<Vec<f64>> {
        let rest = DVector::from_vec(self.reduce(s, c)?);
        Ok((self.kernel_part(s) + rest).iter().copied().collect())
    }

    fn projected(&self, s: &[f64], c: &[f64]) -> Result<Vec<f64>> {
        let x = self.state(s, c)?;
        let f = DVector::from_vec(self.eval(&x, c));
        Ok((&self.cokernel_dual * f).iter().copied().collect())
    }

    /// `H_i(s, c) = y_i* F / s_i`, with the limit value where `s_i = 0`.
    pub fn reduced_map(&self, s: &[f64], c: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let proj = self.projected(s, c)?;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            if s[i] != 0.0 {
                out.push(proj[i] / s[i]);
                continue;
            }
            let slope = |h: f64| -> Result<f64> {
                let mut sp = s.to_vec();
                sp[i] = h;
                let up = self.projected(&sp, c)?[i];
                sp[i] = -h;
                let down = self.projected(&sp, c)?[i];
                Ok((up - down) / (2.0 * h))
            };
            let h = 1e-4;
            out.push((4.0 * slope(h / 2.0)? - slope(h)?) / 3.0);
        }
        Ok(out)
    }

    fn reduced_jacobian(&self, s: &[f64], c: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.n();
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let h = 1e-6 * (1.0 + c[j].abs());
            let mut cp = c.to_vec();
            cp[j] += h;
            let up = self.reduced_map(s, &cp)?;
            cp[j] -= 2.0 * h;
            let down = self.reduced_map(s, &cp)?;
            for i in 0..n {
                jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
            }
        }
        Ok(jac)
    }

    /// `nu_ij = y_i* d/dc_j (D_x F[0, c] x_i)` at `c*`.
    pub fn nu_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let (eps, del) = (1e-4, 1e-4);
        let mut nu = DMatrix::zeros(n, n);
        for i in 0..n {
            let xi: Vec<f64> = self.kernel.column(i).iter().copied().collect();
            let scaled = |f: f64| -> Vec<f64> { xi.iter().map(|v| v * f).collect() };
            for j in 0..n {
                let mut cp = self.c_star.clone();
                cp[j] += del;
                let mut cm = self.c_star.clone();
                cm[j] -= del;
                let f = |x: &[f64], c: &[f64]| DVector::from_vec(self.eval(x, c));
                let mixed = (f(&scaled(eps), &cp) - f(&scaled(-eps), &cp) - f(&scaled(eps), &cm)
                    + f(&scaled(-eps), &cm))
                    / (4.0 * eps * del);
                nu[(i, j)] = (self.cokernel_dual.row(i) * mixed)[0];
            }
        }
        nu
    }

    /// Solves `H(s, c) = 0` for `c` by Newton's method from `c*`.
    pub fn solve_branch(&self, s: &[f64]) -> Result<BranchPoint> {
        if s.len() != self.n() {
            return Err(Error::Invalid(format!("s must have {} entries", self.n())));
        }
        let mut c = self.c_star.clone();
        let mut h = DVector::from_vec(self.reduced_map(s, &c)?);
        for _ in 0..NEWTON_ITERS {
            if h.norm() < 1e-14 {
                break;
            }
            let jac = self.reduced_jacobian(s, &c)?;
            let step = jac
                .lu()
                .solve(&h)
                .ok_or_else(|| Error::Numerical("transversality matrix is singular".into()))?;
            let next: Vec<f64> = c.iter().zip(step.iter()).map(|(a, d)| a - d).collect();
            let h_next = DVector::from_vec(self.reduced_map(s, &next)?);
            if h_next.norm() >= h.norm() && h.norm() < 1e-12 {
                break;
            }
            c = next;
            h = h_next;
        }
        if h.norm() > 1e-9 {
            return Err(Error::Numerical(format!("reduced equations not solved: residual {:e}", h.norm())));
        }
        let x = self.state(s, &c)?;
        let residual = DVector::from_vec(self.eval(&x, &c)).norm();
        Ok(BranchPoint {
            s: s.to_vec(),
            c,
            x,
            residual,
            may_be_non_unique: s.iter().any(|&v| v == 0.0),
        })
    }

    /// Largest `|y_i* F(x(s, c), c)|` over samples with `s_i = 0`, a
    /// computable check of the invariance assumption behind the reduction.
    pub fn invariance_defect(&self, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (s, c) in samples {
            let proj = self.projected(s, c)?;
            for i in 0..self.n() {
                if s[i] == 0.0 {
                    worst = worst.max(proj[i].abs());
                }
            }
        }
        Ok(worst)
    }
}

/// Model problems with known solution sets.
pub mod toys {
    use super::*;

    fn unit(dim: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    }

    /// `F_i = (c_i - c_i*) x_i - x_i^3`, with branch `c = c* + s^2`.
    pub fn pitchfork(c_star: [f64; 2]) -> BifProblem {
        let map: Map = Box::new(move |x: &[f64], c: &[f64]| {
            (0..2).map(|i| (c[i] - c_star[i]) * x[i] - x[i].powi(3)).collect()
        });
        BifProblem::new(map, 2, c_star.to_vec(), vec![unit(2, 0), unit(2, 1)], vec![unit(2, 0), unit(2, 1)])
            .expect("valid toy")
    }

    /// Pitchfork with a slaved third component `x3 + x1^2 = 0`.
    pub fn with_complement(c_star: [f64; 2]) -> BifProblem {
        let map: Map = Box::new(move |x: &[f64], c: &[f64]| {
            vec![
                (c[0] - c_star[0]) * x[0] - x[0].powi(3),
                (c[1] - c_star[1]) * x[1] - x[1].powi(3),
                x[2] + x[0] * x[0],
            ]
        });
        BifProblem::new(map, 3, c_star.to_vec(), vec![unit(3, 0), unit(3, 1)], vec![unit(3, 0), unit(3, 1)])
            .expect("valid toy")
    }

    /// Coefficients of [`coupled`].
    #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
    pub struct Coupling {
        pub m12: f64,
        pub m21: f64,
        pub p: f64,
        pub q: f64,
        pub u: f64,
        pub v: f64,
        pub w: f64,
    }

    /// Two coupled pitchforks feeding a slaved component:
    /// `F1 = x1 (dc1 + m12 dc2 - p x1^2 - q x2^2 + w x3)`,
    /// `F2 = x2 (m21 dc1 + dc2 - u x1^2 - v x2^2)`, `F3 = x3 - x1 x2`.
    pub fn coupled(c_star: [f64; 2], k: Coupling) -> BifProblem {
        let map: Map = Box::new(move |x: &[f64], c: &[f64]| {
            let (d1, d2) = (c[0] - c_star[0], c[1] - c_star[1]);
            vec![
                x[0] * (d1 + k.m12 * d2 - k.p * x[0] * x[0] - k.q * x[1] * x[1] + k.w * x[2]),
                x[1] * (k.m21 * d1 + d2 - k.u * x[0] * x[0] - k.v * x[1] * x[1]),
                x[2] - x[0] * x[1],
            ]
        });
        BifProblem::new(map, 3, c_star.to_vec(), vec![unit(3, 0), unit(3, 1)], vec![unit(3, 0), unit(3, 1)])
            .expect("valid toy")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_amplitude_gives_trivial_complement() {
        let p = toys::with_complement([1.0, 2.0]);
        assert_eq!(p.reduce(&[0.0, 0.0], &[1.3, 2.1]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn pitchfork_branch() {
        let p = toys::pitchfork([0.5, -0.25]);
        let b = p.solve_branch(&[0.1, -0.2]).unwrap();
        assert!((b.c[0] - 0.51).abs() < 1e-10);
        assert!((b.c[1] - (-0.25 + 0.04)).abs() < 1e-10);
    }
}
