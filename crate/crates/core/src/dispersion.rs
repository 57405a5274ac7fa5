//! The linearised dispersion matrix `A(tau, k)`.
//!
//! For a nonzero wave vector the matrix splits as
//! `A = Sigma + r^2 (C B C + C D S)` where `Sigma` collects gravity and
//! surface tension, `B` is the tridiagonal coupling of the vertical modes,
//! `C` and `S` hold the cosines and sines of the flow direction on each
//! interface relative to `k`, and `D` holds the vorticity jumps. Only
//! `C` and `S` depend on `theta`, and only through a common shift.

use serde::{Deserialize, Serialize};

use crate::config::{vec_norm, FluidStack};
use crate::error::Result;
use crate::modes::VerticalMode;
use crate::numeric::{normalize_leading_positive, sym_eigen_raw, sym_eigen_sorted};
use crate::tridiag::SymTridiagonal;
use crate::trivial::{beta, interface_phase, Tau};

/// Boundary slopes `psi_j'(d_j)` and `psi_j'(d_{j-1})` for layers
/// `1..=n+1`; a vacuum top layer contributes zeros.
fn boundary_slopes(fs: &FluidStack, kmag: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = fs.n();
    let mut top = vec![0.0; n + 2];
    let mut bottom = vec![0.0; n + 2];
    for j in 1..=n + 1 {
        if fs.rho(j) == 0.0 {
            continue;
        }
        let mode = VerticalMode::new(fs, j, kmag)?;
        top[j] = mode.psi_prime_top();
        bottom[j] = mode.psi_prime_bottom();
    }
    Ok((top, bottom))
}

/// The coupling matrix `B(k)` of the vertical modes.
pub fn coupling_matrix(fs: &FluidStack, kmag: f64) -> Result<SymTridiagonal> {
    let n = fs.n();
    if kmag == 0.0 {
        return Ok(SymTridiagonal::zeros(n));
    }
    let (top, bottom) = boundary_slopes(fs, kmag)?;
    let diag = (1..=n)
        .map(|j| -fs.rho(j + 1) * top[j + 1] - fs.rho(j) * top[j])
        .collect();
    let off = (1..n).map(|j| fs.rho(j + 1) * bottom[j + 1]).collect();
    Ok(SymTridiagonal::new(diag, off))
}

/// Gravity plus surface tension diagonal `Sigma(k)`.
pub fn sigma_diagonal(fs: &FluidStack, kmag: f64) -> Vec<f64> {
    (1..=fs.n())
        .map(|j| fs.sigma(j) * kmag * kmag + fs.density_jump(j) * fs.g())
        .collect()
}

/// Vorticity jumps `rho_j alpha_j - rho_{j+1} alpha_{j+1}`.
pub fn vorticity_jumps(fs: &FluidStack) -> Vec<f64> {
    (1..=fs.n())
        .map(|j| fs.rho(j) * fs.alpha(j) - fs.rho(j + 1) * fs.alpha(j + 1))
        .collect()
}

/// The `r`-independent parts of the dispersion matrix at fixed `theta`, `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constituents {
    pub k: [f64; 2],
    pub kmag: f64,
    pub gamma: f64,
    pub theta: f64,
    pub sigma: Vec<f64>,
    pub b: SymTridiagonal,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub d: Vec<f64>,
}

impl Constituents {
    pub fn new(fs: &FluidStack, theta: f64, k: [f64; 2]) -> Result<Self> {
        let n = fs.n();
        let kmag = vec_norm(k);
        let gamma = k[1].atan2(k[0]);
        let sigma = sigma_diagonal(fs, kmag);
        let b = coupling_matrix(fs, kmag)?;
        let (c, s) = if kmag == 0.0 {
            (vec![0.0; n], vec![0.0; n])
        } else {
            (1..=n)
                .map(|j| {
                    let (sn, cs) = (interface_phase(fs, theta, j) - gamma).sin_cos();
                    (cs, sn)
                })
                .unzip()
        };
        Ok(Constituents { k, kmag, gamma, theta, sigma, b, c, s, d: vorticity_jumps(fs) })
    }

    /// `C B C + C D S`.
    pub fn coupling(&self) -> SymTridiagonal {
        let n = self.sigma.len();
        let diag = (0..n)
            .map(|i| self.c[i] * self.c[i] * self.b.diag()[i] + self.c[i] * self.s[i] * self.d[i])
            .collect();
        let off = (0..n.saturating_sub(1))
            .map(|i| self.c[i] * self.c[i + 1] * self.b.off()[i])
            .collect();
        SymTridiagonal::new(diag, off)
    }

    /// Derivative of `C B C + C D S` with respect to `theta`.
    pub fn coupling_theta_derivative(&self) -> SymTridiagonal {
        let n = self.sigma.len();
        let (c, s) = (&self.c, &self.s);
        let diag = (0..n)
            .map(|i| -2.0 * c[i] * s[i] * self.b.diag()[i] + (c[i] * c[i] - s[i] * s[i]) * self.d[i])
            .collect();
        let off = (0..n.saturating_sub(1))
            .map(|i| -(s[i] * c[i + 1] + c[i] * s[i + 1]) * self.b.off()[i])
            .collect();
        SymTridiagonal::new(diag, off)
    }

    pub fn matrix(&self, r: f64) -> SymTridiagonal {
        SymTridiagonal::from_diagonal(self.sigma.clone()).add(&self.coupling().scaled(r * r))
    }

    /// `Sigma^{-1/2} (C B C + C D S) Sigma^{-1/2}`.
    pub fn reduced(&self) -> SymTridiagonal {
        let m = self.coupling();
        let w: Vec<f64> = self.sigma.iter().map(|x| 1.0 / x.sqrt()).collect();
        let diag = m.diag().iter().zip(&w).map(|(v, a)| v * a * a).collect();
        let off = m.off().iter().enumerate().map(|(i, v)| v * w[i] * w[i + 1]).collect();
        SymTridiagonal::new(diag, off)
    }

    /// Product of the `Sigma` diagonal, the natural scale of `det A`.
    pub fn sigma_scale(&self) -> f64 {
        self.sigma.iter().product()
    }
}

/// Nullspace of a matrix found from its singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub dim: usize,
    /// Unit vectors, each with its first significant component positive.
    pub basis: Vec<Vec<f64>>,
    /// Singular values in ascending order.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

/// Default relative kernel tolerance.
pub const KERNEL_TOL: f64 = 1e-8;

/// Kernel of a symmetric tridiagonal matrix; singular values below
/// `tol * ||M||_inf` count as zero.
pub fn kernel_of(m: &SymTridiagonal, tol: f64) -> Kernel {
    kernel_scaled(m, tol * m.norm_inf())
}

/// Singular values of a symmetric matrix in ascending order, with the
/// matching right singular vectors.
fn singular_pairs(m: &SymTridiagonal) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (values, vectors) = sym_eigen_raw(&m.to_dense());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()));
    (
        order.iter().map(|&i| values[i].abs()).collect(),
        order.iter().map(|&i| vectors[i].clone()).collect(),
    )
}

/// Kernel with an absolute singular-value threshold.
pub fn kernel_scaled(m: &SymTridiagonal, threshold: f64) -> Kernel {
    let (singular_values, vectors) = singular_pairs(m);
    let basis = singular_values
        .iter()
        .zip(vectors)
        .filter(|(s, _)| **s < threshold)
        .map(|(_, mut v)| {
            normalize_leading_positive(&mut v);
            v
        })
        .collect::<Vec<_>>();
    Kernel { dim: basis.len(), basis, singular_values, threshold }
}

/// Smallest singular value and its right singular vector, normalised with
/// the first significant component positive.
pub fn smallest_singular_vector(m: &SymTridiagonal) -> (f64, Vec<f64>) {
    let (values, mut vectors) = singular_pairs(m);
    let mut v = vectors.swap_remove(0);
    normalize_leading_positive(&mut v);
    (values[0], v)
}

/// Eigenvalues in ascending order with matching eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPairs {
    pub mu: Vec<f64>,
    pub xi: Vec<Vec<f64>>,
}

pub fn eigen(m: &SymTridiagonal) -> EigenPairs {
    let (mu, xi) = sym_eigen_sorted(m.to_dense());
    EigenPairs { mu, xi }
}

/// `A(tau, k)` together with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionMatrix {
    pub tau: Tau,
    pub parts: Constituents,
    pub a: SymTridiagonal,
}

impl DispersionMatrix {
    pub fn assemble(fs: &FluidStack, tau: Tau, k: [f64; 2]) -> Result<Self> {
        let parts = Constituents::new(fs, tau.theta(), k)?;
        let a = parts.matrix(tau.r());
        Ok(DispersionMatrix { tau, parts, a })
    }

    pub fn det(&self) -> f64 {
        self.a.det()
    }

    /// Size of the matrix used for relative thresholds: the larger of
    /// `||A||_inf` and the largest `Sigma_jj`, so that a vanishing `A` (as
    /// for a single interface at a bifurcation point) keeps a finite scale.
    pub fn scale(&self) -> f64 {
        self.a.norm_inf().max(self.parts.sigma.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// Kernel with singular values below `tol * scale()` counted as zero.
    pub fn kernel(&self, tol: f64) -> Kernel {
        kernel_scaled(&self.a, tol * self.scale())
    }

    /// `dA/dr = 2 r (C B C + C D S)`.
    pub fn d_dr(&self) -> SymTridiagonal {
        self.parts.coupling().scaled(2.0 * self.tau.r())
    }

    /// `dA/dtheta`.
    pub fn d_dtheta(&self) -> SymTridiagonal {
        let r = self.tau.r();
        self.parts.coupling_theta_derivative().scaled(r * r)
    }

    /// `(det A, d det A / dr, d det A / dtheta)`.
    pub fn det_gradient(&self) -> (f64, f64, f64) {
        let (det, dr) = self.a.det_with_derivative(&self.d_dr());
        let (_, dth) = self.a.det_with_derivative(&self.d_dtheta());
        (det, dr, dth)
    }
}

/// Reduced matrix `R(theta, k)`.
pub fn assemble_reduced(fs: &FluidStack, theta: f64, k: [f64; 2]) -> Result<SymTridiagonal> {
    Ok(Constituents::new(fs, theta, k)?.reduced())
}

/// Entries of row `j` (1-based) evaluated straight from the interface
/// conditions: `(sub, diag, super)`. The sub-diagonal uses the downward
/// mode `phi` of layer `j` instead of `psi`.
pub fn row_entries(fs: &FluidStack, tau: Tau, k: [f64; 2], j: usize) -> Result<(Option<f64>, f64, Option<f64>)> {
    let n = fs.n();
    let kmag = vec_norm(k);
    let gamma = k[1].atan2(k[0]);
    let r2 = tau.r() * tau.r();
    let gravity = fs.density_jump(j) * fs.g() + fs.sigma(j) * kmag * kmag;
    if kmag == 0.0 {
        let sub = (j > 1).then_some(0.0);
        let sup = (j < n).then_some(0.0);
        return Ok((sub, gravity, sup));
    }
    let (bj, bj_perp) = beta(fs, tau, j, gamma);
    let layer_j = VerticalMode::new(fs, j, kmag)?;
    let above = if fs.rho(j + 1) > 0.0 {
        let upper = VerticalMode::new(fs, j + 1, kmag)?;
        Some(upper)
    } else {
        None
    };
    let upper_top = above.map(|m| fs.rho(j + 1) * m.psi_prime(fs.depth(j + 1))).unwrap_or(0.0);
    let diag = r2
        * bj
        * (-bj * (upper_top + fs.rho(j) * layer_j.psi_prime(fs.depth(j)))
            + bj_perp * (fs.rho(j) * fs.alpha(j) - fs.rho(j + 1) * fs.alpha(j + 1)))
        + gravity;
    let sup = if j < n {
        let (bn, _) = beta(fs, tau, j + 1, gamma);
        let slope = above.map(|m| m.psi_prime(fs.depth(j))).unwrap_or(0.0);
        Some(r2 * bj * bn * fs.rho(j + 1) * slope)
    } else {
        None
    };
    let sub = if j > 1 {
        let (bp, _) = beta(fs, tau, j - 1, gamma);
        Some(-r2 * bj * bp * fs.rho(j) * layer_j.phi_prime(fs.depth(j)))
    } else {
        None
    };
    Ok((sub, diag, sup))
}

/// Splits `B` into the parts coupling layers of even and of odd index:
/// `B = hat + check`, where `hat` holds the blocks of the even layers and
/// `check` those of the odd layers.
pub fn split_coupling(fs: &FluidStack, kmag: f64) -> Result<(SymTridiagonal, SymTridiagonal)> {
    let n = fs.n();
    let (top, bottom) = boundary_slopes(fs, kmag)?;
    let mut hat_d = vec![0.0; n];
    let mut check_d = vec![0.0; n];
    let mut hat_o = vec![0.0; n.saturating_sub(1)];
    let mut check_o = vec![0.0; n.saturating_sub(1)];
    for j in 1..=n {
        let upper = -fs.rho(j + 1) * top[j + 1];
        let lower = -fs.rho(j) * top[j];
        if j % 2 == 1 {
            hat_d[j - 1] = upper;
            check_d[j - 1] = lower;
        } else {
            hat_d[j - 1] = lower;
            check_d[j - 1] = upper;
        }
        if j < n {
            let link = fs.rho(j + 1) * bottom[j + 1];
            if j % 2 == 1 {
                hat_o[j - 1] = link;
            } else {
                check_o[j - 1] = link;
            }
        }
    }
    Ok((SymTridiagonal::new(hat_d, hat_o), SymTridiagonal::new(check_d, check_o)))
}

/// Closed forms of the leading principal minors of `-hat` and `-check`.
///
/// Each complete 2x2 block contributes `rho^2 (|k|^2 - alpha^2)` of its
/// layer; a trailing partial block contributes a single boundary slope.
pub fn split_minor_closed_forms(fs: &FluidStack, kmag: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = fs.n();
    let (top, _) = boundary_slopes(fs, kmag)?;
    let block = |layer: usize| fs.rho(layer).powi(2) * (kmag * kmag - fs.alpha(layer).powi(2));
    let tail = |layer: usize| fs.rho(layer) * top[layer];
    let mut hat = Vec::with_capacity(n);
    let mut check = Vec::with_capacity(n);
    for l in 1..=n {
        let mut h: f64 = (1..=l / 2).map(|i| block(2 * i)).product();
        if l % 2 == 1 {
            h *= tail(l + 1);
        }
        hat.push(h);
        let mut c = tail(1) * (1..=(l - 1) / 2).map(|i| block(2 * i + 1)).product::<f64>();
        if l % 2 == 0 {
            c *= tail(l + 1);
        }
        check.push(c);
    }
    Ok((hat, check))
}
