//! Construction and validation of bifurcation points.

use serde::{Deserialize, Serialize};

use super::isolation::{check_isolation, IsolationCheck};
use super::{BifurcationPoint, Tolerances};
use crate::config::{check_non_resonance, vec_norm, FluidStack, Lattice, NonResonanceReport};
use crate::dispersion::{smallest_singular_vector, DispersionMatrix};
use crate::error::{Error, Result};
use crate::numeric::{norm, normalize_leading_positive};
use crate::tridiag::SymTridiagonal;
use crate::trivial::Tau;

/// `nu_{i,1} = eta_i . dA/dr eta_i` and `nu_{i,2} = eta_i . dA/dtheta eta_i`.
pub fn nu_matrix(fs: &FluidStack, lat: &Lattice, tau: Tau, eta1: &[f64], eta2: &[f64]) -> Result<[[f64; 2]; 2]> {
    let mut nu = [[0.0; 2]; 2];
    for (row, (k, eta)) in nu.iter_mut().zip([(lat.k1, eta1), (lat.k2, eta2)]) {
        let dm = DispersionMatrix::assemble(fs, tau, k)?;
        row[0] = dm.d_dr().quad_form(eta);
        row[1] = dm.d_dtheta().quad_form(eta);
    }
    Ok(nu)
}

pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn scaled_kernel_vector(sigma: &[f64], xi: &[f64]) -> Vec<f64> {
    let mut eta: Vec<f64> = xi.iter().zip(sigma).map(|(x, s)| x / s.sqrt()).collect();
    normalize_leading_positive(&mut eta);
    eta
}

/// Builds a point from an eigencurve intersection: `r = 1 / sqrt(-mu)` and
/// `eta_i = Sigma(k_i)^{-1/2} xi_i`, normalised.
#[allow(clippy::too_many_arguments)]
pub fn make_point(
    fs: &FluidStack,
    lat: &Lattice,
    theta: f64,
    iota: usize,
    kappa: usize,
    mu: f64,
    xi1: &[f64],
    xi2: &[f64],
) -> Result<BifurcationPoint> {
    if !(mu < 0.0) {
        return Err(Error::Numerical(format!("eigenvalue {mu} gives no real amplitude")));
    }
    let tau = Tau::new(1.0 / (-mu).sqrt(), theta)?;
    let s1 = crate::dispersion::sigma_diagonal(fs, vec_norm(lat.k1));
    let s2 = crate::dispersion::sigma_diagonal(fs, vec_norm(lat.k2));
    let eta1 = scaled_kernel_vector(&s1, xi1);
    let eta2 = scaled_kernel_vector(&s2, xi2);
    let nu = nu_matrix(fs, lat, tau, &eta1, &eta2)?;
    Ok(BifurcationPoint::new(fs, lat, tau, iota, kappa, mu, eta1, eta2, nu))
}

/// Builds a point at a known `tau` by taking the smallest right singular
/// vectors of `A(tau, k_i)` as kernel vectors.
pub fn point_from_tau(fs: &FluidStack, lat: &Lattice, tau: Tau, iota: usize, kappa: usize) -> Result<BifurcationPoint> {
    let pick = |k: [f64; 2]| -> Result<Vec<f64>> {
        let dm = DispersionMatrix::assemble(fs, tau, k)?;
        let (_, v) = smallest_singular_vector(&dm.a);
        Ok(v)
    };
    let eta1 = pick(lat.k1)?;
    let eta2 = pick(lat.k2)?;
    let nu = nu_matrix(fs, lat, tau, &eta1, &eta2)?;
    let mu = -1.0 / (tau.r() * tau.r());
    Ok(BifurcationPoint::new(fs, lat, tau, iota, kappa, mu, eta1, eta2, nu))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub k: [f64; 2],
    pub dim: usize,
    /// `||A eta||` relative to the matrix scale.
    pub residual: f64,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityCheck {
    pub nu: [[f64; 2]; 2],
    pub det: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeClass {
    pub symmetric: bool,
    pub non_degenerate: bool,
}

/// Outcome of the three-part validation of a bifurcation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub kernels: [KernelCheck; 2],
    pub transversality: TransversalityCheck,
    pub isolation: IsolationCheck,
    pub resonance: NonResonanceReport,
    pub lattice: LatticeClass,
    pub kernel_ok: bool,
    pub transversality_ok: bool,
    pub isolation_ok: bool,
    pub ok: bool,
}

impl AssumptionReport {
    /// Short description of the failed parts.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.kernel_ok {
            out.push(format!(
                "kernel dimensions {} and {} (expected 1 and 1)",
                self.kernels[0].dim, self.kernels[1].dim
            ));
        }
        if !self.transversality_ok {
            out.push(format!(
                "|det nu| = {:e} not above {:e}",
                self.transversality.det.abs(),
                self.transversality.threshold
            ));
        }
        if !self.isolation_ok {
            out.push(format!(
                "{} further dual lattice points with singular dispersion matrix",
                self.isolation.violations.len()
            ));
        }
        if !self.resonance.ok {
            out.push("vertical resonance".into());
        }
        out
    }
}

fn kernel_check(fs: &FluidStack, tau: Tau, k: [f64; 2], eta: &[f64], tol: f64) -> Result<(KernelCheck, f64)> {
    let dm = DispersionMatrix::assemble(fs, tau, k)?;
    let ker = dm.kernel(tol);
    let norm_a = dm.scale();
    let residual = norm(&dm.a.mul_vec(eta)) / norm_a;
    Ok((KernelCheck { k, dim: ker.dim, residual, singular_values: ker.singular_values }, norm_a))
}

/// Lattice symmetry (`|lambda1| = |lambda2|`) and whether no other lattice
/// vector shares that length.
pub fn classify_lattice(lat: &Lattice) -> LatticeClass {
    let (a, b) = (vec_norm(lat.lambda1), vec_norm(lat.lambda2));
    let symmetric = (a - b).abs() <= 1e-12 * a.max(b);
    let len = a.min(b);
    let reach = (len * vec_norm(lat.k1).max(vec_norm(lat.k2)) / (2.0 * std::f64::consts::PI)).ceil() as i64 + 1;
    let mut same = 0;
    for i in -reach..=reach {
        for j in -reach..=reach {
            if i == 0 && j == 0 {
                continue;
            }
            let p = lat.cell_point(i as f64, j as f64);
            if (vec_norm(p) - len).abs() <= 1e-9 * len {
                same += 1;
            }
        }
    }
    let expected = if symmetric { 4 } else { 2 };
    LatticeClass { symmetric, non_degenerate: same == expected }
}

/// Checks kernel dimensions, transversality and isolation of the point.
pub fn verify_assumption(fs: &FluidStack, lat: &Lattice, p: &BifurcationPoint, tol: &Tolerances) -> Result<AssumptionReport> {
    let tau = p.tau;
    let (kc1, n1) = kernel_check(fs, tau, lat.k1, &p.eta1, tol.kernel)?;
    let (kc2, n2) = kernel_check(fs, tau, lat.k2, &p.eta2, tol.kernel)?;
    let nu = nu_matrix(fs, lat, tau, &p.eta1, &p.eta2)?;
    let det = det2(&nu);
    let threshold = tol.nu * n1 * n2;
    let isolation = check_isolation(fs, lat, tau, tol.det);
    let resonance = check_non_resonance(fs, lat);
    let kernel_ok = kc1.dim == 1 && kc2.dim == 1;
    let transversality_ok = det.abs() > threshold;
    let isolation_ok = isolation.violations.is_empty();
    let ok = kernel_ok && transversality_ok && isolation_ok && resonance.ok;
    Ok(AssumptionReport {
        kernels: [kc1, kc2],
        transversality: TransversalityCheck { nu, det, threshold },
        isolation,
        resonance,
        lattice: classify_lattice(lat),
        kernel_ok,
        transversality_ok,
        isolation_ok,
        ok,
    })
}

/// `A(tau, k) eta` for a stored point, used by residual checks.
pub fn kernel_residual(fs: &FluidStack, tau: Tau, k: [f64; 2], eta: &[f64]) -> Result<(SymTridiagonal, Vec<f64>)> {
    let dm = DispersionMatrix::assemble(fs, tau, k)?;
    let res = dm.a.mul_vec(eta);
    Ok((dm.a, res))
}
