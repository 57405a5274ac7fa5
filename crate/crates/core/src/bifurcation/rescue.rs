//! Clearing an isolation failure by a small change of the surface tensions.
//!
//! With `sigma_q = [(1 + q) sigma |k1|^2 + q g (rho_j - rho_{j+1})] / |k1|^2`
//! and `r_q = sqrt(1 + q) r*`, the dispersion matrices at the two lattice
//! generators of a symmetric lattice scale by `1 + q`, so the kernel is kept
//! while every other wave number is perturbed.

use serde::{Deserialize, Serialize};

use super::point::{point_from_tau, verify_assumption};
use super::{newton_tau, BifurcationPoint, Tolerances};
use crate::config::{vec_norm, FluidStack, Lattice};
use crate::error::{Error, Result};
use crate::trivial::Tau;

/// Rescaled surface tensions for parameter `q`.
pub fn rescaled_sigma(fs: &FluidStack, k1_mag: f64, q: f64) -> Result<Vec<f64>> {
    let k2 = k1_mag * k1_mag;
    let out: Vec<f64> = (1..=fs.n())
        .map(|j| ((1.0 + q) * fs.sigma(j) * k2 + q * fs.g() * fs.density_jump(j)) / k2)
        .collect();
    if out.iter().any(|&s| s <= 0.0) || !(1.0 + q > 0.0) {
        return Err(Error::Invalid(format!("rescaling q = {q} makes a surface tension non-positive")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescueOutcome {
    pub q: f64,
    pub fluid: FluidStack,
    pub point: BifurcationPoint,
}

/// Moves `point` to the rescaled stack. On a symmetric lattice the new flow
/// is `(sqrt(1 + q) r*, theta*)`; otherwise it is re-located by Newton's
/// method from that guess.
pub fn sigma_rescue(fs: &FluidStack, lat: &Lattice, point: &BifurcationPoint, q: f64, tol: &Tolerances) -> Result<RescueOutcome> {
    let sigma = rescaled_sigma(fs, vec_norm(lat.k1), q)?;
    let fluid = fs.with_sigma(sigma)?;
    let guess = Tau::new((1.0 + q).sqrt() * point.tau.r(), point.tau.theta())?;
    let tau = if lat.is_symmetric(1e-12) {
        guess
    } else {
        newton_tau(&fluid, lat, guess)?.tau
    };
    let mut p = point_from_tau(&fluid, lat, tau, point.iota, point.kappa)?;
    p.rescue_q = Some(q);
    p.report = Some(verify_assumption(&fluid, lat, &p, tol)?);
    Ok(RescueOutcome { q, fluid, point: p })
}

/// Rescaling parameters tried in order: `+-1e-4 * 2^i` up to `1e-2`.
pub fn rescue_schedule() -> Vec<f64> {
    let mut out = Vec::new();
    let mut q = 1e-4;
    while q < 1e-2 {
        out.push(q);
        out.push(-q);
        q *= 2.0;
    }
    out.push(1e-2);
    out.push(-1e-2);
    out
}

/// First rescaling in [`rescue_schedule`] that yields an accepted point.
pub fn rescue_sweep(fs: &FluidStack, lat: &Lattice, point: &BifurcationPoint, tol: &Tolerances) -> Result<Option<RescueOutcome>> {
    for q in rescue_schedule() {
        match sigma_rescue(fs, lat, point, q, tol) {
            Ok(out) if out.point.accepted() => return Ok(Some(out)),
            Ok(_) | Err(Error::Invalid(_)) | Err(Error::Numerical(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}
