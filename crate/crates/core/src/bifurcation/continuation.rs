//! Continuation of bifurcation points in the vorticities.
//!
//! The point solves `G(tau) = (det A(tau, k1), det A(tau, k2)) = 0`. The
//! Jacobian of `G` follows from differentiating the tridiagonal determinant
//! recurrence along `dA/dr` and `dA/dtheta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::point::{point_from_tau, verify_assumption};
use super::{BifurcationPoint, Tolerances};
use crate::config::{FluidStack, Lattice};
use crate::dispersion::DispersionMatrix;
use crate::error::{Error, Result};
use crate::trivial::Tau;

pub const NEWTON_TOL: f64 = 1e-11;
pub const NEWTON_MAX_ITER: usize = 50;

/// Determinants at `k1`, `k2` and their gradients in `(r, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetSystem {
    pub value: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    /// `prod Sigma_jj(k_i)` used to make the system dimensionless.
    pub scale: [f64; 2],
}

pub fn det_system(fs: &FluidStack, lat: &Lattice, tau: Tau) -> Result<DetSystem> {
    let mut value = [0.0; 2];
    let mut jacobian = [[0.0; 2]; 2];
    let mut scale = [0.0; 2];
    for (i, k) in [lat.k1, lat.k2].into_iter().enumerate() {
        let dm = DispersionMatrix::assemble(fs, tau, k)?;
        let (d, dr, dth) = dm.det_gradient();
        value[i] = d;
        jacobian[i] = [dr, dth];
        scale[i] = dm.parts.sigma_scale();
    }
    Ok(DetSystem { value, jacobian, scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOutcome {
    pub tau: Tau,
    pub iterations: usize,
    /// Largest scaled determinant at the solution.
    pub residual: f64,
}

fn scaled_residual(s: &DetSystem) -> f64 {
    (s.value[0] / s.scale[0]).abs().max((s.value[1] / s.scale[1]).abs())
}

/// Damped Newton iteration for `G(tau) = 0` from `guess`.
pub fn newton_tau(fs: &FluidStack, lat: &Lattice, guess: Tau) -> Result<NewtonOutcome> {
    let (mut r, mut theta) = (guess.r(), guess.theta());
    let mut sys = det_system(fs, lat, guess)?;
    let mut res = scaled_residual(&sys);
    for it in 0..NEWTON_MAX_ITER {
        if res < 1e-14 {
            return Ok(NewtonOutcome { tau: Tau::from_signed(r, theta)?, iterations: it, residual: res });
        }
        let j = &sys.jacobian;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Numerical("singular Jacobian in Newton iteration".into()));
        }
        let (g0, g1) = (sys.value[0], sys.value[1]);
        let dr = (j[1][1] * g0 - j[0][1] * g1) / det;
        let dth = (-j[1][0] * g0 + j[0][0] * g1) / det;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = Tau::from_signed(r - step * dr, theta - step * dth)?;
            let cand_sys = det_system(fs, lat, cand)?;
            let cand_res = scaled_residual(&cand_sys);
            if cand_res < res {
                r = r - step * dr;
                theta = theta - step * dth;
                sys = cand_sys;
                res = cand_res;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if res < NEWTON_TOL {
        Ok(NewtonOutcome { tau: Tau::from_signed(r, theta)?, iterations: NEWTON_MAX_ITER, residual: res })
    } else {
        Err(Error::Numerical(format!("Newton iteration stalled at scaled residual {res:e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    /// Fraction of the way from zero to the target vorticities.
    pub fraction: f64,
    pub tau: Tau,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationResult {
    pub steps: Vec<ContinuationStep>,
    pub point: BifurcationPoint,
}

/// Follows `start` (a point of the stack `fs` with zero vorticity) to the
/// vorticities `target` in `steps` equal increments.
pub fn continue_alpha(
    fs: &FluidStack,
    lat: &Lattice,
    start: &BifurcationPoint,
    target: &[f64],
    steps: usize,
    tol: &Tolerances,
) -> Result<ContinuationResult> {
    if steps == 0 {
        return Err(Error::Invalid("continuation needs at least one step".into()));
    }
    if target.len() != fs.n() + 1 {
        return Err(Error::Invalid(format!("target needs {} vorticities", fs.n() + 1)));
    }
    let base: Vec<f64> = fs.alpha_all().to_vec();
    let mut history: Vec<Tau> = vec![start.tau];
    let mut out = Vec::with_capacity(steps);
    let mut fluid = fs.clone();
    for i in 1..=steps {
        let f = i as f64 / steps as f64;
        let alpha: Vec<f64> = base.iter().zip(target).map(|(a, t)| a + f * (t - a)).collect();
        fluid = fs.with_alpha(alpha)?;
        let guess = match history.as_slice() {
            [.., a, b] => {
                let turn = (b.theta() - a.theta() + PI).rem_euclid(2.0 * PI) - PI;
                Tau::from_signed(2.0 * b.r() - a.r(), b.theta() + turn)?
            }
            [b] => *b,
            [] => unreachable!("history starts non-empty"),
        };
        let sol = newton_tau(&fluid, lat, guess).or_else(|_| newton_tau(&fluid, lat, *history.last().unwrap()))?;
        history.push(sol.tau);
        out.push(ContinuationStep { fraction: f, tau: sol.tau, iterations: sol.iterations, residual: sol.residual });
    }
    let tau = *history.last().unwrap();
    let mut point = point_from_tau(&fluid, lat, tau, start.iota, start.kappa)?;
    point.report = Some(verify_assumption(&fluid, lat, &point, tol)?);
    Ok(ContinuationResult { steps: out, point })
}
