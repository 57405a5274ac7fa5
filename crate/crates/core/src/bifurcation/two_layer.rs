//! Sufficient conditions for eigencurve intersections with one interface.

use serde::{Deserialize, Serialize};

use crate::config::{vec_norm, FluidStack, Lattice};
use crate::error::{Error, Result};
use crate::modes::VerticalMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLayerReport {
    /// `rho_2 psi_2'(d_2) + rho_1 psi_1'(d_1)` at `|k1|` and `|k2|`.
    pub slope_sum: [f64; 2],
    /// `rho_1 alpha_1 - rho_2 alpha_2`.
    pub vorticity_jump: f64,
    /// Slope sums ordered and positive, and the vorticity jump positive.
    pub ordering: bool,
    /// `arctan(P1 / D) - arctan(P2 / D)`, when `D != 0`.
    pub angle_gap: Option<f64>,
    /// `angle_gap < gamma2`.
    pub angle: bool,
    /// `rho_1 alpha_1 = rho_2 alpha_2`.
    pub balanced: bool,
    pub ok: bool,
}

fn slope_sum(fs: &FluidStack, kmag: f64) -> Result<f64> {
    let lower = VerticalMode::new(fs, 1, kmag)?.psi_prime_top();
    let upper = if fs.rho(2) > 0.0 {
        fs.rho(2) * VerticalMode::new(fs, 2, kmag)?.psi_prime_top()
    } else {
        0.0
    };
    Ok(upper + fs.rho(1) * lower)
}

pub fn check_two_layer_conditions(fs: &FluidStack, lat: &Lattice) -> Result<TwoLayerReport> {
    if fs.n() != 1 {
        return Err(Error::Invalid("two-layer conditions need exactly one interface".into()));
    }
    let p1 = slope_sum(fs, vec_norm(lat.k1))?;
    let p2 = slope_sum(fs, vec_norm(lat.k2))?;
    let d = fs.rho(1) * fs.alpha(1) - fs.rho(2) * fs.alpha(2);
    let ordering = p1 >= p2 && p2 > 0.0 && d > 0.0;
    let angle_gap = (d != 0.0).then(|| (p1 / d).atan() - (p2 / d).atan());
    let angle = angle_gap.map_or(false, |g| g < lat.gamma2);
    let scale = (fs.rho(1) * fs.alpha(1)).abs().max((fs.rho(2) * fs.alpha(2)).abs());
    let balanced = d.abs() <= 1e-12 * scale || d == 0.0;
    Ok(TwoLayerReport {
        slope_sum: [p1, p2],
        vorticity_jump: d,
        ordering,
        angle_gap,
        angle,
        balanced,
        ok: (ordering && angle) || balanced,
    })
}
