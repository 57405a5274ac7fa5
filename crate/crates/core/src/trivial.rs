//! Layered helical Beltrami background flows.
//!
//! In layer `j` the flow is `r (cos(theta_j - alpha_j z), sin(theta_j - alpha_j z), 0)`
//! with phases chained so that the velocity is continuous across every
//! interface.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::FluidStack;
use crate::error::{Error, Result};

/// Amplitude and bottom direction of the background flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tau {
    r: f64,
    theta: f64,
}

impl Tau {
    /// `r` must be non-negative; `theta` is reduced to `[0, 2 pi)`.
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0) || !theta.is_finite() {
            return Err(Error::Invalid(format!("invalid flow parameters r = {r}, theta = {theta}")));
        }
        Ok(Tau { r, theta: theta.rem_euclid(2.0 * PI) })
    }

    /// Accepts a negative amplitude by turning the flow around.
    pub fn from_signed(r: f64, theta: f64) -> Result<Self> {
        if r < 0.0 {
            Self::new(-r, theta + PI)
        } else {
            Self::new(r, theta)
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Phases `theta_1, ..., theta_{n+1}` for all layers, including a vacuum top.
pub fn layer_phases(fs: &FluidStack, theta: f64) -> Vec<f64> {
    let n = fs.n();
    let mut out = Vec::with_capacity(n + 1);
    out.push(theta);
    for j in 1..=n {
        let prev = out[j - 1];
        out.push(prev - fs.alpha(j) * fs.depth(j) + fs.alpha(j + 1) * fs.depth(j));
    }
    out
}

/// Phases of the fluid-carrying layers.
pub fn theta_layers(fs: &FluidStack, tau: Tau) -> Vec<f64> {
    let mut all = layer_phases(fs, tau.theta());
    all.truncate(fs.m());
    all
}

/// Velocity of the helical flow of layer `j` continued to any height.
pub fn helical_velocity(fs: &FluidStack, tau: Tau, j: usize, z: f64) -> [f64; 3] {
    let phase = layer_phases(fs, tau.theta())[j - 1] - fs.alpha(j) * z;
    [tau.r() * phase.cos(), tau.r() * phase.sin(), 0.0]
}

/// Background velocity in layer `j`; `z` must lie in the layer.
pub fn trivial_velocity(fs: &FluidStack, tau: Tau, j: usize, z: f64) -> Result<[f64; 3]> {
    fs.check_layer(j)?;
    let (bottom, top) = (fs.depth(j - 1), fs.depth(j));
    let slack = 1e-12 * top.abs().max(1.0);
    if z < bottom - slack || z > top + slack {
        return Err(Error::OutsideLayer { layer: j, z, bottom, top });
    }
    Ok(helical_velocity(fs, tau, j, z))
}

/// Flow direction angle on interface `j`, `0 <= j <= n + 1`. The bottom
/// (`j = 0`) uses layer 1.
pub fn interface_phase(fs: &FluidStack, theta: f64, j: usize) -> f64 {
    let phases = layer_phases(fs, theta);
    if j == 0 {
        phases[0]
    } else {
        phases[j - 1] - fs.alpha(j) * fs.depth(j)
    }
}

/// Returns `(beta_j, beta_j_perp)`: the cosine and sine of the angle between
/// the flow on interface `j` and the direction `gamma`.
pub fn beta(fs: &FluidStack, tau: Tau, j: usize, gamma: f64) -> (f64, f64) {
    let (s, c) = (interface_phase(fs, tau.theta(), j) - gamma).sin_cos();
    (c, s)
}

/// Additive pressure constants making the pressure continuous across flat
/// interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureNormalization {
    r: f64,
    rho: Vec<f64>,
    g: f64,
    constants: Vec<f64>,
}

impl PressureNormalization {
    pub fn new(fs: &FluidStack, tau: Tau) -> Self {
        let n = fs.n();
        let mut constants = vec![0.0; n + 1];
        for j in 1..=n {
            constants[j] = constants[j - 1] - fs.density_jump(j) * fs.g() * fs.depth(j);
        }
        PressureNormalization {
            r: tau.r(),
            rho: fs.rho_all().to_vec(),
            g: fs.g(),
            constants,
        }
    }

    /// Additive constant `C_j`.
    pub fn constant(&self, j: usize) -> f64 {
        self.constants[j - 1]
    }

    /// Bernoulli constant `Q_j = rho_j r^2 / 2 + C_j`.
    pub fn bernoulli_constant(&self, j: usize) -> f64 {
        self.rho[j - 1] * self.r * self.r / 2.0 + self.constants[j - 1]
    }

    /// Pressure in layer `j` for velocity `u` at height `z`.
    pub fn pressure(&self, j: usize, u: [f64; 3], z: f64) -> f64 {
        let speed2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        -self.rho[j - 1] * (speed2 / 2.0 + self.g * z) + self.bernoulli_constant(j)
    }
}

/// Bernoulli pressure `-rho_j (|u|^2 / 2 + g z) + Q_j`.
pub fn bernoulli_pressure(fs: &FluidStack, tau: Tau, j: usize, u: [f64; 3], z: f64) -> f64 {
    PressureNormalization::new(fs, tau).pressure(j, u, z)
}
