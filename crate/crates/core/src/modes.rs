//! Vertical mode functions of a single layer.
//!
//! On layer `j` of thickness `h` the functions `psi` and `phi` solve
//! `f'' = (|k|^2 - alpha_j^2) f` with `psi = 0` at the bottom and `1` at the
//! top, while `phi` is its mirror image. Writing `s = (|k|^2 - alpha^2) h^2`
//! and `zeta = (z - d_{j-1}) / h`, the hyperbolic, linear and oscillatory
//! branches are all `E(zeta, s) / E(1, s)` with the entire function
//! `E(x, s) = sinh(sqrt(s) x) / sqrt(s)`.

use serde::{Deserialize, Serialize};

use crate::config::FluidStack;
use crate::error::{Error, Result};

/// Below this `|s|` the closed forms are replaced by Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;
const SERIES_TERMS: usize = 6;
const RESONANCE_GUARD: f64 = 1e-12;

/// Layer, wave number and height at which to evaluate a mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeQuery {
    pub layer: usize,
    pub k: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    Series,
    Hyperbolic { q: f64 },
    Oscillatory { q: f64, sin_q: f64 },
}

/// Precomputed vertical modes for one layer and one `|k|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalMode {
    bottom: f64,
    top: f64,
    h: f64,
    s: f64,
    branch: Branch,
    series_norm: f64,
}

fn series_pair(x: f64, s: f64) -> (f64, f64) {
    let mut e = 0.0;
    let mut c = 0.0;
    let mut term_e = x;
    let mut term_c = 1.0;
    for n in 0..SERIES_TERMS {
        e += term_e;
        c += term_c;
        let a = (2 * n + 2) as f64;
        let b = (2 * n + 3) as f64;
        term_c = term_c * s * x * x / ((a - 1.0) * a);
        term_e = term_e * s * x * x / (a * b);
    }
    (e, c)
}

impl VerticalMode {
    pub fn new(fs: &FluidStack, layer: usize, k: f64) -> Result<Self> {
        if layer == 0 || layer > fs.n() + 1 {
            return Err(Error::LayerIndex { layer, max: fs.n() + 1 });
        }
        Self::with_layer(fs.depth(layer - 1), fs.depth(layer), fs.alpha(layer), k, layer)
    }

    /// Mode on `[bottom, top]` for Beltrami coefficient `alpha`.
    pub fn from_parts(bottom: f64, top: f64, alpha: f64, k: f64) -> Result<Self> {
        Self::with_layer(bottom, top, alpha, k, 0)
    }

    fn with_layer(bottom: f64, top: f64, alpha: f64, k: f64, layer: usize) -> Result<Self> {
        let h = top - bottom;
        if !(h > 0.0) {
            return Err(Error::Invalid("layer thickness must be positive".into()));
        }
        let s = (k * k - alpha * alpha) * h * h;
        let (branch, series_norm) = if s.abs() < SERIES_THRESHOLD {
            (Branch::Series, series_pair(1.0, s).0)
        } else if s > 0.0 {
            (Branch::Hyperbolic { q: s.sqrt() }, 0.0)
        } else {
            let q = (-s).sqrt();
            let sin_q = q.sin();
            if sin_q.abs() < RESONANCE_GUARD {
                return Err(Error::Resonance { layer, k });
            }
            (Branch::Oscillatory { q, sin_q }, 0.0)
        };
        Ok(VerticalMode { bottom, top, h, s, branch, series_norm })
    }

    pub fn thickness(&self) -> f64 {
        self.h
    }

    /// The dimensionless parameter `(|k|^2 - alpha^2) h^2`.
    pub fn spectral_parameter(&self) -> f64 {
        self.s
    }

    /// Value and `h`-scaled derivative of the bottom-anchored profile at
    /// dimensionless height `x`.
    fn profile(&self, x: f64) -> (f64, f64) {
        match self.branch {
            Branch::Series => {
                let (e, c) = series_pair(x, self.s);
                (e / self.series_norm, c / self.series_norm)
            }
            Branch::Hyperbolic { q } => {
                let denom = -(-2.0 * q).exp_m1();
                let lead = (q * (x - 1.0)).exp();
                let tail = (-2.0 * q * x).exp();
                let value = lead * (-(-2.0 * q * x).exp_m1()) / denom;
                let slope = q * lead * (1.0 + tail) / denom;
                (value, slope)
            }
            Branch::Oscillatory { q, sin_q } => ((q * x).sin() / sin_q, q * (q * x).cos() / sin_q),
        }
    }

    /// `psi(z)`, vanishing at the bottom and equal to one at the top.
    pub fn psi(&self, z: f64) -> f64 {
        self.profile((z - self.bottom) / self.h).0
    }

    pub fn psi_prime(&self, z: f64) -> f64 {
        self.profile((z - self.bottom) / self.h).1 / self.h
    }

    /// `phi(z)`, equal to one at the bottom and vanishing at the top.
    pub fn phi(&self, z: f64) -> f64 {
        self.profile((self.top - z) / self.h).0
    }

    pub fn phi_prime(&self, z: f64) -> f64 {
        -self.profile((self.top - z) / self.h).1 / self.h
    }

    /// `psi'` at the top of the layer.
    pub fn psi_prime_top(&self) -> f64 {
        self.profile(1.0).1 / self.h
    }

    /// `psi'` at the bottom of the layer.
    pub fn psi_prime_bottom(&self) -> f64 {
        self.profile(0.0).1 / self.h
    }
}

fn checked(fs: &FluidStack, q: &ModeQuery) -> Result<VerticalMode> {
    let mode = VerticalMode::new(fs, q.layer, q.k)?;
    let slack = 1e-12 * mode.top.abs().max(1.0);
    if q.z < mode.bottom - slack || q.z > mode.top + slack {
        return Err(Error::OutsideLayer { layer: q.layer, z: q.z, bottom: mode.bottom, top: mode.top });
    }
    Ok(mode)
}

pub fn psi(fs: &FluidStack, q: &ModeQuery) -> Result<f64> {
    Ok(checked(fs, q)?.psi(q.z))
}

pub fn psi_prime(fs: &FluidStack, q: &ModeQuery) -> Result<f64> {
    Ok(checked(fs, q)?.psi_prime(q.z))
}

pub fn phi(fs: &FluidStack, q: &ModeQuery) -> Result<f64> {
    Ok(checked(fs, q)?.phi(q.z))
}

pub fn phi_prime(fs: &FluidStack, q: &ModeQuery) -> Result<f64> {
    Ok(checked(fs, q)?.phi_prime(q.z))
}
