//! Isolation of a bifurcation point: `A(tau*, k)` must stay invertible on
//! every dual lattice point other than `+-k1` and `+-k2`.
//!
//! Beyond a radius where every row of `A` is strictly diagonally dominant
//! nothing can fail, so only a finite disk of the dual lattice is scanned.
//! The scan evaluates `det A / prod Sigma` with an allocation-free
//! recurrence since the disk can hold millions of points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{vec_norm, FluidStack, Lattice};
use crate::modes::{VerticalMode, SERIES_THRESHOLD};
use crate::trivial::{interface_phase, Tau};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDeterminant {
    pub m1: i64,
    pub m2: i64,
    pub k: [f64; 2],
    /// `|det A| / prod Sigma_jj`, or `None` if the vertical problem is
    /// resonant at this wave number.
    pub relative_det: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationCheck {
    pub k_max: f64,
    pub scanned: usize,
    pub min_relative_det: f64,
    pub violations: Vec<LatticeDeterminant>,
}

/// Radius beyond which every `A(tau, k)` is strictly diagonally dominant
/// with positive diagonal.
///
/// For `|k| >= K > max |alpha|` each layer contributes at most
/// `|k| coth(q_K h / 2)` to its two rows (diagonal slope plus coupling),
/// with `q_K = sqrt(K^2 - alpha^2)`. The flow terms add `r^2 |D_j| / 2`.
pub fn dominance_radius(fs: &FluidStack, r: f64, k_floor: f64) -> f64 {
    let a = fs.max_abs_alpha();
    let r2 = r * r;
    let n = fs.n();
    let weight = |kk: f64, j: usize| {
        if fs.rho(j) == 0.0 {
            return 0.0;
        }
        let q = (kk * kk - a * a).max(0.0).sqrt();
        fs.rho(j) / (0.5 * q * fs.thickness(j)).tanh()
    };
    let mut kk = (a * 1.01).max(k_floor).max(1e-3);
    for _ in 0..400 {
        let ok = (1..=n).all(|j| {
            let w = weight(kk, j) + weight(kk, j + 1);
            let dj = (fs.rho(j) * fs.alpha(j) - fs.rho(j + 1) * fs.alpha(j + 1)).abs();
            let g = fs.density_jump(j) * fs.g();
            let s = fs.sigma(j);
            s * kk * kk + g > r2 * (kk * w + 0.5 * dj) && 2.0 * s * kk >= r2 * w
        });
        if ok {
            return kk;
        }
        kk *= 1.25;
    }
    kk
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    bottom: f64,
    top: f64,
    alpha: f64,
    rho: f64,
}

/// `det A(tau, k) / prod Sigma_jj(k)` for many `k` at fixed `tau`.
pub struct RelativeDeterminant {
    layers: Vec<Layer>,
    flow: Vec<[f64; 2]>,
    sigma: Vec<f64>,
    gravity: Vec<f64>,
    jumps: Vec<f64>,
    r2: f64,
}

impl RelativeDeterminant {
    pub fn new(fs: &FluidStack, tau: Tau) -> Self {
        let n = fs.n();
        let layers = (1..=n + 1)
            .map(|j| Layer { bottom: fs.depth(j - 1), top: fs.depth(j), alpha: fs.alpha(j), rho: fs.rho(j) })
            .collect();
        let flow = (1..=n)
            .map(|j| {
                let (s, c) = interface_phase(fs, tau.theta(), j).sin_cos();
                [c, s]
            })
            .collect();
        RelativeDeterminant {
            layers,
            flow,
            sigma: (1..=n).map(|j| fs.sigma(j)).collect(),
            gravity: (1..=n).map(|j| fs.density_jump(j) * fs.g()).collect(),
            jumps: (1..=n).map(|j| fs.rho(j) * fs.alpha(j) - fs.rho(j + 1) * fs.alpha(j + 1)).collect(),
            r2: tau.r() * tau.r(),
        }
    }

    /// `(psi'(top), psi'(bottom))` of a layer; `None` at a resonance.
    fn slopes(layer: &Layer, kmag: f64) -> Option<(f64, f64)> {
        if layer.rho == 0.0 {
            return Some((0.0, 0.0));
        }
        let h = layer.top - layer.bottom;
        let s = (kmag * kmag - layer.alpha * layer.alpha) * h * h;
        if s > SERIES_THRESHOLD {
            let q = s.sqrt();
            let half = (-q).exp();
            let denom = -(-2.0 * q).exp_m1();
            Some((q * (1.0 + half * half) / (denom * h), 2.0 * q * half / (denom * h)))
        } else {
            let m = VerticalMode::from_parts(layer.bottom, layer.top, layer.alpha, kmag).ok()?;
            Some((m.psi_prime_top(), m.psi_prime_bottom()))
        }
    }

    pub fn eval(&self, k: [f64; 2]) -> Option<f64> {
        let n = self.sigma.len();
        let kmag = vec_norm(k);
        if kmag == 0.0 {
            return Some(1.0);
        }
        let (kx, ky) = (k[0] / kmag, k[1] / kmag);
        let (mut top_below, _) = Self::slopes(&self.layers[0], kmag)?;
        let (mut f2, mut f1) = (1.0, 1.0);
        let mut prev_scale = 0.0;
        let mut prev_c = 0.0;
        for j in 0..n {
            let (top_above, bottom_above) = Self::slopes(&self.layers[j + 1], kmag)?;
            let [ux, uy] = self.flow[j];
            let c = ux * kx + uy * ky;
            let s = uy * kx - ux * ky;
            let sig = self.sigma[j] * kmag * kmag + self.gravity[j];
            let inv = 1.0 / sig.sqrt();
            let b_diag = -self.layers[j + 1].rho * top_above - self.layers[j].rho * top_below;
            let diag = (sig + self.r2 * (c * c * b_diag + c * s * self.jumps[j])) * inv * inv;
            let cur = if j == 0 {
                diag
            } else {
                let off = self.r2 * prev_c * c * prev_scale * inv;
                diag * f1 - off * off * f2
            };
            f2 = f1;
            f1 = cur;
            prev_scale = self.layers[j + 1].rho * bottom_above * inv;
            prev_c = c;
            top_below = top_above;
        }
        Some(f1)
    }
}

/// Scans the dual lattice up to the dominance radius.
pub fn check_isolation(fs: &FluidStack, lat: &Lattice, tau: Tau, threshold: f64) -> IsolationCheck {
    let k_floor = vec_norm(lat.k1).min(vec_norm(lat.k2));
    let k_max = dominance_radius(fs, tau.r(), k_floor);
    let rel = RelativeDeterminant::new(fs, tau);
    let limit = k_max * (1.0 + 1e-12);
    let b1 = (vec_norm(lat.lambda1) * limit / (2.0 * PI)).floor() as i64 + 1;
    let b2 = (vec_norm(lat.lambda2) * limit / (2.0 * PI)).floor() as i64 + 1;
    let excluded = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)];
    let mut scanned = 0usize;
    let mut min_relative_det = f64::INFINITY;
    let mut violations = Vec::new();
    for m1 in -b1..=b1 {
        for m2 in -b2..=b2 {
            if excluded.contains(&(m1, m2)) {
                continue;
            }
            let k = lat.dual_vector(m1, m2);
            if vec_norm(k) > limit {
                continue;
            }
            scanned += 1;
            let relative_det = rel.eval(k).map(f64::abs);
            let v = relative_det.unwrap_or(0.0);
            min_relative_det = min_relative_det.min(v);
            if v <= threshold {
                violations.push(LatticeDeterminant { m1, m2, k, relative_det });
            }
        }
    }
    violations.sort_by(|a, b| {
        vec_norm(a.k)
            .total_cmp(&vec_norm(b.k))
            .then(a.m1.cmp(&b.m1))
            .then(a.m2.cmp(&b.m2))
    });
    IsolationCheck { k_max, scanned, min_relative_det, violations }
}
