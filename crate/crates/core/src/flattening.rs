//! Flattening of perturbed layers and the first-order velocity corrector.
//!
//! Layer `j` of the perturbed domain is mapped from the flat strip
//! `d_{j-1} <= z <= d_j` by an affine map in `z` that moves the bottom to
//! `d_{j-1} + eta_{j-1}` and the top to `d_j + eta_j`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{FluidStack, Lattice};
use crate::error::{Error, Result};
use crate::trivial::{helical_velocity, Tau};

/// One term `c cos(k . x) + s sin(k . x)` of a trigonometric polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k: [f64; 2],
    pub cos: f64,
    pub sin: f64,
}

/// A periodic interface displacement given by finitely many Fourier terms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigInterface {
    pub terms: Vec<TrigTerm>,
}

impl TrigInterface {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let (s, c) = (t.k[0] * x[0] + t.k[1] * x[1]).sin_cos();
                t.cos * c + t.sin * s
            })
            .sum()
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for t in &self.terms {
            let (s, c) = (t.k[0] * x[0] + t.k[1] * x[1]).sin_cos();
            let f = -t.cos * s + t.sin * c;
            g[0] += f * t.k[0];
            g[1] += f * t.k[1];
        }
        g
    }
}

/// Interface displacements and their gradients sampled on a uniform grid of
/// the periodic cell. Node `(a, b)` sits at `(a / na) lambda1 + (b / nb) lambda2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceGrid {
    na: usize,
    nb: usize,
    lambda1: [f64; 2],
    lambda2: [f64; 2],
    k1: [f64; 2],
    k2: [f64; 2],
    area: f64,
    values: Vec<Vec<f64>>,
    grad_x: Vec<Vec<f64>>,
    grad_y: Vec<Vec<f64>>,
}

impl InterfaceGrid {
    pub fn from_trig(lat: &Lattice, interfaces: &[TrigInterface], na: usize, nb: usize) -> Self {
        let mut values = Vec::new();
        let mut grad_x = Vec::new();
        let mut grad_y = Vec::new();
        for eta in interfaces {
            let mut v = Vec::with_capacity(na * nb);
            let mut gx = Vec::with_capacity(na * nb);
            let mut gy = Vec::with_capacity(na * nb);
            for b in 0..nb {
                for a in 0..na {
                    let x = lat.cell_point(a as f64 / na as f64, b as f64 / nb as f64);
                    let g = eta.gradient(x);
                    v.push(eta.value(x));
                    gx.push(g[0]);
                    gy.push(g[1]);
                }
            }
            values.push(v);
            grad_x.push(gx);
            grad_y.push(gy);
        }
        Self::assemble(lat, na, nb, values, grad_x, grad_y)
    }

    /// Builds a grid from sampled values and gradients, stored with the
    /// first cell index fastest.
    pub fn from_samples(
        lat: &Lattice,
        na: usize,
        nb: usize,
        values: Vec<Vec<f64>>,
        grad_x: Vec<Vec<f64>>,
        grad_y: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let ok = |v: &Vec<Vec<f64>>| v.len() == values.len() && v.iter().all(|s| s.len() == na * nb);
        if na == 0 || nb == 0 || !ok(&values) || !ok(&grad_x) || !ok(&grad_y) {
            return Err(Error::Invalid("interface samples do not match the grid size".into()));
        }
        Ok(Self::assemble(lat, na, nb, values, grad_x, grad_y))
    }

    fn assemble(lat: &Lattice, na: usize, nb: usize, values: Vec<Vec<f64>>, grad_x: Vec<Vec<f64>>, grad_y: Vec<Vec<f64>>) -> Self {
        InterfaceGrid {
            na,
            nb,
            lambda1: lat.lambda1,
            lambda2: lat.lambda2,
            k1: lat.k1,
            k2: lat.k2,
            area: lat.cell_area(),
            values,
            grad_x,
            grad_y,
        }
    }

    pub fn interfaces(&self) -> usize {
        self.values.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.na, self.nb)
    }

    pub fn cell_area(&self) -> f64 {
        self.area
    }

    /// Position of node `(a, b)`.
    pub fn node(&self, a: usize, b: usize) -> [f64; 2] {
        let (s, t) = (a as f64 / self.na as f64, b as f64 / self.nb as f64);
        [
            s * self.lambda1[0] + t * self.lambda2[0],
            s * self.lambda1[1] + t * self.lambda2[1],
        ]
    }

    /// Sample of interface `j` (1-based) at node `(a, b)`; interfaces `0`
    /// and `n + 1` are flat.
    pub fn node_value(&self, j: usize, a: usize, b: usize) -> f64 {
        if j == 0 || j > self.interfaces() {
            0.0
        } else {
            self.values[j - 1][b * self.na + a]
        }
    }

    fn interpolate(&self, field: &[Vec<f64>], j: usize, x: [f64; 2]) -> f64 {
        if j == 0 || j > self.interfaces() {
            return 0.0;
        }
        let data = &field[j - 1];
        let fa = (x[0] * self.k1[0] + x[1] * self.k1[1]) / (2.0 * PI) * self.na as f64;
        let fb = (x[0] * self.k2[0] + x[1] * self.k2[1]) / (2.0 * PI) * self.nb as f64;
        let (a0, b0) = (fa.floor(), fb.floor());
        let (ta, tb) = (fa - a0, fb - b0);
        let ia = (a0 as i64).rem_euclid(self.na as i64) as usize;
        let ib = (b0 as i64).rem_euclid(self.nb as i64) as usize;
        let ia1 = (ia + 1) % self.na;
        let ib1 = (ib + 1) % self.nb;
        let at = |a: usize, b: usize| data[b * self.na + a];
        (1.0 - ta) * (1.0 - tb) * at(ia, ib)
            + ta * (1.0 - tb) * at(ia1, ib)
            + (1.0 - ta) * tb * at(ia, ib1)
            + ta * tb * at(ia1, ib1)
    }

    /// Bilinear interpolation of interface `j` at `x`.
    pub fn eta(&self, j: usize, x: [f64; 2]) -> f64 {
        self.interpolate(&self.values, j, x)
    }

    pub fn grad_eta(&self, j: usize, x: [f64; 2]) -> [f64; 2] {
        [self.interpolate(&self.grad_x, j, x), self.interpolate(&self.grad_y, j, x)]
    }

    /// Trapezoidal mean of `f` over the grid nodes.
    pub fn mean<F: FnMut(usize, usize) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for b in 0..self.nb {
            for a in 0..self.na {
                acc += f(a, b);
            }
        }
        acc / (self.na * self.nb) as f64
    }
}

/// Vertical map of layer `j` and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flattening {
    pub phi: f64,
    pub jacobian: f64,
    pub dphi_dx: f64,
    pub dphi_dy: f64,
}

fn check_grid(fs: &FluidStack, grids: &InterfaceGrid) -> Result<()> {
    if grids.interfaces() != fs.n() {
        return Err(Error::Invalid(format!(
            "{} interface grids supplied for {} interfaces",
            grids.interfaces(),
            fs.n()
        )));
    }
    Ok(())
}

/// `phi_j(x', z)` with `J_j = d phi_j / dz`; fails when `J_j <= 0`.
pub fn flatten_map(fs: &FluidStack, grids: &InterfaceGrid, j: usize, x: [f64; 3]) -> Result<Flattening> {
    check_grid(fs, grids)?;
    fs.check_layer(j)?;
    let (lo, hi) = (fs.depth(j - 1), fs.depth(j));
    let h = hi - lo;
    let xy = [x[0], x[1]];
    let (e_lo, e_hi) = (grids.eta(j - 1, xy), grids.eta(j, xy));
    let (g_lo, g_hi) = (grids.grad_eta(j - 1, xy), grids.grad_eta(j, xy));
    let jacobian = 1.0 + (e_hi - e_lo) / h;
    if jacobian <= 0.0 {
        return Err(Error::NonPositiveJacobian { layer: j, jacobian });
    }
    let z = x[2];
    let phi = jacobian * z + (hi * e_lo - lo * e_hi) / h;
    let slope = |i: usize| ((g_hi[i] - g_lo[i]) / h) * z + (hi * g_lo[i] - lo * g_hi[i]) / h;
    Ok(Flattening { phi, jacobian, dphi_dx: slope(0), dphi_dy: slope(1) })
}

/// First-order velocity corrector of layer `j` in flattened coordinates.
pub fn corrector_field(fs: &FluidStack, tau: Tau, grids: &InterfaceGrid, j: usize, x: [f64; 3]) -> Result<[f64; 3]> {
    let f = flatten_map(fs, grids, j, x)?;
    let u = helical_velocity(fs, tau, j, x[2]);
    let a = fs.alpha(j);
    let shift = f.phi - x[2];
    Ok([
        (f.jacobian - 1.0) * u[0] + a * shift * u[1],
        (f.jacobian - 1.0) * u[1] - a * shift * u[0],
        -f.dphi_dx * u[0] - f.dphi_dy * u[1],
    ])
}

/// Cell integrals `(I1, I2)` of the higher-order Taylor remainders of the
/// background flow across the displaced interfaces of layer `j`.
pub fn defect_integrals(fs: &FluidStack, tau: Tau, grids: &InterfaceGrid, j: usize) -> Result<(f64, f64)> {
    check_grid(fs, grids)?;
    fs.check_layer(j)?;
    let a = fs.alpha(j);
    if a == 0.0 {
        return Ok((0.0, 0.0));
    }
    let remainder = |level: usize, eta: f64| -> (f64, f64) {
        let d = fs.depth(level);
        let u_far = helical_velocity(fs, tau, j, d + eta);
        let u_near = helical_velocity(fs, tau, j, d);
        // Along z, dU1/dz = alpha U2 and dU2/dz = -alpha U1.
        let r1 = u_far[0] - u_near[0] - eta * a * u_near[1];
        let r2 = u_far[1] - u_near[1] + eta * a * u_near[0];
        (r1, r2)
    };
    let i1 = grids.mean(|p, q| {
        let top = remainder(j, grids.node_value(j, p, q)).1;
        let bottom = remainder(j - 1, grids.node_value(j - 1, p, q)).1;
        -(top - bottom) / a
    });
    let i2 = grids.mean(|p, q| {
        let top = remainder(j, grids.node_value(j, p, q)).0;
        let bottom = remainder(j - 1, grids.node_value(j - 1, p, q)).0;
        (top - bottom) / a
    });
    Ok((i1 * grids.cell_area(), i2 * grids.cell_area()))
}

/// Cell integrals of `c1 V1 + c2 V2` over layer `j`, with
/// `V1 = (cos a z, -sin a z, 0)` and `V2 = (sin a z, cos a z, 0)`.
pub fn correction_forward(fs: &FluidStack, j: usize, c: (f64, f64), area: f64) -> (f64, f64) {
    let a = fs.alpha(j);
    let (lo, hi) = (fs.depth(j - 1), fs.depth(j));
    if a == 0.0 {
        let h = hi - lo;
        return (area * h * c.0, area * h * c.1);
    }
    let ds = (a * hi).sin() - (a * lo).sin();
    let dc = (a * hi).cos() - (a * lo).cos();
    let f = area / a;
    (f * (ds * c.0 - dc * c.1), f * (dc * c.0 + ds * c.1))
}

/// Coefficients `(c1, c2)` whose correction cancels the defect integrals,
/// so that the layer mean flow is unchanged.
pub fn correction_coeffs(fs: &FluidStack, j: usize, defect: (f64, f64), area: f64) -> Result<(f64, f64)> {
    fs.check_layer(j)?;
    let a = fs.alpha(j);
    if a == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (lo, hi) = (fs.depth(j - 1), fs.depth(j));
    let half = (a * (hi - lo) / 2.0).sin();
    if half.abs() < 1e-12 {
        return Err(Error::Resonance { layer: j, k: 0.0 });
    }
    let (s, c) = (a * (hi + lo) / 2.0).sin_cos();
    let f = a / (2.0 * area * half);
    Ok((f * (c * defect.0 - s * defect.1), f * (s * defect.0 + c * defect.1)))
}
