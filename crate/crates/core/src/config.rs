//! Fluid stack, periodic lattice and the vertical non-resonance check.
//!
//! Layers are numbered from 1 at the bottom. Interface `j` sits at height
//! `d_j`, the rigid bottom is at `d_0 = 0` and the lid is at `d_{n+1}`.
//! When the top density vanishes the top layer is a vacuum and only `n`
//! layers carry fluid.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub n: usize,
    pub g: f64,
    pub rho: Vec<f64>,
    pub alpha: Vec<f64>,
    pub d: Vec<f64>,
    pub sigma: Vec<f64>,
    pub lattice: LatticeSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub lambda1: [f64; 2],
    pub lambda2: [f64; 2],
}

/// A validated fluid stack together with its lattice.
#[derive(Debug, Clone)]
pub struct Config {
    pub fluid: FluidStack,
    pub lattice: Lattice,
}

impl Config {
    pub fn from_file_data(file: &ConfigFile) -> Result<Self> {
        if file.sigma.len() != file.n {
            return Err(Error::Invalid(format!(
                "sigma has {} entries, expected n = {}",
                file.sigma.len(),
                file.n
            )));
        }
        let fluid = FluidStack::new(
            file.rho.clone(),
            file.alpha.clone(),
            file.d.clone(),
            file.sigma.clone(),
            file.g,
        )?;
        let lattice = Lattice::new(file.lattice.lambda1, file.lattice.lambda2)?;
        Ok(Config { fluid, lattice })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text)?;
        Self::from_file_data(&file)
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)?;
    Config::from_json(&text)
}

/// Densities, vorticities, interface heights and surface tensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidStack {
    rho: Vec<f64>,
    alpha: Vec<f64>,
    d: Vec<f64>,
    sigma: Vec<f64>,
    g: f64,
}

impl FluidStack {
    /// `rho`, `alpha` and `d` have `n + 1` entries, `sigma` has `n`.
    pub fn new(rho: Vec<f64>, alpha: Vec<f64>, d: Vec<f64>, sigma: Vec<f64>, g: f64) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Err(Error::Invalid("at least one interface is required".into()));
        }
        for (name, v) in [("rho", &rho), ("alpha", &alpha), ("d", &d)] {
            if v.len() != n + 1 {
                return Err(Error::Invalid(format!(
                    "{name} has {} entries, expected n + 1 = {}",
                    v.len(),
                    n + 1
                )));
            }
        }
        let all = rho.iter().chain(&alpha).chain(&d).chain(&sigma).chain(std::iter::once(&g));
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite parameter".into()));
        }
        if rho.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Invalid("rho not strictly decreasing".into()));
        }
        if rho[n] < 0.0 {
            return Err(Error::Invalid("top density must be non-negative".into()));
        }
        if d[0] <= 0.0 || d.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("d not strictly increasing from 0".into()));
        }
        if sigma.iter().any(|&s| s <= 0.0) {
            return Err(Error::Invalid("sigma must be positive".into()));
        }
        if g <= 0.0 {
            return Err(Error::Invalid("g must be positive".into()));
        }
        Ok(FluidStack { rho, alpha, d, sigma, g })
    }

    /// Number of interfaces.
    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// Number of fluid-carrying layers.
    pub fn m(&self) -> usize {
        if self.has_top_fluid() {
            self.n() + 1
        } else {
            self.n()
        }
    }

    pub fn has_top_fluid(&self) -> bool {
        self.rho[self.n()] > 0.0
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Density of layer `j`, `1 <= j <= n + 1`.
    pub fn rho(&self, j: usize) -> f64 {
        self.rho[j - 1]
    }

    /// Beltrami coefficient of layer `j`, `1 <= j <= n + 1`.
    pub fn alpha(&self, j: usize) -> f64 {
        self.alpha[j - 1]
    }

    /// Height of interface `j`, `0 <= j <= n + 1`, with `d_0 = 0`.
    pub fn depth(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.d[j - 1]
        }
    }

    /// Thickness of layer `j`.
    pub fn thickness(&self, j: usize) -> f64 {
        self.depth(j) - self.depth(j - 1)
    }

    /// Surface tension of interface `j`, `1 <= j <= n`.
    pub fn sigma(&self, j: usize) -> f64 {
        self.sigma[j - 1]
    }

    /// Density jump `rho_j - rho_{j+1}` across interface `j`.
    pub fn density_jump(&self, j: usize) -> f64 {
        self.rho(j) - self.rho(j + 1)
    }

    pub fn rho_all(&self) -> &[f64] {
        &self.rho
    }

    pub fn alpha_all(&self) -> &[f64] {
        &self.alpha
    }

    pub fn depths(&self) -> &[f64] {
        &self.d
    }

    pub fn sigma_all(&self) -> &[f64] {
        &self.sigma
    }

    pub fn max_abs_alpha(&self) -> f64 {
        (1..=self.m()).map(|j| self.alpha(j).abs()).fold(0.0, f64::max)
    }

    pub fn min_thickness(&self) -> f64 {
        (1..=self.m()).map(|j| self.thickness(j)).fold(f64::INFINITY, f64::min)
    }

    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<Self> {
        Self::new(self.rho.clone(), alpha, self.d.clone(), self.sigma.clone(), self.g)
    }

    pub fn with_sigma(&self, sigma: Vec<f64>) -> Result<Self> {
        Self::new(self.rho.clone(), self.alpha.clone(), self.d.clone(), sigma, self.g)
    }

    pub fn check_layer(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.m() {
            return Err(Error::LayerIndex { layer: j, max: self.m() });
        }
        Ok(())
    }
}

/// Records how the input lattice was brought to canonical position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameNormalization {
    /// Counter-clockwise rotation applied to the input coordinates.
    pub rotation: f64,
    /// Whether the second generator was replaced by its negative.
    pub second_negated: bool,
}

/// Periodic lattice in canonical position: `k1` points along the x axis and
/// `k2` lies in the open upper half plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub lambda1: [f64; 2],
    pub lambda2: [f64; 2],
    pub k1: [f64; 2],
    pub k2: [f64; 2],
    pub gamma1: f64,
    pub gamma2: f64,
    pub frame: FrameNormalization,
    pub input: LatticeSpec,
}

fn rotate(v: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

fn dual_pair(l1: [f64; 2], l2: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let det = l1[0] * l2[1] - l1[1] * l2[0];
    let f = 2.0 * PI / det;
    ([f * l2[1], -f * l2[0]], [-f * l1[1], f * l1[0]])
}

pub fn vec_norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

impl Lattice {
    pub fn new(lambda1: [f64; 2], lambda2: [f64; 2]) -> Result<Self> {
        if lambda1.iter().chain(&lambda2).any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite lattice generator".into()));
        }
        let det = lambda1[0] * lambda2[1] - lambda1[1] * lambda2[0];
        if det.abs() <= 1e-12 * vec_norm(lambda1) * vec_norm(lambda2) || det == 0.0 {
            return Err(Error::Invalid("lattice generators dependent".into()));
        }
        let (k1_raw, _) = dual_pair(lambda1, lambda2);
        let rotation = -k1_raw[1].atan2(k1_raw[0]);
        let l1 = rotate(lambda1, rotation);
        let mut l2 = rotate(lambda2, rotation);
        let (mut k1, mut k2) = dual_pair(l1, l2);
        let second_negated = k2[1] < 0.0;
        if second_negated {
            l2 = [-l2[0], -l2[1]];
            let pair = dual_pair(l1, l2);
            k1 = pair.0;
            k2 = pair.1;
        }
        if k1[1].abs() < 1e-14 * vec_norm(k1) {
            k1[1] = 0.0;
        }
        Ok(Lattice {
            lambda1: l1,
            lambda2: l2,
            k1,
            k2,
            gamma1: k1[1].atan2(k1[0]),
            gamma2: k2[1].atan2(k2[0]),
            frame: FrameNormalization { rotation, second_negated },
            input: LatticeSpec { lambda1, lambda2 },
        })
    }

    /// Area of the periodic cell.
    pub fn cell_area(&self) -> f64 {
        (self.lambda1[0] * self.lambda2[1] - self.lambda1[1] * self.lambda2[0]).abs()
    }

    /// Dual lattice vector with integer coordinates `(m1, m2)`.
    pub fn dual_vector(&self, m1: i64, m2: i64) -> [f64; 2] {
        let (a, b) = (m1 as f64, m2 as f64);
        [a * self.k1[0] + b * self.k2[0], a * self.k1[1] + b * self.k2[1]]
    }

    /// Point of the periodic cell with fractional coordinates `(a, b)`.
    pub fn cell_point(&self, a: f64, b: f64) -> [f64; 2] {
        [
            a * self.lambda1[0] + b * self.lambda2[0],
            a * self.lambda1[1] + b * self.lambda2[1],
        ]
    }

    /// Whether the dual generators have equal length to within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let (a, b) = (vec_norm(self.k1), vec_norm(self.k2));
        (a - b).abs() <= tol * a.max(b)
    }
}

/// A nonzero dual lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub m1: i64,
    pub m2: i64,
    pub k: [f64; 2],
    pub mag: f64,
    pub angle: f64,
}

/// All dual lattice points with `0 < |k| <= radius`, ordered by `|k|`, then
/// `m1`, then `m2`. A relative slack of `1e-12` is allowed on the radius.
pub fn dual_lattice_points(lat: &Lattice, radius: f64) -> Vec<DualPoint> {
    if !(radius > 0.0) {
        return Vec::new();
    }
    let limit = radius * (1.0 + 1e-12);
    let b1 = (vec_norm(lat.lambda1) * limit / (2.0 * PI)).floor() as i64 + 1;
    let b2 = (vec_norm(lat.lambda2) * limit / (2.0 * PI)).floor() as i64 + 1;
    let mut out = Vec::new();
    for m1 in -b1..=b1 {
        for m2 in -b2..=b2 {
            if m1 == 0 && m2 == 0 {
                continue;
            }
            let k = lat.dual_vector(m1, m2);
            let mag = vec_norm(k);
            if mag <= limit {
                out.push(DualPoint { m1, m2, k, mag, angle: k[1].atan2(k[0]) });
            }
        }
    }
    out.sort_by(|a, b| {
        a.mag
            .total_cmp(&b.mag)
            .then(a.m1.cmp(&b.m1))
            .then(a.m2.cmp(&b.m2))
    });
    out
}

/// Relative tolerance of the non-resonance test.
pub const RESONANCE_TOL: f64 = 1e-9;

/// A layer and wave number at which the vertical problem is (nearly)
/// resonant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceHit {
    pub layer: usize,
    /// Integer coordinates of the dual point, `None` for `k = 0`.
    pub m: Option<(i64, i64)>,
    pub k_mag: f64,
    /// `sqrt(alpha^2 - |k|^2) h / pi`.
    pub ratio: f64,
    /// Relative distance of `ratio` to the nearest positive integer.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonResonanceReport {
    pub ok: bool,
    pub violations: Vec<ResonanceHit>,
    pub warnings: Vec<ResonanceHit>,
}

fn resonance_hit(layer: usize, m: Option<(i64, i64)>, k_mag: f64, alpha: f64, h: f64) -> ResonanceHit {
    let ratio = (alpha * alpha - k_mag * k_mag).max(0.0).sqrt() * h / PI;
    let nearest = ratio.round().max(1.0);
    let distance = (ratio - nearest).abs() / nearest.max(1.0);
    ResonanceHit { layer, m, k_mag, ratio, distance }
}

/// Checks every fluid layer at `k = 0` and at all dual points with
/// `|k| < |alpha_j|`.
pub fn check_non_resonance(fs: &FluidStack, lat: &Lattice) -> NonResonanceReport {
    check_non_resonance_within(fs, lat, f64::INFINITY)
}

/// As [`check_non_resonance`] but only inspects dual points with
/// `|k| <= radius`.
pub fn check_non_resonance_within(fs: &FluidStack, lat: &Lattice, radius: f64) -> NonResonanceReport {
    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    let mut file = |hit: ResonanceHit| {
        if hit.distance < RESONANCE_TOL {
            violations.push(hit);
        } else if hit.distance < 10.0 * RESONANCE_TOL {
            warnings.push(hit);
        }
    };
    for j in 1..=fs.m() {
        let a = fs.alpha(j);
        if a == 0.0 {
            continue;
        }
        let h = fs.thickness(j);
        file(resonance_hit(j, None, 0.0, a, h));
        let reach = radius.min(a.abs());
        for p in dual_lattice_points(lat, reach) {
            if p.mag < a.abs() {
                file(resonance_hit(j, Some((p.m1, p.m2)), p.mag, a, h));
            }
        }
    }
    NonResonanceReport { ok: violations.is_empty(), violations, warnings }
}
