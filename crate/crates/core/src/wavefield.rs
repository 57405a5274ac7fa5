//! First-order wave fields at a bifurcation point.
//!
//! For a wave vector `k` with kernel vector `eta` the vertical velocity
//! profile in layer `j` is
//! `W3 = i r |k| (eta_{j-1} beta_{j-1} phi_j + eta_j beta_j psi_j)` and the
//! horizontal profiles follow from incompressibility and the Beltrami
//! relation. With `eta` real, the physical perturbation of an interface
//! displacement `eta cos(k . x)` is `(W1 cos, W2 cos, -w3 sin)(k . x)` where
//! `W3 = i w3`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bifurcation::BifurcationPoint;
use crate::config::{vec_norm, FluidStack, Lattice};
use crate::error::{Error, Result};
use crate::modes::VerticalMode;
use crate::trivial::{beta, helical_velocity, PressureNormalization, Tau};

/// Interface slope above which the linear field is flagged.
pub const SLOPE_WARNING: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
struct LayerProfile {
    mode: Option<VerticalMode>,
    alpha: f64,
    lower: f64,
    upper: f64,
}

/// Analytic velocity profiles of one Fourier mode in every fluid layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    k: [f64; 2],
    kmag: f64,
    gamma: f64,
    layers: Vec<LayerProfile>,
}

/// Profile values at one height: `W1`, `W2` real, `W3 = i w3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileValue {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub dw3: f64,
}

impl ModeSolution {
    /// `eta` holds the interface amplitudes `eta_1..eta_n`.
    pub fn new(fs: &FluidStack, tau: Tau, k: [f64; 2], eta: &[f64]) -> Result<Self> {
        let n = fs.n();
        if eta.len() != n {
            return Err(Error::Invalid(format!("kernel vector has {} entries, expected {n}", eta.len())));
        }
        let kmag = vec_norm(k);
        let gamma = k[1].atan2(k[0]);
        let amp = |j: usize| if j == 0 || j > n { 0.0 } else { eta[j - 1] };
        let mut layers = Vec::with_capacity(fs.m());
        for j in 1..=fs.m() {
            if kmag == 0.0 {
                layers.push(LayerProfile { mode: None, alpha: fs.alpha(j), lower: 0.0, upper: 0.0 });
                continue;
            }
            let mode = VerticalMode::new(fs, j, kmag)?;
            let scale = tau.r() * kmag;
            let lower = scale * amp(j - 1) * beta(fs, tau, j - 1, gamma).0;
            let upper = scale * amp(j) * beta(fs, tau, j, gamma).0;
            layers.push(LayerProfile { mode: Some(mode), alpha: fs.alpha(j), lower, upper });
        }
        Ok(ModeSolution { k, kmag, gamma, layers })
    }

    pub fn k(&self) -> [f64; 2] {
        self.k
    }

    /// Profiles of layer `j` at height `z`.
    pub fn profile(&self, j: usize, z: f64) -> ProfileValue {
        let l = &self.layers[j - 1];
        let Some(mode) = l.mode else {
            return ProfileValue { w1: 0.0, w2: 0.0, w3: 0.0, dw3: 0.0 };
        };
        let w3 = l.lower * mode.phi(z) + l.upper * mode.psi(z);
        let dw3 = l.lower * mode.phi_prime(z) + l.upper * mode.psi_prime(z);
        let (s, c) = self.gamma.sin_cos();
        let w1 = -(c * dw3 + l.alpha * s * w3) / self.kmag;
        let w2 = (-s * dw3 + l.alpha * c * w3) / self.kmag;
        ProfileValue { w1, w2, w3, dw3 }
    }

    /// Physical velocity perturbation for the displacement `cos(k . x)`.
    pub fn velocity(&self, j: usize, x: [f64; 3]) -> [f64; 3] {
        let p = self.profile(j, x[2]);
        let (s, c) = (self.k[0] * x[0] + self.k[1] * x[1]).sin_cos();
        [p.w1 * c, p.w2 * c, -p.w3 * s]
    }
}

/// Profiles sampled on `nz` equally spaced heights per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfiles {
    pub k: [f64; 2],
    /// Per layer: `(z, value)` samples from bottom to top.
    pub layers: Vec<Vec<(f64, ProfileValue)>>,
}

pub fn solve_mode(fs: &FluidStack, tau: Tau, k: [f64; 2], eta: &[f64], nz: usize) -> Result<ModeProfiles> {
    let sol = ModeSolution::new(fs, tau, k, eta)?;
    let layers = (1..=fs.m())
        .map(|j| {
            layer_heights(fs, j, nz)
                .into_iter()
                .map(|z| (z, sol.profile(j, z)))
                .collect()
        })
        .collect();
    Ok(ModeProfiles { k, layers })
}

fn layer_heights(fs: &FluidStack, j: usize, nz: usize) -> Vec<f64> {
    let (lo, hi) = (fs.depth(j - 1), fs.depth(j));
    match nz {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..nz)
            .map(|i| if i + 1 == nz { hi } else { lo + (hi - lo) * i as f64 / (nz - 1) as f64 })
            .collect(),
    }
}

/// Sampling resolution of a wave field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub na: usize,
    pub nb: usize,
    pub nz: usize,
}

impl Default for FieldGrid {
    fn default() -> Self {
        FieldGrid { na: 64, nb: 64, nz: 33 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub layer: usize,
    pub u: [f64; 3],
    pub p: f64,
}

/// Interface displacements and the total velocity and pressure on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFieldSample {
    pub grid: FieldGrid,
    pub tau: Tau,
    pub iota: usize,
    pub kappa: usize,
    pub t: [f64; 2],
    /// Horizontal nodes, first index fastest.
    pub nodes: Vec<[f64; 2]>,
    /// `eta[node][j - 1]`.
    pub eta: Vec<Vec<f64>>,
    pub volume: Vec<VolumeSample>,
    pub max_slope: f64,
    pub warnings: Vec<String>,
}

/// First-order field `eta_j = sum_i t_i eta_j(k_i) cos(k_i . x)` and
/// `u = U + sum_i t_i Re[W(k_i) e^{i k_i . x}]` in the flat reference frame.
pub fn assemble_first_order(
    base: &FluidStack,
    lat: &Lattice,
    point: &BifurcationPoint,
    t: [f64; 2],
    grid: FieldGrid,
) -> Result<WaveFieldSample> {
    let fs = point.fluid(base)?;
    let tau = point.tau;
    let modes = [
        ModeSolution::new(&fs, tau, lat.k1, &point.eta1)?,
        ModeSolution::new(&fs, tau, lat.k2, &point.eta2)?,
    ];
    let amps = [&point.eta1, &point.eta2];
    let pressure = PressureNormalization::new(&fs, tau);
    let n = fs.n();
    let mut nodes = Vec::with_capacity(grid.na * grid.nb);
    let mut eta = Vec::with_capacity(grid.na * grid.nb);
    let mut max_slope = 0.0_f64;
    for b in 0..grid.nb {
        for a in 0..grid.na {
            let x = lat.cell_point(a as f64 / grid.na as f64, b as f64 / grid.nb as f64);
            let mut heights = vec![0.0; n];
            for j in 0..n {
                let mut grad = [0.0; 2];
                for i in 0..2 {
                    let k = modes[i].k();
                    let (s, c) = (k[0] * x[0] + k[1] * x[1]).sin_cos();
                    heights[j] += t[i] * amps[i][j] * c;
                    grad[0] -= t[i] * amps[i][j] * s * k[0];
                    grad[1] -= t[i] * amps[i][j] * s * k[1];
                }
                max_slope = max_slope.max(vec_norm(grad));
            }
            nodes.push(x);
            eta.push(heights);
        }
    }
    let mut volume = Vec::with_capacity(nodes.len() * grid.nz * fs.m());
    for j in 1..=fs.m() {
        for z in layer_heights(&fs, j, grid.nz) {
            let background = helical_velocity(&fs, tau, j, z);
            for x in &nodes {
                let mut u = background;
                for i in 0..2 {
                    let du = modes[i].velocity(j, [x[0], x[1], z]);
                    for c in 0..3 {
                        u[c] += t[i] * du[c];
                    }
                }
                volume.push(VolumeSample { x: x[0], y: x[1], z, layer: j, u, p: pressure.pressure(j, u, z) });
            }
        }
    }
    let mut warnings = Vec::new();
    if max_slope > SLOPE_WARNING {
        warnings.push(format!(
            "interface slope {max_slope:.3} exceeds {SLOPE_WARNING}; the linear field may be inaccurate"
        ));
    }
    Ok(WaveFieldSample {
        grid,
        tau,
        iota: point.iota,
        kappa: point.kappa,
        t,
        nodes,
        eta,
        volume,
        max_slope,
        warnings,
    })
}

/// Formats a number with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Metadata stored next to an exported field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMetadata {
    pub config_hash: String,
    pub tau: Tau,
    pub iota: usize,
    pub kappa: usize,
    pub t: [f64; 2],
    pub grid: FieldGrid,
    pub normalization: String,
    pub max_slope: f64,
    pub warnings: Vec<String>,
    pub manifest: Option<String>,
}

impl FieldMetadata {
    pub fn for_sample(sample: &WaveFieldSample, config_hash: &str) -> Self {
        FieldMetadata {
            config_hash: config_hash.to_string(),
            tau: sample.tau,
            iota: sample.iota,
            kappa: sample.kappa,
            t: sample.t,
            grid: sample.grid,
            normalization: "kernel vectors have unit Euclidean norm and a positive leading component".into(),
            max_slope: sample.max_slope,
            warnings: sample.warnings.clone(),
            manifest: None,
        }
    }
}

pub fn eta_csv(sample: &WaveFieldSample) -> String {
    let n = sample.eta.first().map_or(0, |v| v.len());
    let mut out = String::from("x,y");
    for j in 1..=n {
        let _ = write!(out, ",eta_{j}");
    }
    out.push('\n');
    for (x, heights) in sample.nodes.iter().zip(&sample.eta) {
        out.push_str(&fmt_num(x[0]));
        out.push(',');
        out.push_str(&fmt_num(x[1]));
        for h in heights {
            out.push(',');
            out.push_str(&fmt_num(*h));
        }
        out.push('\n');
    }
    out
}

pub fn volume_csv(sample: &WaveFieldSample) -> String {
    let mut out = String::from("x,y,z,layer,u1,u2,u3,p\n");
    for v in &sample.volume {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_num(v.x),
            fmt_num(v.y),
            fmt_num(v.z),
            v.layer,
            fmt_num(v.u[0]),
            fmt_num(v.u[1]),
            fmt_num(v.u[2]),
            fmt_num(v.p)
        );
    }
    out
}

/// File names written by [`export_field`].
pub const EXPORT_FILES: [&str; 3] = ["eta.csv", "volume.csv", "metadata.json"];

/// Writes `eta.csv`, `volume.csv` and `metadata.json` into `dir`. Existing
/// files are only replaced when `force` is set.
pub fn export_field(sample: &WaveFieldSample, meta: &FieldMetadata, dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let paths: Vec<PathBuf> = EXPORT_FILES.iter().map(|f| dir.join(f)).collect();
    if !force {
        if let Some(p) = paths.iter().find(|p| p.exists()) {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::AlreadyExists,
                format!("{} exists; pass force to overwrite", p.display()),
            )));
        }
    }
    fs::write(&paths[0], eta_csv(sample))?;
    fs::write(&paths[1], volume_csv(sample))?;
    fs::write(&paths[2], serde_json::to_string_pretty(meta)? + "\n")?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_wave_vector_gives_zero_profiles() {
        let fs = FluidStack::new(vec![2.0, 1.0, 0.0], vec![0.0; 3], vec![1.0, 2.0, 3.0], vec![1.0, 1.0], 1.0).unwrap();
        let sol = ModeSolution::new(&fs, Tau::new(1.0, 0.3).unwrap(), [0.0, 0.0], &[0.6, 0.8]).unwrap();
        let p = sol.profile(2, 1.5);
        assert_eq!((p.w1, p.w2, p.w3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 6.02e23, 5e-324] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
    }
}
