#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use strata::{FluidStack, Lattice};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Relative deviation of `a` from `b`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub struct StackDraw {
    pub n: usize,
    pub top_fluid: bool,
    pub alpha_max: f64,
}

/// Random stack with thicknesses in `[0.4, 2]` and `|alpha| <= alpha_max`.
pub fn random_stack(rng: &mut ChaCha8Rng, draw: StackDraw) -> FluidStack {
    let n = draw.n;
    let mut rho = Vec::with_capacity(n + 1);
    let mut level = rng.gen_range(1.0..3.0);
    for _ in 0..=n {
        rho.push(level);
        level *= rng.gen_range(0.3..0.85);
    }
    if !draw.top_fluid {
        rho[n] = 0.0;
    }
    let mut d = Vec::with_capacity(n + 1);
    let mut z = 0.0;
    for _ in 0..=n {
        z += rng.gen_range(0.4..2.0);
        d.push(z);
    }
    let alpha = (0..=n)
        .map(|j| if j == n && !draw.top_fluid { 0.0 } else { rng.gen_range(-draw.alpha_max..=draw.alpha_max) })
        .collect();
    let sigma = (0..n).map(|_| rng.gen_range(0.05..1.5)).collect();
    let g = rng.gen_range(0.5..2.0);
    FluidStack::new(rho, alpha, d, sigma, g).expect("valid random stack")
}

/// Random lattice with generator lengths in `[3, 9]` and a well separated angle.
pub fn random_lattice(rng: &mut ChaCha8Rng) -> Lattice {
    let a = rng.gen_range(3.0..9.0);
    let b = rng.gen_range(3.0..9.0);
    let phi = rng.gen_range(0.0..2.0 * PI);
    let open = rng.gen_range(0.35 * PI..0.65 * PI);
    Lattice::new([a * phi.cos(), a * phi.sin()], [b * (phi + open).cos(), b * (phi + open).sin()]).unwrap()
}

/// Random rhombic lattice, so that `|k1| = |k2|`.
pub fn random_symmetric_lattice(rng: &mut ChaCha8Rng) -> Lattice {
    let a = rng.gen_range(3.0..9.0);
    let phi = rng.gen_range(0.0..2.0 * PI);
    let open = rng.gen_range(0.35 * PI..0.65 * PI);
    Lattice::new([a * phi.cos(), a * phi.sin()], [a * (phi + open).cos(), a * (phi + open).sin()]).unwrap()
}

pub fn square_lattice() -> Lattice {
    Lattice::new([2.0 * PI, 0.0], [0.0, 2.0 * PI]).unwrap()
}

/// `psi'` of a layer of thickness `h` at its top and bottom, from the
/// textbook closed forms.
pub fn slopes_closed_form(h: f64, alpha: f64, k: f64) -> (f64, f64) {
    let s = k * k - alpha * alpha;
    if s > 0.0 {
        let q = s.sqrt();
        (q / (q * h).tanh(), q / (q * h).sinh())
    } else if s < 0.0 {
        let q = (-s).sqrt();
        (q / (q * h).tan(), q / (q * h).sin())
    } else {
        (1.0 / h, 1.0 / h)
    }
}

/// Dense `B(k)` from the closed-form slopes.
pub fn coupling_oracle(fs: &FluidStack, k: f64) -> nalgebra::DMatrix<f64> {
    let n = fs.n();
    let mut b = nalgebra::DMatrix::zeros(n, n);
    let slope = |j: usize| {
        if fs.rho(j) == 0.0 {
            (0.0, 0.0)
        } else {
            slopes_closed_form(fs.thickness(j), fs.alpha(j), k)
        }
    };
    for j in 1..=n {
        b[(j - 1, j - 1)] = -fs.rho(j + 1) * slope(j + 1).0 - fs.rho(j) * slope(j).0;
        if j < n {
            let link = fs.rho(j + 1) * slope(j + 1).1;
            b[(j - 1, j)] = link;
            b[(j, j - 1)] = link;
        }
    }
    b
}
