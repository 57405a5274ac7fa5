mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use strata::flattening::{
    correction_coeffs, correction_forward, corrector_field, defect_integrals, flatten_map, InterfaceGrid, TrigInterface,
    TrigTerm,
};
use strata::trivial::helical_velocity;
use strata::{FluidStack, Lattice, Tau};

fn random_interface(rng: &mut ChaCha8Rng, lat: &Lattice, amp: f64) -> TrigInterface {
    let terms = (0..3)
        .map(|_| {
            let (m1, m2) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            TrigTerm { k: lat.dual_vector(m1, m2), cos: rng.gen_range(-amp..amp), sin: rng.gen_range(-amp..amp) }
        })
        .collect();
    TrigInterface { terms }
}

struct Setup {
    fs: FluidStack,
    lat: Lattice,
    interfaces: Vec<TrigInterface>,
    grid: InterfaceGrid,
    tau: Tau,
}

fn setup(seed: u64, amp: f64) -> Setup {
    let mut rng = common::rng(seed);
    let n = rng.gen_range(1..=3);
    let top_fluid = rng.gen_bool(0.5);
    let fs = common::random_stack(&mut rng, common::StackDraw { n, top_fluid, alpha_max: 1.5 });
    let lat = common::random_lattice(&mut rng);
    let interfaces: Vec<TrigInterface> = (0..n).map(|_| random_interface(&mut rng, &lat, amp)).collect();
    let grid = InterfaceGrid::from_trig(&lat, &interfaces, 24, 24);
    let tau = Tau::new(rng.gen_range(0.3..2.0), rng.gen_range(0.0..2.0 * PI)).unwrap();
    Setup { fs, lat, interfaces, grid, tau }
}

/// Composite Simpson rule.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

fn eta_at(s: &Setup, level: usize, x: [f64; 2]) -> f64 {
    if level == 0 || level > s.fs.n() {
        0.0
    } else {
        s.interfaces[level - 1].value(x)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flattening_is_affine_in_height(seed in any::<u64>(), lambda in 0.0..1.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let s = setup(seed, 0.05);
        let x = s.lat.cell_point(a, b);
        for j in 1..=s.fs.m() {
            let (lo, hi) = (s.fs.depth(j - 1), s.fs.depth(j));
            let (z1, z2) = (lo + 0.2 * (hi - lo), lo + 0.9 * (hi - lo));
            let at = |z: f64| flatten_map(&s.fs, &s.grid, j, [x[0], x[1], z]).unwrap().phi;
            let mixed = at(lambda * z1 + (1.0 - lambda) * z2);
            let combo = lambda * at(z1) + (1.0 - lambda) * at(z2);
            prop_assert!((mixed - combo).abs() < 1e-14 * hi.max(1.0));
        }
    }

    #[test]
    fn flattening_moves_layer_ends_onto_interfaces(seed in any::<u64>(), a in 0..24usize, b in 0..24usize) {
        let s = setup(seed, 0.05);
        let x = s.grid.node(a, b);
        for j in 1..=s.fs.m() {
            let (lo, hi) = (s.fs.depth(j - 1), s.fs.depth(j));
            let bottom = flatten_map(&s.fs, &s.grid, j, [x[0], x[1], lo]).unwrap().phi;
            let top = flatten_map(&s.fs, &s.grid, j, [x[0], x[1], hi]).unwrap().phi;
            prop_assert!((bottom - lo - eta_at(&s, j - 1, x)).abs() < 1e-12);
            prop_assert!((top - hi - eta_at(&s, j, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn corrector_column_integral(seed in any::<u64>(), a in 0..24usize, b in 0..24usize) {
        let s = setup(seed, 0.05);
        let x = s.grid.node(a, b);
        for j in 1..=s.fs.m() {
            let (lo, hi) = (s.fs.depth(j - 1), s.fs.depth(j));
            for c in 0..2 {
                let integral = simpson(
                    |z| corrector_field(&s.fs, s.tau, &s.grid, j, [x[0], x[1], z]).unwrap()[c],
                    lo,
                    hi,
                    200,
                );
                let expect = eta_at(&s, j, x) * helical_velocity(&s.fs, s.tau, j, hi)[c]
                    - eta_at(&s, j - 1, x) * helical_velocity(&s.fs, s.tau, j, lo)[c];
                prop_assert!((integral - expect).abs() < 1e-8 * s.tau.r(), "{integral} vs {expect}");
            }
        }
    }

    #[test]
    fn correction_round_trip(seed in any::<u64>(), d1 in -1.0..1.0f64, d2 in -1.0..1.0f64) {
        let s = setup(seed, 0.05);
        let area = s.lat.cell_area();
        for j in 1..=s.fs.m() {
            if s.fs.alpha(j) == 0.0 {
                continue;
            }
            let c = correction_coeffs(&s.fs, j, (d1, d2), area).unwrap();
            let back = correction_forward(&s.fs, j, c, area);
            prop_assert!((back.0 - d1).abs() < 1e-12 && (back.1 - d2).abs() < 1e-12);
        }
    }
}

/// The defect integrals equal the cell integral of the background flow over
/// the displaced layer minus that of the flattened corrector and background.
#[test]
fn defect_integrals_match_direct_quadrature() {
    for seed in 0..6 {
        let s = setup(seed, 0.15);
        let (na, nb) = (24, 24);
        for j in 1..=s.fs.m() {
            if s.fs.alpha(j) == 0.0 {
                continue;
            }
            let (lo, hi) = (s.fs.depth(j - 1), s.fs.depth(j));
            let mut direct = [0.0; 2];
            for p in 0..na {
                for q in 0..nb {
                    let x = s.lat.cell_point(p as f64 / na as f64, q as f64 / nb as f64);
                    for c in 0..2 {
                        let bottom = lo + eta_at(&s, j - 1, x);
                        let top = hi + eta_at(&s, j, x);
                        let moved = simpson(|z| helical_velocity(&s.fs, s.tau, j, z)[c], bottom, top, 200);
                        let flat = simpson(
                            |z| {
                                corrector_field(&s.fs, s.tau, &s.grid, j, [x[0], x[1], z]).unwrap()[c]
                                    + helical_velocity(&s.fs, s.tau, j, z)[c]
                            },
                            lo,
                            hi,
                            200,
                        );
                        direct[c] += (moved - flat) / (na * nb) as f64;
                    }
                }
            }
            let area = s.lat.cell_area();
            let (i1, i2) = defect_integrals(&s.fs, s.tau, &s.grid, j).unwrap();
            let scale = s.tau.r() * area * 1e-8;
            assert!((i1 - direct[0] * area).abs() < scale, "seed {seed} layer {j}: {i1} vs {}", direct[0] * area);
            assert!((i2 - direct[1] * area).abs() < scale, "seed {seed} layer {j}: {i2} vs {}", direct[1] * area);
        }
    }
}
