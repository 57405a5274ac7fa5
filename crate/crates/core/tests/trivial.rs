mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;
use strata::trivial::{trivial_velocity, PressureNormalization};
use strata::Tau;

proptest! {
    #[test]
    fn speed_is_constant_and_interfaces_match(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=4);
        let top_fluid = rng.gen_bool(0.5);
        let fs = common::random_stack(&mut rng, common::StackDraw { n, top_fluid, alpha_max: 2.0 });
        let tau = Tau::new(rng.gen_range(0.1..3.0), rng.gen_range(0.0..2.0 * PI)).unwrap();
        for j in 1..=fs.m() {
            let z = rng.gen_range(fs.depth(j - 1)..fs.depth(j));
            let u = trivial_velocity(&fs, tau, j, z).unwrap();
            prop_assert!((u[0].hypot(u[1]) - tau.r()).abs() < 1e-13 * tau.r());
            prop_assert_eq!(u[2], 0.0);
        }
        for j in 1..fs.m() {
            let below = trivial_velocity(&fs, tau, j, fs.depth(j)).unwrap();
            let above = trivial_velocity(&fs, tau, j + 1, fs.depth(j)).unwrap();
            for c in 0..3 {
                prop_assert!((below[c] - above[c]).abs() < 1e-12 * tau.r());
            }
        }
    }

    #[test]
    fn background_is_beltrami(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let fs = common::random_stack(&mut rng, common::StackDraw { n: 2, top_fluid: true, alpha_max: 2.0 });
        let tau = Tau::new(rng.gen_range(0.1..3.0), rng.gen_range(0.0..2.0 * PI)).unwrap();
        let j = rng.gen_range(1..=fs.m());
        let z = rng.gen_range(fs.depth(j - 1) + 0.01..fs.depth(j) - 0.01);
        let h = 1e-5 * z.abs().max(1.0);
        let u = |z: f64| trivial_velocity(&fs, tau, j, z).unwrap();
        // The flow depends on z only.
        let du1 = (u(z + h)[0] - u(z - h)[0]) / (2.0 * h);
        let du2 = (u(z + h)[1] - u(z - h)[1]) / (2.0 * h);
        let curl = [-du2, du1, 0.0];
        let here = u(z);
        let a = fs.alpha(j);
        for c in 0..3 {
            prop_assert!((curl[c] - a * here[c]).abs() < 1e-6 * tau.r());
        }
    }
}

#[test]
fn rejects_heights_outside_the_layer() {
    let fs = strata::FluidStack::new(vec![2.0, 1.0], vec![0.3, 0.1], vec![1.0, 2.0], vec![1.0], 1.0).unwrap();
    let tau = Tau::new(1.0, 0.0).unwrap();
    assert!(trivial_velocity(&fs, tau, 1, 1.5).is_err());
    assert!(trivial_velocity(&fs, tau, 3, 1.5).is_err());
}

#[test]
fn pressure_constants_step_with_the_density_jump() {
    let fs = strata::FluidStack::new(vec![3.0, 2.0, 1.0], vec![0.3, -0.1, 0.2], vec![1.0, 2.0, 3.5], vec![1.0, 0.5], 9.81)
        .unwrap();
    let tau = Tau::new(1.3, 0.4).unwrap();
    let p = PressureNormalization::new(&fs, tau);
    for j in 1..=fs.n() {
        let expect = (fs.rho(j) - fs.rho(j + 1)) * fs.g() * fs.depth(j);
        assert!((p.constant(j) - p.constant(j + 1) - expect).abs() < 1e-12);
        let q = fs.rho(j) * tau.r().powi(2) / 2.0 + p.constant(j);
        assert!((p.bernoulli_constant(j) - q).abs() < 1e-12);
    }
}

#[test]
fn pressure_is_continuous_across_flat_interfaces() {
    let fs = strata::FluidStack::new(vec![3.0, 2.0, 1.0], vec![0.3, -0.1, 0.2], vec![1.0, 2.0, 3.5], vec![1.0, 0.5], 9.81)
        .unwrap();
    let tau = Tau::new(0.8, 2.0).unwrap();
    let p = PressureNormalization::new(&fs, tau);
    for j in 1..fs.m() {
        let z = fs.depth(j);
        let below = p.pressure(j, trivial_velocity(&fs, tau, j, z).unwrap(), z);
        let above = p.pressure(j + 1, trivial_velocity(&fs, tau, j + 1, z).unwrap(), z);
        assert!((below - above).abs() < 1e-12 * below.abs().max(1.0));
    }
}
