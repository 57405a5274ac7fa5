use proptest::prelude::*;
use strata::lsbif::{toys, BifProblem, Map};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn trivial_state_solves_for_every_parameter(c1 in -2.0..2.0f64, c2 in -2.0..2.0f64) {
        let coupled = toys::coupled([0.2, -0.4], toys::Coupling { m12: 0.3, m21: -0.2, p: 1.0, q: 0.5, u: 0.7, v: 1.2, w: 0.4 });
        for p in [toys::pitchfork([0.2, -0.4]), toys::with_complement([0.2, -0.4]), coupled] {
            let f = p.eval(&vec![0.0; p.dim()], &[c1, c2]);
            prop_assert!(norm(&f) < 1e-12);
        }
    }

    #[test]
    fn branch_residual_is_small(s1 in -0.2..0.2f64, s2 in -0.2..0.2f64) {
        let p = toys::with_complement([0.7, 0.1]);
        let b = p.solve_branch(&[s1, s2]).unwrap();
        let f0 = norm(&p.eval(&[0.0; 3], p.c_star()));
        prop_assert!(b.residual < 1e-10 * (1.0 + f0));
        let coords = p.kernel_coordinates(&b.x);
        prop_assert!((coords[0] - s1).abs() < 1e-14 && (coords[1] - s2).abs() < 1e-14);
    }
}

#[test]
fn kernel_and_cokernel_are_consistent() {
    // D_x F(0, c*) x_j vanishes, so every cokernel functional of it does too.
    let p = toys::with_complement([0.7, 0.1]);
    let h = 1e-7;
    for j in 0..2 {
        let mut x = [0.0; 3];
        x[j] = h;
        let image = p.eval(&x, p.c_star());
        assert!(image[0].abs() / h < 1e-12 && image[1].abs() / h < 1e-12);
    }
}

#[test]
fn remainder_vanishes_faster_than_amplitude() {
    let p = toys::with_complement([0.3, -0.2]);
    let mut previous = f64::INFINITY;
    for scale in [1e-1, 1e-2, 1e-3] {
        let s = [0.6 * scale, 0.8 * scale];
        let b = p.solve_branch(&s).unwrap();
        let rest = norm(&[b.x[0] - s[0], b.x[1] - s[1], b.x[2]]) / scale;
        assert!(rest < previous);
        previous = rest;
    }
    assert!(previous < 0.1);
}

#[test]
fn vanishing_amplitude_flags_non_uniqueness() {
    let p = toys::pitchfork([0.5, -0.25]);
    let b = p.solve_branch(&[0.1, 0.0]).unwrap();
    assert!(b.may_be_non_unique);
    // With x2 = 0 every value of c2 solves the second equation: a second
    // solution family through the same state.
    for shift in [0.3, -1.0, 2.5] {
        let f = p.eval(&b.x, &[b.c[0], b.c[1] + shift]);
        assert!(norm(&f) < 1e-12);
    }
    let full = p.solve_branch(&[0.1, 0.05]).unwrap();
    assert!(!full.may_be_non_unique);
}

#[test]
fn invariance_surrogate_separates_good_and_bad_maps() {
    let good = toys::coupled([0.0, 0.0], toys::Coupling { m12: 0.3, m21: -0.2, p: 1.0, q: 0.5, u: 0.7, v: 1.2, w: 0.4 });
    let samples = vec![(vec![0.0, 0.1], vec![0.05, 0.02]), (vec![0.2, 0.0], vec![-0.1, 0.3])];
    assert!(good.invariance_defect(&samples).unwrap() < 1e-12);

    // The first equation picks up x2^2 even when x1 = 0.
    let map: Map = Box::new(|x: &[f64], c: &[f64]| vec![c[0] * x[0] + x[1] * x[1], c[1] * x[1] - x[1].powi(3)]);
    let bad = BifProblem::new(map, 2, vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
        .unwrap();
    assert!(bad.invariance_defect(&samples).unwrap() > 1e-3);
}

#[test]
fn transversality_matrix_of_pitchfork_is_identity() {
    let nu = toys::pitchfork([0.1, 0.2]).nu_matrix();
    for i in 0..2 {
        for j in 0..2 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((nu[(i, j)] - expect).abs() < 1e-6);
        }
    }
}

#[test]
fn rejects_mismatched_bases() {
    let map: Map = Box::new(|x: &[f64], _c: &[f64]| x.to_vec());
    assert!(BifProblem::new(map, 2, vec![0.0], vec![vec![1.0, 0.0]], vec![]).is_err());
}
