//! Small dense-vector helpers shared across modules.

use nalgebra::{DMatrix, SymmetricEigen};
use faer::{Mat, Side};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Scales `v` to unit length and flips it so that its first component of
/// non-negligible size is positive.
pub fn normalize_leading_positive(v: &mut [f64]) {
    let len = norm(v);
    if len == 0.0 {
        return;
    }
    for x in v.iter_mut() {
        *x /= len;
    }
    if let Some(lead) = v.iter().copied().find(|x| x.abs() > 1e-12) {
        if lead < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Flips `v` so that its component of largest magnitude is positive.
pub fn normalize_largest_positive(v: &mut [f64]) {
    let mut best = 0.0_f64;
    for &x in v.iter() {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Eigenvalues in ascending order with unit eigenvectors of a dense
/// symmetric matrix, without any sign convention.
pub fn sym_eigen_raw(m: &DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.nrows();
    let dense = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    if let Ok(eig) = dense.self_adjoint_eigen(Side::Lower) {
        let (u, s) = (eig.U(), eig.S());
        let values: Vec<f64> = (0..n).map(|l| s[l]).collect();
        if values.iter().all(|v| v.is_finite()) {
            let vectors = (0..n).map(|l| (0..n).map(|i| u[(i, l)]).collect()).collect();
            return (values, vectors);
        }
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    (values, vectors)
}

/// Eigen-decomposition of a dense symmetric matrix with eigenvalues in
/// ascending order. Each eigenvector has its largest component positive.
pub fn sym_eigen_sorted(m: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (values, mut vectors) = sym_eigen_raw(&m);
    for v in &mut vectors {
        normalize_largest_positive(v);
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_component_made_positive() {
        let mut v = vec![0.0, -3.0, 4.0];
        normalize_leading_positive(&mut v);
        assert!((v[1] - 0.6).abs() < 1e-15);
        assert!((v[2] + 0.8).abs() < 1e-15);
    }

    #[test]
    fn eigen_sorted_ascending() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = sym_eigen_sorted(m);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!(vecs[1][0] > 0.0 && vecs[1][1] > 0.0);
    }
}
