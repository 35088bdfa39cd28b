//! Orthonormal Proriol-Koornwinder-Dubiner modes on the reference triangle
//! with vertices (-1,-1), (1,-1), (-1,1).

use super::polynomials::{jacobi, jacobi_derivative};
use crate::linalg::Matrix;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when num-traits is built with `std`
use num_traits::Float;

/// Mode exponents `(i, j)` in graded lexicographic order: total degree
/// ascending, then `i` descending.
pub fn mode_indices(p: usize) -> Vec<(usize, usize)> {
    let mut modes = Vec::with_capacity((p + 1) * (p + 2) / 2);
    for degree in 0..=p {
        for i in (0..=degree).rev() {
            modes.push((i, degree - i));
        }
    }
    modes
}

fn collapsed(r: f64, s: f64) -> (f64, f64) {
    let a = if (1.0 - s).abs() > 1e-14 {
        2.0 * (1.0 + r) / (1.0 - s) - 1.0
    } else {
        -1.0
    };
    (a, s)
}

/// Value of mode `(i, j)` at `(r, s)`.
pub fn mode(i: usize, j: usize, r: f64, s: f64) -> f64 {
    let (a, b) = collapsed(r, s);
    2f64.sqrt() * jacobi(a, 0, 0, i) * jacobi(b, 2 * i as u32 + 1, 0, j) * (1.0 - b).powi(i as i32)
}

/// Gradient `(d/dr, d/ds)` of mode `(i, j)` at `(r, s)`.
pub fn mode_gradient(i: usize, j: usize, r: f64, s: f64) -> (f64, f64) {
    let (a, b) = collapsed(r, s);
    let alpha = 2 * i as u32 + 1;
    let fa = jacobi(a, 0, 0, i);
    let dfa = jacobi_derivative(a, 0, 0, i);
    let gb = jacobi(b, alpha, 0, j);
    let dgb = jacobi_derivative(b, alpha, 0, j);
    let half = 0.5 * (1.0 - b);
    let mut dr = dfa * gb;
    if i > 0 {
        dr *= half.powi(i as i32 - 1);
    }
    let mut ds = dfa * gb * 0.5 * (1.0 + a);
    if i > 0 {
        ds *= half.powi(i as i32 - 1);
    }
    let mut tmp = dgb * half.powi(i as i32);
    if i > 0 {
        tmp -= 0.5 * i as f64 * gb * half.powi(i as i32 - 1);
    }
    ds += fa * tmp;
    let scale = 2f64.powf(i as f64 + 0.5);
    (scale * dr, scale * ds)
}

/// Generalized Vandermonde matrix: row `n` holds every mode evaluated at
/// `points[n]`.
pub fn pkd_vandermonde(p: usize, points: &[[f64; 2]]) -> Matrix {
    let modes = mode_indices(p);
    Matrix::from_fn(points.len(), modes.len(), |n, m| {
        let (i, j) = modes[m];
        mode(i, j, points[n][0], points[n][1])
    })
}

/// Gradient Vandermonde matrices `(V_r, V_s)`.
pub fn pkd_gradient_vandermonde(p: usize, points: &[[f64; 2]]) -> (Matrix, Matrix) {
    let modes = mode_indices(p);
    let mut vr = Matrix::zeros(points.len(), modes.len());
    let mut vs = Matrix::zeros(points.len(), modes.len());
    for (n, pt) in points.iter().enumerate() {
        for (m, &(i, j)) in modes.iter().enumerate() {
            let (dr, ds) = mode_gradient(i, j, pt[0], pt[1]);
            vr[(n, m)] = dr;
            vs[(n, m)] = ds;
        }
    }
    (vr, vs)
}
