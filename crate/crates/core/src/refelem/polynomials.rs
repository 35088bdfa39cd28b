//! Orthonormal Jacobi polynomials and one-dimensional Gauss rules.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // redundant when num-traits is built with `std`
use num_traits::Float;

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Orthonormal Jacobi polynomial `P_n^(alpha, beta)(x)` with respect to the
/// weight `(1-x)^alpha (1+x)^beta` on [-1, 1]. Integer parameters only.
pub fn jacobi(x: f64, alpha: u32, beta: u32, n: usize) -> f64 {
    let a = alpha as f64;
    let b = beta as f64;
    let gamma0 =
        2f64.powi((alpha + beta + 1) as i32) / (a + b + 1.0) * factorial(alpha) * factorial(beta)
            / factorial(alpha + beta);
    let p0 = 1.0 / gamma0.sqrt();
    if n == 0 {
        return p0;
    }
    let gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
    let p1 = ((a + b + 2.0) * x / 2.0 + (a - b) / 2.0) / gamma1.sqrt();
    if n == 1 {
        return p1;
    }
    let mut a_old = 2.0 / (2.0 + a + b) * ((a + 1.0) * (b + 1.0) / (a + b + 3.0)).sqrt();
    let (mut prev, mut cur) = (p0, p1);
    for i in 1..n {
        let i = i as f64;
        let h1 = 2.0 * i + a + b;
        let a_new = 2.0 / (h1 + 2.0)
            * ((i + 1.0) * (i + 1.0 + a + b) * (i + 1.0 + a) * (i + 1.0 + b)
                / (h1 + 1.0)
                / (h1 + 3.0))
                .sqrt();
        let b_new = -(a * a - b * b) / h1 / (h1 + 2.0);
        let next = (-a_old * prev + (x - b_new) * cur) / a_new;
        prev = cur;
        cur = next;
        a_old = a_new;
    }
    cur
}

/// Derivative of [`jacobi`] in `x`.
pub fn jacobi_derivative(x: f64, alpha: u32, beta: u32, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    (nf * (nf + alpha as f64 + beta as f64 + 1.0)).sqrt() * jacobi(x, alpha + 1, beta + 1, n - 1)
}

/// Classical (unnormalized) Legendre polynomial and its derivative.
fn legendre_with_derivative(x: f64, n: usize) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule with `n` points on [-1, 1], exact to degree `2n-1`.
/// Points ascending; the rule is symmetric about 0.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(z, n);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(z, n);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Legendre-Gauss-Lobatto points (`n+1` of them) on [-1, 1], ascending.
pub fn gauss_lobatto_points(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let mut x: Vec<f64> = (0..=n).map(|i| (PI * i as f64 / n as f64).cos()).collect();
    for _ in 0..200 {
        let mut delta: f64 = 0.0;
        for xi in x.iter_mut() {
            let (mut p0, mut p1) = (1.0, *xi);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * *xi * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let dx = (*xi * p1 - p0) / ((n as f64 + 1.0) * p1);
            *xi -= dx;
            delta = delta.max(dx.abs());
        }
        if delta < 1e-16 {
            break;
        }
    }
    x.reverse();
    x[0] = -1.0;
    x[n] = 1.0;
    x
}

/// Values of the Lagrange polynomials through `nodes` at `x`.
pub fn lagrange_values(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .fold(1.0, |acc, (_, &xm)| acc * (x - xm) / (nodes[j] - xm))
        })
        .collect()
}
