//! Interior-penalty parameter and explicit time-step estimators.
//!
//! `sigma_e = C_1 (1+theta)^2 (d+1) Gbar_e max C_inv` with the trace inverse
//! constant `C_inv(e, K, p) = (p+1)(p+d)|e| / (d|K|)`. Two bounds for the
//! spectrum of the semi-discrete operator are provided: the Rayleigh-quotient
//! bound `Lambda` and the operator-norm bound `Lambda~`.

use crate::error::{Error, Result, Site};
use crate::linalg::{sym3_max_eigenvalue, symmetric_eigenvalues, Matrix};
use crate::mesh::{Mesh, Neighbor};
use crate::physics::{diffusion_tensor, normal_diffusion, primitive, GasParams, Mat4};
use crate::refelem::{mode_indices, triangle_cubature};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when num-traits is built with `std`
use num_traits::Float;

/// Spatial dimension.
pub const DIM: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    /// Interior-penalty variant: 1 symmetric, 0 incomplete, -1 non-symmetric.
    pub theta: f64,
    pub c1: f64,
    pub c_cfl: f64,
    /// Gradient inverse-estimate constant; computed from the reference
    /// element when `None`.
    pub c_grad: Option<f64>,
    /// Step used when the estimator reports no dynamics.
    pub dt_max: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            theta: 0.0,
            c1: 0.01,
            c_cfl: 0.8,
            c_grad: None,
            dt_max: 1.0,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParameter("theta must lie in [-1, 1]"));
        }
        if !(self.c1 >= 0.0) {
            return Err(Error::InvalidParameter("C_1 must be non-negative"));
        }
        if !(self.c_cfl > 0.0 && self.dt_max > 0.0) {
            return Err(Error::InvalidParameter("C_CFL and dt_max must be positive"));
        }
        Ok(())
    }
}

pub fn trace_inverse_constant(edge_length: f64, area: f64, p: usize) -> f64 {
    let p = p as f64;
    (p + 1.0) * (p + DIM) * edge_length / (DIM * area)
}

/// `max_{e in dK} C_inv(e, K, p)`.
pub fn element_trace_constant(mesh: &Mesh, k: usize, p: usize) -> f64 {
    let longest = mesh.element_faces[k]
        .iter()
        .map(|&f| mesh.faces[f].length)
        .fold(0.0, f64::max);
    trace_inverse_constant(longest, mesh.geometry[k].area, p)
}

/// Spectral norm of `A = sum_ij n_i n_j G_ij`. The first row of `A` is zero,
/// so `|A|_2^2` is the largest eigenvalue of the 3x3 Gram matrix of rows 2-4.
pub fn normal_diffusion_norm(a: &Mat4) -> f64 {
    let gram: [[f64; 3]; 3] = core::array::from_fn(|i| {
        core::array::from_fn(|j| (0..4).map(|c| a[i + 1][c] * a[j + 1][c]).sum())
    });
    sym3_max_eigenvalue(&gram).max(0.0).sqrt()
}

/// `Gbar_e` contribution of one trace state.
pub fn gbar_state(u: &[f64; 4], n: [f64; 2], gas: &GasParams) -> f64 {
    normal_diffusion_norm(&normal_diffusion(&diffusion_tensor(u, gas), n))
}

/// `C_1 (1+theta)^2 (d+1) Gbar_e C_inv`.
pub fn penalty_sigma(c1: f64, theta: f64, gbar: f64, c_inv_max: f64) -> f64 {
    c1 * (1.0 + theta).powi(2) * (DIM + 1.0) * gbar * c_inv_max
}

/// `sigma_e` for face `face` from the already reduced `Gbar_e`.
pub fn face_sigma(mesh: &Mesh, face: usize, p: usize, gbar: f64, cfg: &PenaltyConfig) -> f64 {
    let f = &mesh.faces[face];
    let mut c_inv = trace_inverse_constant(f.length, mesh.geometry[f.left].area, p);
    if let Neighbor::Element { elem, .. } = f.right {
        c_inv = c_inv.max(trace_inverse_constant(
            f.length,
            mesh.geometry[elem].area,
            p,
        ));
    }
    penalty_sigma(cfg.c1, cfg.theta, gbar, c_inv)
}

/// Inradius of the reference triangle.
pub const REFERENCE_INRADIUS: f64 = 2.0 - core::f64::consts::SQRT_2;

/// `C_grad` such that `|grad q|^2 <= C_grad p^4 rho^-2 |q|^2` is sharp on the
/// reference triangle: the largest eigenvalue of the modal stiffness matrix
/// (the modal mass matrix is the identity), rescaled.
pub fn gradient_inverse_constant(p: usize) -> f64 {
    let modes = mode_indices(p);
    let cub = triangle_cubature(2 * p);
    let grads: Vec<Vec<(f64, f64)>> = cub
        .points
        .iter()
        .map(|&[r, s]| {
            modes
                .iter()
                .map(|&(i, j)| crate::refelem::basis::mode_gradient(i, j, r, s))
                .collect()
        })
        .collect();
    let stiff = Matrix::from_fn(modes.len(), modes.len(), |a, b| {
        (0..cub.len())
            .map(|q| {
                cub.weights[q] * (grads[q][a].0 * grads[q][b].0 + grads[q][a].1 * grads[q][b].1)
            })
            .sum()
    });
    let lmax = symmetric_eigenvalues(&stiff).last().copied().unwrap_or(0.0);
    lmax * REFERENCE_INRADIUS * REFERENCE_INRADIUS / (p as f64).powi(4)
}

pub fn inverse_constant_2(c_grad: f64, p: usize, inradius: f64) -> f64 {
    c_grad * (p as f64).powi(4) / (inradius * inradius)
}

/// Per-element ingredients of both estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementBounds {
    pub beta: f64,
    pub beta_prime: f64,
    /// `G_K`: max of `|G|` over `K` and its face neighbours.
    pub g: f64,
    /// `G~_K`: max of `G_K'` over `K` and its face neighbours.
    pub g_tilde: f64,
    pub sigma: f64,
    pub c_inv: f64,
    pub c_inv2: f64,
}

impl ElementBounds {
    /// Term of the Rayleigh bound.
    pub fn rayleigh(&self) -> f64 {
        1.5 * self.c_inv2 * self.g
            + (DIM + 1.0) * self.c_inv * (3.0 * self.sigma + self.beta)
            + self.beta_prime
    }

    pub fn lambda_a(&self) -> f64 {
        ((self.c_inv2.sqrt() + (DIM + 1.0) * self.c_inv) * self.beta + self.beta_prime).powi(2)
    }

    /// Diffusive term of `Lambda~`; zero for inviscid flow.
    pub fn lambda_d(&self, c1: f64, mu: f64, element: usize) -> Result<f64> {
        if mu == 0.0 {
            return Ok(0.0);
        }
        if !(self.sigma > 0.0) || !(c1 > 0.0) {
            return Err(Error::ZeroPenalty(element));
        }
        let (g, s, ci, ci2) = (self.g_tilde, self.sigma, self.c_inv, self.c_inv2);
        Ok(c1 * g * ci2 / (8.0 * s * ci) + g * g * ci2 * ci2 + 2.0 * g * s / c1 * ci * ci2)
    }
}

/// Frobenius norm of the 8x8 block matrix `[G11 G12; G21 G22]`, an upper
/// bound of its spectral norm.
pub fn diffusion_norm(u: &[f64; 4], gas: &GasParams) -> f64 {
    let g = diffusion_tensor(u, gas);
    g.iter()
        .flatten()
        .flat_map(|b| b.iter().flatten())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

fn neighbor_max(mesh: &Mesh, values: &[f64]) -> Vec<f64> {
    (0..mesh.num_elements())
        .map(|k| {
            mesh.element_faces[k].iter().fold(values[k], |m, &fid| {
                let f = &mesh.faces[fid];
                let other = match f.right {
                    Neighbor::Element { elem, .. } if f.left == k => Some(elem),
                    Neighbor::Element { .. } => Some(f.left),
                    Neighbor::Boundary(_) => None,
                };
                other.map_or(m, |o| m.max(values[o]))
            })
        })
        .collect()
}

/// Inputs for [`element_bounds`]: nodal states `[elem][node][var]`, nodal
/// broken gradients `[elem][node][d/dx 4, d/dy 4]`, and per-face penalties.
pub struct EstimatorInput<'a> {
    pub mesh: &'a Mesh,
    pub np: usize,
    pub p: usize,
    pub states: &'a [f64],
    pub gradients: &'a [f64],
    pub face_sigma: &'a [f64],
    pub v_w: [f64; 2],
    pub gas: &'a GasParams,
    pub c_grad: f64,
}

pub fn element_bounds(input: &EstimatorInput) -> Result<Vec<ElementBounds>> {
    let mesh = input.mesh;
    let ne = mesh.num_elements();
    if ne == 0 {
        return Err(Error::EmptyMesh);
    }
    let mut gnode = vec![0.0; ne];
    let mut beta = vec![0.0; ne];
    let mut beta_prime = vec![0.0; ne];
    for k in 0..ne {
        for n in 0..input.np {
            let i = k * input.np + n;
            let u: [f64; 4] = input.states[4 * i..4 * i + 4].try_into().unwrap();
            let q = primitive(
                &u,
                input.gas,
                Site::Node {
                    element: k,
                    node: n,
                },
            )?;
            let c = q.sound_speed(input.gas);
            let b = ((q.v[0] - input.v_w[0]).abs()).max((q.v[1] - input.v_w[1]).abs()) + c;
            beta[k] = f64::max(beta[k], b);
            let g = &input.gradients[8 * i..8 * i + 8];
            let div = (g[1] - q.v[0] * g[0]) / q.rho + (g[6] - q.v[1] * g[4]) / q.rho;
            beta_prime[k] = f64::max(beta_prime[k], 0.5 * div.abs());
            if input.gas.mu > 0.0 {
                gnode[k] = f64::max(gnode[k], diffusion_norm(&u, input.gas));
            }
        }
    }
    let g_k = neighbor_max(mesh, &gnode);
    let g_tilde = neighbor_max(mesh, &g_k);
    Ok((0..ne)
        .map(|k| ElementBounds {
            beta: beta[k],
            beta_prime: beta_prime[k],
            g: g_k[k],
            g_tilde: g_tilde[k],
            sigma: mesh.element_faces[k]
                .iter()
                .map(|&f| input.face_sigma[f])
                .fold(0.0, f64::max),
            c_inv: element_trace_constant(mesh, k, input.p),
            c_inv2: inverse_constant_2(input.c_grad, input.p, mesh.geometry[k].inradius),
        })
        .collect())
}

/// `Lambda = max_K (3/2 C_inv2 G_K + (d+1) C_inv (3 sigma_K + beta_K) + beta'_K)`.
pub fn lambda_rayleigh(bounds: &[ElementBounds]) -> Result<f64> {
    if bounds.is_empty() {
        return Err(Error::EmptyMesh);
    }
    Ok(bounds
        .iter()
        .map(ElementBounds::rayleigh)
        .fold(0.0, f64::max))
}

/// `Lambda~ = max_K sqrt(2 (Lambda_a,K + Lambda_d,K))`.
pub fn lambda_tilde(bounds: &[ElementBounds], c1: f64, mu: f64) -> Result<f64> {
    if bounds.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut worst: f64 = 0.0;
    for (k, b) in bounds.iter().enumerate() {
        worst = worst.max((2.0 * (b.lambda_a() + b.lambda_d(c1, mu, k)?)).sqrt());
    }
    Ok(worst)
}

pub fn timestep(lambda: f64, cfg: &PenaltyConfig) -> f64 {
    if lambda > 0.0 {
        cfg.c_cfl / lambda
    } else {
        cfg.dt_max
    }
}
