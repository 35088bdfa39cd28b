//! Reference-element tables: nodes, modal basis, mass and differentiation
//! matrices, cubature, and face operators. Physical-element operators follow
//! from these by the constant affine Jacobian.

pub mod basis;
pub mod nodes;
pub mod polynomials;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use alloc::vec::Vec;
pub use basis::{mode_indices, pkd_gradient_vandermonde, pkd_vandermonde};
pub use nodes::{interpolation_nodes, NodeSet, MAX_ORDER};
use polynomials::{gauss_legendre, lagrange_values};

/// Quadrature rule on the reference triangle or on the edge `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cubature<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
}

impl<P> Cubature<P> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Collapsed-coordinate Gauss-Legendre rule exact for total degree `degree`.
pub fn triangle_cubature(degree: usize) -> Cubature<[f64; 2]> {
    let na = (degree + 2) / 2;
    let nb = (degree + 3) / 2;
    let (xa, wa) = gauss_legendre(na);
    let (xb, wb) = gauss_legendre(nb);
    let mut points = Vec::with_capacity(na * nb);
    let mut weights = Vec::with_capacity(na * nb);
    for (b, wbj) in xb.iter().zip(&wb) {
        for (a, wai) in xa.iter().zip(&wa) {
            points.push([0.5 * (1.0 + a) * (1.0 - b) - 1.0, *b]);
            weights.push(wai * wbj * 0.5 * (1.0 - b));
        }
    }
    Cubature { points, weights }
}

/// Gauss-Legendre rule on `[-1, 1]` exact for degree `degree`.
pub fn edge_cubature(degree: usize) -> Cubature<f64> {
    let (points, weights) = gauss_legendre(degree / 2 + 1);
    Cubature { points, weights }
}

/// Point on local face `f` at edge parameter `t` (counter-clockwise).
pub fn face_point(f: usize, t: f64) -> [f64; 2] {
    match f {
        0 => [t, -1.0],
        1 => [-t, t],
        _ => [-1.0, -t],
    }
}

/// Reference length of local face `f`.
pub fn face_reference_length(f: usize) -> f64 {
    if f == 1 {
        2.0 * core::f64::consts::SQRT_2
    } else {
        2.0
    }
}

/// Tables for one local face, evaluated at the face quadrature points.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceTables {
    /// Face-node value -> quadrature-point value (`n_q x (p+1)`).
    pub interp: Matrix,
    /// Derivatives of the element nodal basis at the quadrature points
    /// (`n_q x N_p`).
    pub dr: Matrix,
    pub ds: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTables {
    pub p: usize,
    pub p_f: usize,
    pub nodes: NodeSet,
    pub v: Matrix,
    pub mass: Matrix,
    pub mass_inv: Matrix,
    /// Nodal differentiation along the reference coordinates; physical
    /// derivatives follow by the chain rule with the element's affine map.
    pub dr: Matrix,
    pub ds: Matrix,
    pub cubature_volume: Cubature<[f64; 2]>,
    /// Nodal values -> cubature-point values.
    pub cub_interp: Matrix,
    /// Derivatives of the nodal basis at the cubature points (`n_q x N_p`),
    /// used to apply the weak stiffness operator to nonlinear fluxes.
    pub cub_dr: Matrix,
    pub cub_ds: Matrix,
    pub cubature_face: Cubature<f64>,
    pub faces: [FaceTables; 3],
    /// Mass matrix of the face Lagrange basis on `[-1, 1]`.
    pub mass_face: Matrix,
}

impl OperatorTables {
    pub fn np(&self) -> usize {
        self.nodes.len()
    }

    pub fn nfp(&self) -> usize {
        self.p + 1
    }

    /// Face extraction map as a dense `N_p x (p+1)` selection matrix.
    pub fn extraction(&self, f: usize) -> Matrix {
        let idx = &self.nodes.face_index[f];
        Matrix::from_fn(
            self.np(),
            self.nfp(),
            |n, k| if idx[k] == n { 1.0 } else { 0.0 },
        )
    }

    /// Interpolation matrix from nodal values to arbitrary reference points.
    pub fn interpolation_matrix(&self, points: &[[f64; 2]]) -> Matrix {
        interpolation_matrix(self.p, &self.v_inv(), points)
    }

    /// Nodal basis values at one reference point.
    pub fn basis_at(&self, point: [f64; 2]) -> Vec<f64> {
        self.interpolation_matrix(&[point]).row(0).to_vec()
    }

    fn v_inv(&self) -> Matrix {
        self.v.inverse().expect("Vandermonde matrix is nonsingular")
    }
}

fn interpolation_matrix(p: usize, v_inv: &Matrix, points: &[[f64; 2]]) -> Matrix {
    pkd_vandermonde(p, points).matmul(v_inv)
}

pub fn build_tables(p: usize, p_f: usize) -> Result<OperatorTables> {
    let nodes = interpolation_nodes(p)?;
    if p_f < 2 * p {
        return Err(Error::Overintegration { p, p_f });
    }
    let v = pkd_vandermonde(p, &nodes.points);
    let v_inv = v.inverse().expect("Vandermonde matrix is nonsingular");
    let mass_inv = v.matmul(&v.transpose());
    let mass = mass_inv.inverse().expect("mass matrix is nonsingular");
    let (vr, vs) = pkd_gradient_vandermonde(p, &nodes.points);
    let dr = vr.matmul(&v_inv);
    let ds = vs.matmul(&v_inv);

    let cubature_volume = triangle_cubature(p_f);
    let cub_interp = interpolation_matrix(p, &v_inv, &cubature_volume.points);
    let (cvr, cvs) = pkd_gradient_vandermonde(p, &cubature_volume.points);
    let cub_dr = cvr.matmul(&v_inv);
    let cub_ds = cvs.matmul(&v_inv);

    let cubature_face = edge_cubature(p_f);
    let face = |f: usize| {
        let t: Vec<f64> = nodes.face_index[f]
            .iter()
            .map(|&n| nodes.face_parameter(f, n))
            .collect();
        let interp = Matrix::from_fn(cubature_face.len(), p + 1, |q, k| {
            lagrange_values(&t, cubature_face.points[q])[k]
        });
        let pts: Vec<[f64; 2]> = cubature_face
            .points
            .iter()
            .map(|&tq| face_point(f, tq))
            .collect();
        let (gr, gs) = pkd_gradient_vandermonde(p, &pts);
        FaceTables {
            interp,
            dr: gr.matmul(&v_inv),
            ds: gs.matmul(&v_inv),
        }
    };
    let faces = [face(0), face(1), face(2)];

    let t0: Vec<f64> = nodes.face_index[0]
        .iter()
        .map(|&n| nodes.face_parameter(0, n))
        .collect();
    let gl = edge_cubature(2 * p);
    let mut mass_face = Matrix::zeros(p + 1, p + 1);
    for (x, w) in gl.points.iter().zip(&gl.weights) {
        let l = lagrange_values(&t0, *x);
        for a in 0..=p {
            for b in 0..=p {
                mass_face[(a, b)] += w * l[a] * l[b];
            }
        }
    }

    Ok(OperatorTables {
        p,
        p_f,
        nodes,
        v,
        mass,
        mass_inv,
        dr,
        ds,
        cubature_volume,
        cub_interp,
        cub_dr,
        cub_ds,
        cubature_face,
        faces,
        mass_face,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubature_counts_and_area() {
        for deg in 0..12 {
            let c = triangle_cubature(deg);
            let area: f64 = c.weights.iter().sum();
            assert!((area - 2.0).abs() < 1e-13);
            let e = edge_cubature(deg);
            assert!(2 * e.len() > deg);
        }
    }

    #[test]
    fn overintegration_guard() {
        assert_eq!(
            build_tables(3, 5),
            Err(Error::Overintegration { p: 3, p_f: 5 })
        );
    }
}
