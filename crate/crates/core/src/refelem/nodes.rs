//! Alpha-optimized warp-and-blend interpolation nodes.

use super::polynomials::{gauss_lobatto_points, lagrange_values};
use crate::error::{Error, Result};
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // redundant when num-traits is built with `std`
use num_traits::Float;

pub const MAX_ORDER: usize = 9;

/// Blending exponents for orders 1..=10.
const ALPHA_OPT: [f64; 10] = [
    0.0, 0.0, 1.4152, 0.1001, 0.2751, 0.98, 1.0999, 1.2832, 1.3648, 1.4773,
];

/// Interpolation nodes of order `p` on the reference triangle.
///
/// Node `n` sits at lattice position `lattice[n] = (i, j)` with `i + j <= p`,
/// close to `(-1 + 2i/p, -1 + 2j/p)`. Faces run counter-clockwise:
/// face 0 from (-1,-1) to (1,-1), face 1 from (1,-1) to (-1,1), face 2 from
/// (-1,1) back to (-1,-1); `face_index[f]` lists the face's nodes in that
/// direction.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub p: usize,
    pub points: Vec<[f64; 2]>,
    pub lattice: Vec<(usize, usize)>,
    pub face_index: [Vec<usize>; 3],
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Position of node `n` along its face `f`, in [-1, 1] counter-clockwise.
    pub fn face_parameter(&self, f: usize, n: usize) -> f64 {
        let [r, s] = self.points[n];
        match f {
            0 => r,
            1 => s,
            _ => -s,
        }
    }

    /// Index of the node at lattice position `(i, j)`.
    pub fn lattice_node(&self, i: usize, j: usize) -> usize {
        lattice_offset(self.p, i, j)
    }

    /// Sub-triangles of the nodal lattice (`p^2` of them), counter-clockwise.
    pub fn sub_triangles(&self) -> Vec<[usize; 3]> {
        let p = self.p;
        let mut tris = Vec::with_capacity(p * p);
        for j in 0..p {
            for i in 0..p - j {
                tris.push([
                    self.lattice_node(i, j),
                    self.lattice_node(i + 1, j),
                    self.lattice_node(i, j + 1),
                ]);
                if i + j + 2 <= p {
                    tris.push([
                        self.lattice_node(i + 1, j),
                        self.lattice_node(i + 1, j + 1),
                        self.lattice_node(i, j + 1),
                    ]);
                }
            }
        }
        tris
    }
}

fn lattice_offset(p: usize, i: usize, j: usize) -> usize {
    // rows j' < j hold p+1-j' nodes each
    j * (p + 1) - j * (j.saturating_sub(1)) / 2 + i
}

/// One-dimensional warp: displacement from equispaced to Lobatto points,
/// interpolated at `r` and divided by the edge blend `1 - r^2`.
fn warp_factor(p: usize, r: f64) -> f64 {
    let lgl = gauss_lobatto_points(p);
    let equi: Vec<f64> = (0..=p).map(|i| -1.0 + 2.0 * i as f64 / p as f64).collect();
    let l = lagrange_values(&equi, r);
    let warp: f64 = l
        .iter()
        .zip(lgl.iter().zip(&equi))
        .map(|(li, (g, e))| li * (g - e))
        .sum();
    if r.abs() < 1.0 - 1e-10 {
        warp / (1.0 - r * r)
    } else {
        0.0
    }
}

pub fn interpolation_nodes(p: usize) -> Result<NodeSet> {
    if !(1..=MAX_ORDER).contains(&p) {
        return Err(Error::UnsupportedOrder(p));
    }
    let alpha = ALPHA_OPT[p - 1];
    let pf = p as f64;
    let sqrt3 = 3f64.sqrt();
    let mut points = Vec::new();
    let mut lattice = Vec::new();
    for j in 0..=p {
        for i in 0..=p - j {
            let l1 = j as f64 / pf;
            let l3 = i as f64 / pf;
            let l2 = 1.0 - l1 - l3;
            let mut x = -l2 + l3;
            let mut y = (-l2 - l3 + 2.0 * l1) / sqrt3;
            let blend1 = 4.0 * l2 * l3;
            let blend2 = 4.0 * l1 * l3;
            let blend3 = 4.0 * l1 * l2;
            let warp1 = blend1 * warp_factor(p, l3 - l2) * (1.0 + (alpha * l1).powi(2));
            let warp2 = blend2 * warp_factor(p, l1 - l3) * (1.0 + (alpha * l2).powi(2));
            let warp3 = blend3 * warp_factor(p, l2 - l1) * (1.0 + (alpha * l3).powi(2));
            x += warp1 + (2.0 * PI / 3.0).cos() * warp2 + (4.0 * PI / 3.0).cos() * warp3;
            y += (2.0 * PI / 3.0).sin() * warp2 + (4.0 * PI / 3.0).sin() * warp3;
            // equilateral -> reference triangle
            let m1 = (sqrt3 * y + 1.0) / 3.0;
            let m2 = (-3.0 * x - sqrt3 * y + 2.0) / 6.0;
            let m3 = (3.0 * x - sqrt3 * y + 2.0) / 6.0;
            let mut r = -m2 + m3 - m1;
            let mut s = -m2 - m3 + m1;
            // snap edge nodes exactly onto their edges
            if j == 0 {
                s = -1.0;
            }
            if i == 0 {
                r = -1.0;
            }
            if i + j == p {
                s = -r;
            }
            if (i, j) == (0, 0) {
                r = -1.0;
                s = -1.0;
            }
            if (i, j) == (p, 0) {
                r = 1.0;
                s = -1.0;
            }
            if (i, j) == (0, p) {
                r = -1.0;
                s = 1.0;
            }
            points.push([r, s]);
            lattice.push((i, j));
        }
    }
    let face0 = (0..=p).map(|i| lattice_offset(p, i, 0)).collect();
    let face1 = (0..=p).map(|j| lattice_offset(p, p - j, j)).collect();
    let face2 = (0..=p).rev().map(|j| lattice_offset(p, 0, j)).collect();
    Ok(NodeSet {
        p,
        points,
        lattice,
        face_index: [face0, face1, face2],
    })
}
