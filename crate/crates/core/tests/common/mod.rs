#![allow(dead_code)]

use dgviv_core::mesh::{BoundaryTag, Mesh};

/// Annulus `r0 < r < r1` with `nt` cells around and `nr` geometrically
/// graded rings: wall inside, far field outside.
pub fn annulus(nt: usize, nr: usize, r0: f64, r1: f64) -> Mesh {
    let ratio = (r1 / r0).powf(1.0 / nr as f64);
    let mut v = Vec::new();
    for j in 0..=nr {
        let r = r0 * ratio.powi(j as i32);
        for i in 0..nt {
            let a = std::f64::consts::TAU * i as f64 / nt as f64;
            v.push([r * a.cos(), r * a.sin()]);
        }
    }
    let id = |i: usize, j: usize| j * nt + i % nt;
    let mut t = Vec::new();
    for j in 0..nr {
        for i in 0..nt {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                t.push([a, b, c]);
                t.push([a, c, d]);
            } else {
                t.push([a, b, d]);
                t.push([b, c, d]);
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..nt {
        edges.push(([id(i, 0), id(i + 1, 0)], BoundaryTag::Wall));
        edges.push(([id(i, nr), id(i + 1, nr)], BoundaryTag::Farfield));
    }
    Mesh::new(v, t, &edges).unwrap()
}
