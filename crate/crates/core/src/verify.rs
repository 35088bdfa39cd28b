//! Verification and post-processing: the manufactured solution, error norms
//! and convergence rates, aerodynamic forces on wall boundaries, vorticity,
//! and line sampling.

use crate::dg::{StateField, NVAR};
use crate::error::{Error, Result, Site};
use crate::mesh::{BoundaryTag, Mesh, Neighbor};
use crate::physics::{primitive, Cons, GasParams, Prim};
use crate::refelem::{face_point, triangle_cubature, OperatorTables};
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when num-traits is built with `std`
use num_traits::Float;

/// Steady manufactured solution `U = [s, s, s, s^2]` with
/// `s = sin(kappa (x + y)) + C_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub kappa: f64,
    pub c2: f64,
    pub gas: GasParams,
}

impl ManufacturedCase {
    pub fn validate(&self) -> Result<()> {
        if !(self.c2 > 1.0) {
            return Err(Error::InvalidParameter(
                "C_2 must exceed 1 for a positive pressure",
            ));
        }
        self.gas.validate()
    }

    pub fn state(&self, x: [f64; 2]) -> Cons {
        let s = (self.kappa * (x[0] + x[1])).sin() + self.c2;
        [s, s, s, s * s]
    }

    /// Source `S = div(F_c - F_v)` of the exact state. With velocity
    /// `(1, 1)` the stress vanishes and only heat conduction is viscous.
    pub fn source(&self, x: [f64; 2]) -> Cons {
        let (k, c2) = (self.kappa, self.c2);
        let g = self.gas.gamma;
        let g1 = g - 1.0;
        let phi = k * (x[0] + x[1]);
        let (sn, cs) = phi.sin_cos();
        let s2 = (2.0 * phi).sin();
        let m = k * g1 * s2 + (2.0 * k - k * g1 + 2.0 * k * c2 * g1) * cs;
        [
            2.0 * k * cs,
            m,
            m,
            2.0 * k * g * s2
                + (4.0 * k * g * c2 - 2.0 * k * g1) * cs
                + 2.0 * g * self.gas.mu * k * k / self.gas.prandtl * sn,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub linf: f64,
}

/// `L2` error (all four components, cubature exact to `degree`) and the
/// `L_inf` error over an equispaced lattice of order `lattice` per element.
pub fn error_norms(
    field: &StateField,
    mesh: &Mesh,
    tables: &OperatorTables,
    degree: usize,
    lattice: usize,
    exact: impl Fn([f64; 2]) -> Cons,
) -> ErrorNorms {
    let cub = triangle_cubature(degree);
    let at_cub = tables.interpolation_matrix(&cub.points);
    let n = lattice.max(1);
    let mut samples = Vec::new();
    for j in 0..=n {
        for i in 0..=n - j {
            samples.push([
                -1.0 + 2.0 * i as f64 / n as f64,
                -1.0 + 2.0 * j as f64 / n as f64,
            ]);
        }
    }
    let at_samples = tables.interpolation_matrix(&samples);
    let mut l2 = 0.0;
    let mut linf: f64 = 0.0;
    for k in 0..mesh.num_elements() {
        let u = field.element(k);
        let det = mesh.geometry[k].det;
        for (q, &rs) in cub.points.iter().enumerate() {
            let uh = interpolate(at_cub.row(q), u);
            let ue = exact(mesh.map_point(k, rs));
            l2 += det * cub.weights[q] * (0..NVAR).map(|c| (uh[c] - ue[c]).powi(2)).sum::<f64>();
        }
        for (q, &rs) in samples.iter().enumerate() {
            let uh = interpolate(at_samples.row(q), u);
            let ue = exact(mesh.map_point(k, rs));
            linf = (0..NVAR).fold(linf, |m, c| m.max((uh[c] - ue[c]).abs()));
        }
    }
    ErrorNorms {
        l2: l2.sqrt(),
        linf,
    }
}

fn interpolate(row: &[f64], u: &[f64]) -> Cons {
    let mut out = [0.0; 4];
    for (m, &l) in row.iter().enumerate() {
        for c in 0..4 {
            out[c] += l * u[m * 4 + c];
        }
    }
    out
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_rate(errors: &[f64], h: &[f64]) -> Result<f64> {
    if errors.len() < 2 || errors.len() != h.len() || errors.iter().chain(h).any(|&v| !(v > 0.0)) {
        return Err(Error::RateSamples);
    }
    let n = errors.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::RateSamples);
    }
    Ok(sxy / sxx)
}

/// Normalization of the force coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceReference {
    pub rho: f64,
    pub velocity: [f64; 2],
    pub length: f64,
    /// Moment reference point.
    pub point: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Forces {
    pub fx: f64,
    pub fy: f64,
    pub mz: f64,
    pub lift: f64,
    pub drag: f64,
    pub cl: f64,
    pub cd: f64,
}

impl ForceReference {
    /// Resolves a force against the reference velocity: drag along it, lift
    /// along its counter-clockwise normal.
    pub fn resolve(&self, fx: f64, fy: f64, mz: f64) -> Forces {
        let [ux, uy] = self.velocity;
        let speed = (ux * ux + uy * uy).sqrt();
        let (dx, dy) = if speed > 0.0 {
            (ux / speed, uy / speed)
        } else {
            (1.0, 0.0)
        };
        let drag = fx * dx + fy * dy;
        let lift = -fx * dy + fy * dx;
        let q = 0.5 * self.rho * speed * speed * self.length;
        Forces {
            fx,
            fy,
            mz,
            lift,
            drag,
            cl: lift / q,
            cd: drag / q,
        }
    }
}

/// Traction `-p n + tau n` integrated over all wall faces, with `n` the unit
/// normal pointing from the body into the fluid. `gradients` is the nodal
/// broken gradient `[element][node][d/dx 4, d/dy 4]`.
pub fn aero_forces(
    field: &StateField,
    gradients: &[f64],
    mesh: &Mesh,
    tables: &OperatorTables,
    gas: &GasParams,
    reference: &ForceReference,
) -> Result<Forces> {
    let np = tables.np();
    let mut total = [0.0; 3];
    let mut any = false;
    for (fid, face) in mesh.faces.iter().enumerate() {
        if face.right != Neighbor::Boundary(BoundaryTag::Wall) {
            continue;
        }
        any = true;
        let (k, lf) = (face.left, face.left_face);
        let idx = &tables.nodes.face_index[lf];
        let fdata = &tables.faces[lf];
        let n = [-face.normal[0], -face.normal[1]];
        let u = field.element(k);
        let g = &gradients[k * np * 8..(k + 1) * np * 8];
        let mut part = [0.0; 3];
        for (q, &t) in tables.cubature_face.points.iter().enumerate() {
            let row = fdata.interp.row(q);
            let mut uq = [0.0; 4];
            let mut gq = [0.0; 8];
            for (kk, &l) in row.iter().enumerate() {
                let m = idx[kk];
                for c in 0..4 {
                    uq[c] += l * u[m * 4 + c];
                }
                for c in 0..8 {
                    gq[c] += l * g[m * 8 + c];
                }
            }
            let prim = primitive(
                &uq,
                gas,
                Site::Face {
                    face: fid,
                    point: q,
                },
            )?;
            let tau = stress(&prim, &gq, gas.mu);
            let tx = -prim.p * n[0] + tau[0][0] * n[0] + tau[0][1] * n[1];
            let ty = -prim.p * n[1] + tau[1][0] * n[0] + tau[1][1] * n[1];
            let x = mesh.map_point(k, face_point(lf, t));
            let r = [x[0] - reference.point[0], x[1] - reference.point[1]];
            let w = 0.5 * face.length * tables.cubature_face.weights[q];
            part[0] += w * tx;
            part[1] += w * ty;
            part[2] += w * (r[0] * ty - r[1] * tx);
        }
        for i in 0..3 {
            total[i] += part[i];
        }
    }
    if !any {
        return Err(Error::NoWall);
    }
    Ok(reference.resolve(total[0], total[1], total[2]))
}

/// Velocity gradient `[[du/dx, du/dy], [dv/dx, dv/dy]]` from conservative
/// gradients.
pub fn velocity_gradient(q: &Prim, g: &[f64; 8]) -> [[f64; 2]; 2] {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| (g[4 * j + 1 + i] - q.v[i] * g[4 * j]) / q.rho)
    })
}

/// Newtonian stress `mu (grad v + grad v^T - 2/3 div v I)`.
pub fn stress(q: &Prim, g: &[f64; 8], mu: f64) -> [[f64; 2]; 2] {
    let dv = velocity_gradient(q, g);
    let div = dv[0][0] + dv[1][1];
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let iso = if i == j { 2.0 / 3.0 * div } else { 0.0 };
            mu * (dv[i][j] + dv[j][i] - iso)
        })
    })
}

/// Nodal vorticity `dv/dx - du/dy`, laid out like the nodes of `field`.
pub fn vorticity(field: &StateField, gradients: &[f64], gas: &GasParams) -> Result<Vec<f64>> {
    let np = field.np;
    let mut out = Vec::with_capacity(field.num_elements() * np);
    for k in 0..field.num_elements() {
        for n in 0..np {
            let q = primitive(
                &field.node(k, n),
                gas,
                Site::Node {
                    element: k,
                    node: n,
                },
            )?;
            let i = (k * np + n) * 8;
            let g: [f64; 8] = gradients[i..i + 8].try_into().unwrap();
            let dv = velocity_gradient(&q, &g);
            out.push(dv[1][0] - dv[0][1]);
        }
    }
    Ok(out)
}

/// Samples a nodal scalar at `n >= 2` equispaced points from `a` to `b`.
pub fn sample_line(
    values: &[f64],
    mesh: &Mesh,
    tables: &OperatorTables,
    a: [f64; 2],
    b: [f64; 2],
    n: usize,
) -> Result<Vec<([f64; 2], f64)>> {
    let np = tables.np();
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let (k, rs) = mesh
                .locate(x, 1e-10)
                .ok_or(Error::OutsideMesh(x[0], x[1]))?;
            let l = tables.basis_at(rs);
            Ok((
                x,
                l.iter()
                    .zip(&values[k * np..(k + 1) * np])
                    .map(|(a, b)| a * b)
                    .sum(),
            ))
        })
        .collect()
}
