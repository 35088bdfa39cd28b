//! Semi-discrete residual of the nodal interior-penalty DG discretization.
//!
//! For every element `K` and test function `l_n` the weak residual is
//!
//! ```text
//! R_n = int_K F . grad l_n  -  sum_e int_e H_m l_n  +  theta_e int_e (G grad l_n) . n [[U]]
//! ```
//!
//! with `F = F_c - v_w U - G grad U` and the face flux
//! `H_m = H_roe - {G grad U} . n + sigma_e [[U]]`. The symmetrization term
//! carries weight `theta / 2` on interior faces (face average) and `theta` on
//! boundary faces. The state evolves as `M_K dU/dt = R_K`.
//!
//! Evaluation runs in three phases: per element (broken gradient and volume
//! term), per face (traces, penalty, fluxes), and a per-element gather in
//! fixed local-face order. Every output value is produced by a fixed
//! sequence of floating-point operations, so results do not depend on the
//! number of worker threads.

use crate::error::{Error, Result, Site};
use crate::mesh::{BoundaryTag, Mesh, Neighbor};
use crate::penalty::{face_sigma, gbar_state, normal_diffusion_norm, PenaltyConfig};
use crate::physics::{
    advective_flux, diffusion_tensor, normal_diffusion, normal_flux, primitive, roe_flux_prim,
    symmetrization_lift, viscous_flux, viscous_flux_direct, wall_ghost, Cons, GasParams, Mat4,
    Pair, Prim,
};
use crate::refelem::OperatorTables;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub const NVAR: usize = 4;

/// Nodal conservative values, laid out `[element][node][variable]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub np: usize,
    pub data: Vec<f64>,
}

impl StateField {
    pub fn zeros(num_elements: usize, np: usize) -> Self {
        StateField {
            np,
            data: vec![0.0; num_elements * np * NVAR],
        }
    }

    pub fn uniform(num_elements: usize, np: usize, u: Cons) -> Self {
        let mut data = Vec::with_capacity(num_elements * np * NVAR);
        for _ in 0..num_elements * np {
            data.extend_from_slice(&u);
        }
        StateField { np, data }
    }

    /// Nodal interpolant of `f`.
    pub fn from_fn(mesh: &Mesh, tables: &OperatorTables, f: impl Fn([f64; 2]) -> Cons) -> Self {
        let np = tables.np();
        let mut data = Vec::with_capacity(mesh.num_elements() * np * NVAR);
        for k in 0..mesh.num_elements() {
            for &rs in &tables.nodes.points {
                data.extend_from_slice(&f(mesh.map_point(k, rs)));
            }
        }
        StateField { np, data }
    }

    pub fn num_elements(&self) -> usize {
        self.data.len() / (self.np * NVAR)
    }

    pub fn element(&self, k: usize) -> &[f64] {
        let w = self.np * NVAR;
        &self.data[k * w..(k + 1) * w]
    }

    pub fn node(&self, k: usize, n: usize) -> Cons {
        let i = (k * self.np + n) * NVAR;
        [
            self.data[i],
            self.data[i + 1],
            self.data[i + 2],
            self.data[i + 3],
        ]
    }

    /// Checks density and pressure at every node.
    pub fn check(&self, gas: &GasParams) -> Result<()> {
        for k in 0..self.num_elements() {
            for n in 0..self.np {
                primitive(
                    &self.node(k, n),
                    gas,
                    Site::Node {
                        element: k,
                        node: n,
                    },
                )?;
            }
        }
        Ok(())
    }
}

impl AsRef<[f64]> for StateField {
    fn as_ref(&self) -> &[f64] {
        &self.data
    }
}

impl AsMut<[f64]> for StateField {
    fn as_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// External state on far-field faces.
#[derive(Clone)]
pub enum Farfield {
    Uniform(Prim),
    /// Conservative state as a function of position and time.
    Function(Arc<dyn Fn([f64; 2], f64) -> Cons + Send + Sync>),
}

impl fmt::Debug for Farfield {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Farfield::Uniform(q) => f.debug_tuple("Uniform").field(q).finish(),
            Farfield::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Which parts of the weak residual to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub volume: bool,
    pub interior: bool,
    pub boundary: bool,
}

impl Terms {
    pub const ALL: Terms = Terms {
        volume: true,
        interior: true,
        boundary: true,
    };
}

#[derive(Debug, Clone)]
pub struct DgOperator {
    pub tables: OperatorTables,
    pub gas: GasParams,
    pub penalty: PenaltyConfig,
    pub farfield: Farfield,
    /// Weak-form load `int_K S l_n`, laid out like [`StateField::data`].
    pub source: Option<Vec<f64>>,
    /// Fixed diffusion tensor used instead of `G(U)` (frozen-coefficient
    /// linearization).
    pub frozen_diffusion: Option<[[Mat4; 2]; 2]>,
    /// Include advective fluxes (volume and Roe face flux).
    pub advection: bool,
}

/// Buffers reused across residual evaluations.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    /// Nodal broken gradients `[element][node][dU/dx (4), dU/dy (4)]`.
    pub gradients: Vec<f64>,
    /// Per-face `Gbar_e` and `sigma_e` from the last evaluation.
    pub gbar: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Reuse `sigma` from the previous evaluation instead of recomputing.
    pub sigma_frozen: bool,
    faces: Vec<f64>,
    weak: Vec<f64>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Per-thread scratch.
struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl Scratch {
    fn new(len: usize) -> Self {
        Scratch {
            a: vec![0.0; len],
            b: vec![0.0; len],
            c: vec![0.0; len],
            d: vec![0.0; len],
        }
    }
}

/// Runs `f(index, chunk_a, chunk_b)` over matching chunks of two buffers and
/// returns the error of the lowest failing index.
fn for_each_chunk<F>(
    a: &mut [f64],
    wa: usize,
    b: &mut [f64],
    wb: usize,
    scratch_len: usize,
    f: F,
) -> Result<()>
where
    F: Fn(usize, &mut [f64], &mut [f64], &mut Scratch) -> Result<()> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let first = a
            .par_chunks_mut(wa)
            .zip(b.par_chunks_mut(wb))
            .enumerate()
            .map_init(
                || Scratch::new(scratch_len),
                |s, (i, (ca, cb))| f(i, ca, cb, s).err().map(|e| (i, e)),
            )
            .filter_map(|x| x)
            .min_by_key(|(i, _)| *i);
        match first {
            Some((_, e)) => Err(e),
            None => Ok(()),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut s = Scratch::new(scratch_len);
        for (i, (ca, cb)) in a.chunks_mut(wa).zip(b.chunks_mut(wb)).enumerate() {
            f(i, ca, cb, &mut s)?;
        }
        Ok(())
    }
}

/// Nodal broken gradient of one element: `grad[n*8 + j*4 + c]`.
fn element_gradient(tables: &OperatorTables, mesh: &Mesh, k: usize, u: &[f64], grad: &mut [f64]) {
    let np = tables.np();
    let inv = mesh.geometry[k].inverse;
    for n in 0..np {
        let (dr_row, ds_row) = (tables.dr.row(n), tables.ds.row(n));
        let mut ur = [0.0; 4];
        let mut us = [0.0; 4];
        for m in 0..np {
            let (a, b) = (dr_row[m], ds_row[m]);
            for c in 0..4 {
                ur[c] += a * u[m * 4 + c];
                us[c] += b * u[m * 4 + c];
            }
        }
        let g = &mut grad[n * 8..n * 8 + 8];
        for c in 0..4 {
            g[c] = inv[0][0] * ur[c] + inv[1][0] * us[c];
            g[4 + c] = inv[0][1] * ur[c] + inv[1][1] * us[c];
        }
    }
}

/// Broken gradient of every element, laid out `[element][node][8]`.
pub fn broken_gradient(field: &StateField, mesh: &Mesh, tables: &OperatorTables) -> Vec<f64> {
    let np = tables.np();
    let mut out = vec![0.0; field.num_elements() * np * 8];
    for k in 0..field.num_elements() {
        element_gradient(
            tables,
            mesh,
            k,
            field.element(k),
            &mut out[k * np * 8..(k + 1) * np * 8],
        );
    }
    out
}

impl DgOperator {
    pub fn new(
        tables: OperatorTables,
        gas: GasParams,
        penalty: PenaltyConfig,
        farfield: Farfield,
    ) -> Self {
        DgOperator {
            tables,
            gas,
            penalty,
            farfield,
            source: None,
            frozen_diffusion: None,
            advection: true,
        }
    }

    fn diffusion(&self, u: &Cons) -> [[Mat4; 2]; 2] {
        match &self.frozen_diffusion {
            Some(g) => *g,
            None => diffusion_tensor(u, &self.gas),
        }
    }

    fn viscous(&self, u: &Cons, grad: &Pair) -> Pair {
        match &self.frozen_diffusion {
            Some(g) => viscous_flux(g, grad),
            None => viscous_flux_direct(u, grad, &self.gas),
        }
    }

    /// Ghost state of a boundary face.
    fn ghost(&self, tag: BoundaryTag, interior: &Prim, x: [f64; 2], t: f64, v_w: [f64; 2]) -> Cons {
        match tag {
            BoundaryTag::Wall => wall_ghost(interior, v_w, &self.gas),
            BoundaryTag::Farfield => match &self.farfield {
                Farfield::Uniform(q) => crate::physics::conservative(q, &self.gas),
                Farfield::Function(f) => f(x, t),
            },
        }
    }

    /// Projects a source term: `int_K S l_n` for every element and node,
    /// integrated with the given cubature tables.
    pub fn project_source(
        mesh: &Mesh,
        tables: &OperatorTables,
        quad: &OperatorTables,
        s: impl Fn([f64; 2]) -> Cons,
    ) -> Vec<f64> {
        let np = tables.np();
        let cub = &quad.cubature_volume;
        let basis = tables.interpolation_matrix(&cub.points);
        let mut out = vec![0.0; mesh.num_elements() * np * NVAR];
        for k in 0..mesh.num_elements() {
            let det = mesh.geometry[k].det;
            for (q, &rs) in cub.points.iter().enumerate() {
                let sv = s(mesh.map_point(k, rs));
                let w = det * cub.weights[q];
                for n in 0..np {
                    let l = w * basis[(q, n)];
                    for c in 0..4 {
                        out[(k * np + n) * 4 + c] += l * sv[c];
                    }
                }
            }
        }
        out
    }

    /// Weak residual (before the inverse mass matrix) restricted to `terms`.
    /// Leaves nodal gradients and face penalties in `ws`.
    pub fn assemble(
        &self,
        mesh: &Mesh,
        field: &StateField,
        t: f64,
        v_w: [f64; 2],
        terms: Terms,
        ws: &mut Workspace,
        weak: &mut [f64],
    ) -> Result<()> {
        let tb = &self.tables;
        let np = tb.np();
        let ne = mesh.num_elements();
        let nf = mesh.faces.len();
        if field.np != np || field.data.len() != ne * np * NVAR || weak.len() != field.data.len() {
            return Err(Error::Layout {
                expected: ne * np * NVAR,
                found: field.data.len().min(weak.len()),
            });
        }
        ws.gradients.resize(ne * np * 8, 0.0);
        if !ws.sigma_frozen || ws.sigma.len() != nf {
            ws.sigma_frozen = false;
        }
        let frozen_sigma = if ws.sigma_frozen {
            Some(core::mem::take(&mut ws.sigma))
        } else {
            None
        };
        let nq_vol = tb.cubature_volume.len();
        let scratch_len = (nq_vol * 12).max(np * 8).max(64);

        // Phase A: gradients and volume terms.
        let volume = terms.volume;
        for_each_chunk(
            &mut ws.gradients,
            np * 8,
            weak,
            np * NVAR,
            scratch_len,
            |k, grad, out, s| {
                let u = field.element(k);
                element_gradient(tb, mesh, k, u, grad);
                out.fill(0.0);
                if volume {
                    self.element_volume(mesh, k, u, grad, v_w, out, s)?;
                }
                Ok(())
            },
        )?;

        // Phase B: face fluxes.
        let fw = 2 * np * NVAR + 2;
        ws.faces.resize(nf * fw, 0.0);
        let grads = &ws.gradients;
        let frozen = frozen_sigma.as_deref();
        let mut unused = vec![0.0; nf];
        let face_scratch = (tb.nfp() * 12 + tb.cubature_face.len() * 24).max(64);
        for_each_chunk(
            &mut ws.faces,
            fw,
            &mut unused,
            1,
            face_scratch,
            |fid, out, _, s| {
                out.fill(0.0);
                let face = &mesh.faces[fid];
                let wanted = if face.is_boundary() {
                    terms.boundary
                } else {
                    terms.interior
                };
                if wanted {
                    self.face_terms(
                        mesh,
                        field,
                        grads,
                        fid,
                        t,
                        v_w,
                        frozen.map(|f| f[fid]),
                        out,
                        s,
                    )?;
                }
                Ok(())
            },
        )?;
        ws.gbar.resize(nf, 0.0);
        ws.sigma.resize(nf, 0.0);
        for fid in 0..nf {
            ws.gbar[fid] = ws.faces[fid * fw + fw - 2];
            ws.sigma[fid] = match &frozen_sigma {
                Some(s) => s[fid],
                None => ws.faces[fid * fw + fw - 1],
            };
        }

        // Phase C: gather in local-face order.
        let faces = &ws.faces;
        let mut unused = vec![0.0; ne];
        for_each_chunk(weak, np * NVAR, &mut unused, 1, 1, |k, out, _, _| {
            for (lf, &fid) in mesh.element_faces[k].iter().enumerate() {
                let face = &mesh.faces[fid];
                let side = usize::from(!(face.left == k && face.left_face == lf));
                let src = &faces[fid * fw + side * np * NVAR..fid * fw + (side + 1) * np * NVAR];
                for (o, v) in out.iter_mut().zip(src) {
                    *o += v;
                }
            }
            Ok(())
        })?;
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn element_volume(
        &self,
        mesh: &Mesh,
        k: usize,
        u: &[f64],
        grad: &[f64],
        v_w: [f64; 2],
        out: &mut [f64],
        s: &mut Scratch,
    ) -> Result<()> {
        let tb = &self.tables;
        let np = tb.np();
        let geo = &mesh.geometry[k];
        let [[rx, ry], [sx, sy]] = geo.inverse;
        let viscous = self.gas.mu > 0.0;
        let nq = tb.cubature_volume.len();
        // s.a: weighted reference fluxes at cubature points, [q][r-flux 4, s-flux 4]
        let fr = &mut s.a[..nq * 8];
        for q in 0..nq {
            let row = tb.cub_interp.row(q);
            let mut uq = [0.0; 4];
            for m in 0..np {
                for c in 0..4 {
                    uq[c] += row[m] * u[m * 4 + c];
                }
            }
            let site = Site::Cubature {
                element: k,
                point: q,
            };
            let mut flux: Pair = [[0.0; 4]; 2];
            if self.advection {
                let qp = primitive(&uq, &self.gas, site)?;
                flux = advective_flux(&uq, qp.p, v_w);
            } else if !(uq[0] > 0.0) {
                primitive(&uq, &self.gas, site)?;
            }
            if viscous {
                let mut gq: Pair = [[0.0; 4]; 2];
                for m in 0..np {
                    let l = row[m];
                    let g = &grad[m * 8..m * 8 + 8];
                    for c in 0..4 {
                        gq[0][c] += l * g[c];
                        gq[1][c] += l * g[4 + c];
                    }
                }
                let fv = self.viscous(&uq, &gq);
                for i in 0..2 {
                    for c in 0..4 {
                        flux[i][c] -= fv[i][c];
                    }
                }
            }
            let w = geo.det * tb.cubature_volume.weights[q];
            for c in 0..4 {
                fr[q * 8 + c] = w * (flux[0][c] * rx + flux[1][c] * ry);
                fr[q * 8 + 4 + c] = w * (flux[0][c] * sx + flux[1][c] * sy);
            }
        }
        for q in 0..nq {
            let (dr, ds) = (tb.cub_dr.row(q), tb.cub_ds.row(q));
            let f = &fr[q * 8..q * 8 + 8];
            for n in 0..np {
                let (a, b) = (dr[n], ds[n]);
                for c in 0..4 {
                    out[n * 4 + c] += a * f[c] + b * f[4 + c];
                }
            }
        }
        Ok(())
    }

    /// Face contributions for both sides plus `[.., gbar, sigma]` at the end
    /// of `out`.
    #[allow(clippy::too_many_arguments)]
    fn face_terms(
        &self,
        mesh: &Mesh,
        field: &StateField,
        grads: &[f64],
        fid: usize,
        t: f64,
        v_w: [f64; 2],
        frozen_sigma: Option<f64>,
        out: &mut [f64],
        s: &mut Scratch,
    ) -> Result<()> {
        let tb = &self.tables;
        let np = tb.np();
        let nfp = tb.nfp();
        let p = tb.p;
        let face = &mesh.faces[fid];
        let n = face.normal;
        let (kl, fl) = (face.left, face.left_face);
        let viscous = self.gas.mu > 0.0;
        let theta = self.penalty.theta;
        let idx_l = &tb.nodes.face_index[fl];

        // Face-node traces aligned with the left orientation:
        // s.a = [U+ (4) | grad U+ (8)] per node, s.b the same for the other side.
        let (ta, tb_) = (&mut s.a[..nfp * 12], &mut s.b[..nfp * 12]);
        for kk in 0..nfp {
            let nl = idx_l[kk];
            ta[kk * 12..kk * 12 + 4].copy_from_slice(&field.element(kl)[nl * 4..nl * 4 + 4]);
            ta[kk * 12 + 4..kk * 12 + 12]
                .copy_from_slice(&grads[(kl * np + nl) * 8..(kl * np + nl) * 8 + 8]);
        }
        let right = match face.right {
            Neighbor::Element { elem, local_face } => {
                let idx_r = &tb.nodes.face_index[local_face];
                for kk in 0..nfp {
                    let nr = idx_r[p - kk];
                    tb_[kk * 12..kk * 12 + 4]
                        .copy_from_slice(&field.element(elem)[nr * 4..nr * 4 + 4]);
                    tb_[kk * 12 + 4..kk * 12 + 12]
                        .copy_from_slice(&grads[(elem * np + nr) * 8..(elem * np + nr) * 8 + 8]);
                }
                Some((elem, local_face))
            }
            Neighbor::Boundary(_) => None,
        };
        let tag = match face.right {
            Neighbor::Boundary(tag) => Some(tag),
            Neighbor::Element { .. } => None,
        };

        // Gbar over both sides at the face nodes.
        let mut gbar: f64 = 0.0;
        if viscous {
            for kk in 0..nfp {
                let up: Cons = ta[kk * 12..kk * 12 + 4].try_into().unwrap();
                let qp = primitive(
                    &up,
                    &self.gas,
                    Site::Face {
                        face: fid,
                        point: kk,
                    },
                )?;
                let um = match tag {
                    None => tb_[kk * 12..kk * 12 + 4].try_into().unwrap(),
                    Some(tag) => {
                        let x = mesh.map_point(kl, tb.nodes.points[idx_l[kk]]);
                        self.ghost(tag, &qp, x, t, v_w)
                    }
                };
                let (gp, gm) = match &self.frozen_diffusion {
                    Some(g) => (normal_diffusion_norm(&normal_diffusion(g, n)), 0.0),
                    None => (gbar_state(&up, n, &self.gas), gbar_state(&um, n, &self.gas)),
                };
                gbar = gbar.max(gp).max(gm);
            }
        }
        let sigma = frozen_sigma.unwrap_or_else(|| face_sigma(mesh, fid, p, gbar, &self.penalty));
        let ow = out.len();
        out[ow - 2] = gbar;
        out[ow - 1] = sigma;

        let interp = &tb.faces[fl].interp;
        let nq = tb.cubature_face.len();
        let half_len = 0.5 * face.length;
        // s.c: surface flux weights per quadrature point (4), s.d: lift
        // weights per side [left r (4), left s (4), right r (4), right s (4)].
        let (hm, lift) = (&mut s.c[..nq * 4], &mut s.d[..nq * 16]);
        let use_lift = theta != 0.0 && viscous;
        for q in 0..nq {
            let row = interp.row(q);
            let mut up = [0.0; 4];
            let mut gp: Pair = [[0.0; 4]; 2];
            let mut um = [0.0; 4];
            let mut gm: Pair = [[0.0; 4]; 2];
            for kk in 0..nfp {
                let l = row[kk];
                for c in 0..4 {
                    up[c] += l * ta[kk * 12 + c];
                    gp[0][c] += l * ta[kk * 12 + 4 + c];
                    gp[1][c] += l * ta[kk * 12 + 8 + c];
                }
                if right.is_some() {
                    for c in 0..4 {
                        um[c] += l * tb_[kk * 12 + c];
                        gm[0][c] += l * tb_[kk * 12 + 4 + c];
                        gm[1][c] += l * tb_[kk * 12 + 8 + c];
                    }
                }
            }
            let site = Site::Face {
                face: fid,
                point: q,
            };
            let qp = primitive(&up, &self.gas, site)?;
            if let Some(tag) = tag {
                let x = mesh.map_point(
                    kl,
                    crate::refelem::face_point(fl, tb.cubature_face.points[q]),
                );
                um = self.ghost(tag, &qp, x, t, v_w);
            }
            let qm = primitive(&um, &self.gas, site)?;
            let w = tb.cubature_face.weights[q] * half_len;

            let mut h = [0.0; 4];
            if self.advection {
                h = match tag {
                    Some(BoundaryTag::Wall) => normal_flux(&um, qm.p, n, v_w),
                    _ => roe_flux_prim(&up, &um, &qp, &qm, n, v_w, &self.gas, site)?,
                };
            }
            let jump: [f64; 4] = core::array::from_fn(|c| up[c] - um[c]);
            let lw = &mut lift[q * 16..q * 16 + 16];
            lw.fill(0.0);
            if viscous {
                // the wall evaluates G at the boundary state
                let ul = if tag == Some(BoundaryTag::Wall) {
                    &um
                } else {
                    &up
                };
                let fvl = self.viscous(ul, &gp);
                let avg: [f64; 4] = match right {
                    Some(_) => {
                        let fvr = self.viscous(&um, &gm);
                        core::array::from_fn(|c| {
                            0.5 * ((fvl[0][c] + fvr[0][c]) * n[0] + (fvl[1][c] + fvr[1][c]) * n[1])
                        })
                    }
                    None => core::array::from_fn(|c| fvl[0][c] * n[0] + fvl[1][c] * n[1]),
                };
                for c in 0..4 {
                    h[c] += sigma * jump[c] - avg[c];
                }
                if use_lift {
                    let coef = if tag.is_none() { 0.5 * theta } else { theta } * w;
                    let ll = symmetrization_lift(&self.diffusion(ul), n, &jump);
                    let inv = mesh.geometry[kl].inverse;
                    for c in 0..4 {
                        lw[c] = coef * (inv[0][0] * ll[0][c] + inv[0][1] * ll[1][c]);
                        lw[4 + c] = coef * (inv[1][0] * ll[0][c] + inv[1][1] * ll[1][c]);
                    }
                    if let Some((kr, _)) = right {
                        let lr = symmetrization_lift(&self.diffusion(&um), n, &jump);
                        let inv = mesh.geometry[kr].inverse;
                        for c in 0..4 {
                            lw[8 + c] = coef * (inv[0][0] * lr[0][c] + inv[0][1] * lr[1][c]);
                            lw[12 + c] = coef * (inv[1][0] * lr[0][c] + inv[1][1] * lr[1][c]);
                        }
                    }
                }
            } else {
                for c in 0..4 {
                    h[c] += sigma * jump[c];
                }
            }
            for c in 0..4 {
                hm[q * 4 + c] = w * h[c];
            }
        }

        // Scatter: surface term onto face nodes, lift through basis gradients.
        let (left, rest) = out.split_at_mut(np * NVAR);
        let right_out = &mut rest[..np * NVAR];
        for q in 0..nq {
            let row = interp.row(q);
            let hq: [f64; 4] = hm[q * 4..q * 4 + 4].try_into().unwrap();
            for kk in 0..nfp {
                let l = row[kk];
                let nl = idx_l[kk];
                for c in 0..4 {
                    left[nl * 4 + c] -= l * hq[c];
                }
            }
            if let Some((_, fr)) = right {
                let idx_r = &tb.nodes.face_index[fr];
                for kk in 0..nfp {
                    let l = row[kk];
                    let nr = idx_r[p - kk];
                    for c in 0..4 {
                        right_out[nr * 4 + c] += l * hq[c];
                    }
                }
            }
        }
        if use_lift {
            let fdl = &tb.faces[fl];
            for q in 0..nq {
                let lw = &lift[q * 16..q * 16 + 16];
                let (a, b): ([f64; 4], [f64; 4]) =
                    (lw[0..4].try_into().unwrap(), lw[4..8].try_into().unwrap());
                let (dr, ds) = (fdl.dr.row(q), fdl.ds.row(q));
                for m in 0..np {
                    for c in 0..4 {
                        left[m * 4 + c] += dr[m] * a[c] + ds[m] * b[c];
                    }
                }
                if let Some((_, fr)) = right {
                    let qr = nq - 1 - q;
                    let fdr = &tb.faces[fr];
                    let (a, b): ([f64; 4], [f64; 4]) = (
                        lw[8..12].try_into().unwrap(),
                        lw[12..16].try_into().unwrap(),
                    );
                    let (dr, ds) = (fdr.dr.row(qr), fdr.ds.row(qr));
                    for m in 0..np {
                        for c in 0..4 {
                            right_out[m * 4 + c] += dr[m] * a[c] + ds[m] * b[c];
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `M_K^-1 R_K` for every element, in place.
    pub fn apply_inverse_mass(&self, mesh: &Mesh, r: &mut [f64]) {
        let np = self.tables.np();
        let minv = &self.tables.mass_inv;
        let mut tmp = vec![0.0; np * NVAR];
        for (k, block) in r.chunks_mut(np * NVAR).enumerate() {
            let scale = 1.0 / mesh.geometry[k].det;
            tmp.fill(0.0);
            for a in 0..np {
                let row = minv.row(a);
                for b in 0..np {
                    let m = row[b] * scale;
                    for c in 0..4 {
                        tmp[a * 4 + c] += m * block[b * 4 + c];
                    }
                }
            }
            block.copy_from_slice(&tmp);
        }
    }

    /// Time derivative `dU/dt = M^-1 (R + source)` written into `rhs`.
    pub fn residual(
        &self,
        mesh: &Mesh,
        field: &StateField,
        t: f64,
        v_w: [f64; 2],
        ws: &mut Workspace,
        rhs: &mut [f64],
    ) -> Result<()> {
        let mut weak = core::mem::take(&mut ws.weak);
        weak.resize(field.data.len(), 0.0);
        let res = self.assemble(mesh, field, t, v_w, Terms::ALL, ws, &mut weak);
        if res.is_ok() {
            if let Some(src) = &self.source {
                for (w, s) in weak.iter_mut().zip(src) {
                    *w += s;
                }
            }
            self.apply_inverse_mass(mesh, &mut weak);
            rhs.copy_from_slice(&weak);
        }
        ws.weak = weak;
        res
    }

    fn partial(
        &self,
        mesh: &Mesh,
        field: &StateField,
        v_w: [f64; 2],
        terms: Terms,
    ) -> Result<Vec<f64>> {
        let mut ws = Workspace::new();
        let mut out = vec![0.0; field.data.len()];
        self.assemble(mesh, field, 0.0, v_w, terms, &mut ws, &mut out)?;
        Ok(out)
    }

    /// Weak volume term `int_K F . grad l_n`.
    pub fn volume_residual(
        &self,
        mesh: &Mesh,
        field: &StateField,
        v_w: [f64; 2],
    ) -> Result<Vec<f64>> {
        self.partial(
            mesh,
            field,
            v_w,
            Terms {
                volume: true,
                interior: false,
                boundary: false,
            },
        )
    }

    /// Interior-face terms (Roe, interior penalty, symmetrization).
    pub fn interior_face_residual(
        &self,
        mesh: &Mesh,
        field: &StateField,
        v_w: [f64; 2],
    ) -> Result<Vec<f64>> {
        self.partial(
            mesh,
            field,
            v_w,
            Terms {
                volume: false,
                interior: true,
                boundary: false,
            },
        )
    }

    /// Boundary-face terms.
    pub fn boundary_residual(
        &self,
        mesh: &Mesh,
        field: &StateField,
        v_w: [f64; 2],
    ) -> Result<Vec<f64>> {
        self.partial(
            mesh,
            field,
            v_w,
            Terms {
                volume: false,
                interior: false,
                boundary: true,
            },
        )
    }
}
