//! Ideal-gas model: state conversion, advective and viscous fluxes, the Roe
//! numerical flux, and boundary ghost states.
//!
//! Conservative states are `[rho, rho v1, rho v2, E]` with `E` the total
//! energy per unit volume.

use crate::error::{Error, Quantity, Result, Site};
#[allow(unused_imports)] // redundant when num-traits is built with `std`
use num_traits::Float;

pub type Cons = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];
/// Flux or gradient pair `[x-component, y-component]`.
pub type Pair = [[f64; 4]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    pub gamma: f64,
    pub prandtl: f64,
    pub mu: f64,
    pub cv: f64,
}

impl GasParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::InvalidParameter("gamma must exceed 1"));
        }
        if !(self.prandtl > 0.0 && self.cv > 0.0 && self.mu >= 0.0) {
            return Err(Error::InvalidParameter(
                "Pr and c_V must be positive, mu non-negative",
            ));
        }
        Ok(())
    }

    pub fn with_mu(self, mu: f64) -> Self {
        GasParams { mu, ..self }
    }
}

impl Default for GasParams {
    fn default() -> Self {
        GasParams {
            gamma: 1.4,
            prandtl: 0.72,
            mu: 0.0,
            cv: 717.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prim {
    pub rho: f64,
    pub v: [f64; 2],
    pub p: f64,
}

impl Prim {
    pub fn sound_speed(&self, gas: &GasParams) -> f64 {
        (gas.gamma * self.p / self.rho).sqrt()
    }

    pub fn temperature(&self, gas: &GasParams) -> f64 {
        self.p / ((gas.gamma - 1.0) * gas.cv * self.rho)
    }

    /// Total enthalpy per unit mass.
    pub fn enthalpy(&self, gas: &GasParams) -> f64 {
        gas.gamma / (gas.gamma - 1.0) * self.p / self.rho
            + 0.5 * (self.v[0] * self.v[0] + self.v[1] * self.v[1])
    }
}

/// `p = (gamma - 1)(E - rho |v|^2 / 2)`, unchecked.
#[inline]
pub fn eos_pressure(u: &Cons, gas: &GasParams) -> f64 {
    (gas.gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0])
}

/// Primitive state, failing on nonpositive density or pressure.
#[inline]
pub fn primitive(u: &Cons, gas: &GasParams, site: Site) -> Result<Prim> {
    if !(u[0] > 0.0) {
        return Err(Error::Positivity {
            quantity: Quantity::Density,
            value: u[0],
            site,
        });
    }
    let p = eos_pressure(u, gas);
    if !(p > 0.0) {
        return Err(Error::Positivity {
            quantity: Quantity::Pressure,
            value: p,
            site,
        });
    }
    Ok(Prim {
        rho: u[0],
        v: [u[1] / u[0], u[2] / u[0]],
        p,
    })
}

pub fn conservative(q: &Prim, gas: &GasParams) -> Cons {
    let ke = 0.5 * q.rho * (q.v[0] * q.v[0] + q.v[1] * q.v[1]);
    [
        q.rho,
        q.rho * q.v[0],
        q.rho * q.v[1],
        q.p / (gas.gamma - 1.0) + ke,
    ]
}

/// `[F_cx - w_x U, F_cy - w_y U]`.
#[inline]
pub fn advective_flux(u: &Cons, p: f64, v_w: [f64; 2]) -> Pair {
    let (v1, v2) = (u[1] / u[0], u[2] / u[0]);
    let (a1, a2) = (v1 - v_w[0], v2 - v_w[1]);
    [
        [u[0] * a1, u[1] * a1 + p, u[2] * a1, u[3] * a1 + p * v1],
        [u[0] * a2, u[1] * a2, u[2] * a2 + p, u[3] * a2 + p * v2],
    ]
}

/// Advective flux projected on `n`: `F_c n - (v_w . n) U`.
#[inline]
pub fn normal_flux(u: &Cons, p: f64, n: [f64; 2], v_w: [f64; 2]) -> Cons {
    let vn = (u[1] * n[0] + u[2] * n[1]) / u[0];
    let an = vn - (v_w[0] * n[0] + v_w[1] * n[1]);
    [
        u[0] * an,
        u[1] * an + p * n[0],
        u[2] * an + p * n[1],
        u[3] * an + p * vn,
    ]
}

/// The four blocks `G[i][j]` with `F_v,i = sum_j G_ij dU/dx_j`.
pub fn diffusion_tensor(u: &Cons, gas: &GasParams) -> [[Mat4; 2]; 2] {
    let s = gas.mu / u[0];
    let (v1, v2) = (u[1] / u[0], u[2] / u[0]);
    let vv = v1 * v1 + v2 * v2;
    let g = gas.gamma / gas.prandtl;
    let e = u[3] / u[0];
    let corner = |vi: f64| -vi * vi / 3.0 - vv - g * (e - vv);
    let t = 2.0 / 3.0;
    let f = 4.0 / 3.0;
    let g11 = [
        [0.0; 4],
        [-f * v1, f, 0.0, 0.0],
        [-v2, 0.0, 1.0, 0.0],
        [corner(v1), (f - g) * v1, (1.0 - g) * v2, g],
    ];
    let g12 = [
        [0.0; 4],
        [t * v2, 0.0, -t, 0.0],
        [-v1, 1.0, 0.0, 0.0],
        [-v1 * v2 / 3.0, v2, -t * v1, 0.0],
    ];
    let g21 = [
        [0.0; 4],
        [-v2, 0.0, 1.0, 0.0],
        [t * v1, -t, 0.0, 0.0],
        [-v1 * v2 / 3.0, -t * v2, v1, 0.0],
    ];
    let g22 = [
        [0.0; 4],
        [-v1, 1.0, 0.0, 0.0],
        [-f * v2, 0.0, f, 0.0],
        [corner(v2), (1.0 - g) * v1, (f - g) * v2, g],
    ];
    let scale = |m: Mat4| m.map(|row| row.map(|x| s * x));
    [[scale(g11), scale(g12)], [scale(g21), scale(g22)]]
}

#[inline]
fn mat4_vec(m: &Mat4, x: &[f64; 4]) -> [f64; 4] {
    core::array::from_fn(|r| m[r][0] * x[0] + m[r][1] * x[1] + m[r][2] * x[2] + m[r][3] * x[3])
}

#[inline]
fn mat4_t_vec(m: &Mat4, x: &[f64; 4]) -> [f64; 4] {
    core::array::from_fn(|c| m[0][c] * x[0] + m[1][c] * x[1] + m[2][c] * x[2] + m[3][c] * x[3])
}

/// Viscous flux `F_v = G(U) grad U` with `grad = [dU/dx, dU/dy]`.
#[inline]
pub fn viscous_flux(g: &[[Mat4; 2]; 2], grad: &Pair) -> Pair {
    core::array::from_fn(|i| {
        let a = mat4_vec(&g[i][0], &grad[0]);
        let b = mat4_vec(&g[i][1], &grad[1]);
        [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
    })
}

/// `G(U) grad U` evaluated through the stress tensor and the heat flux,
/// without forming `G`.
pub fn viscous_flux_direct(u: &Cons, grad: &Pair, gas: &GasParams) -> Pair {
    let r = 1.0 / u[0];
    let v = [u[1] * r, u[2] * r];
    let e = u[3] * r - 0.5 * (v[0] * v[0] + v[1] * v[1]);
    // dv[i][j] = d v_i / d x_j
    let dv: [[f64; 2]; 2] = core::array::from_fn(|i| {
        core::array::from_fn(|j| (grad[j][1 + i] - v[i] * grad[j][0]) * r)
    });
    let div = dv[0][0] + dv[1][1];
    let mu = gas.mu;
    let k = mu * gas.gamma / gas.prandtl;
    core::array::from_fn(|i| {
        let g = &grad[i];
        let de = (g[3]
            - (e + 0.5 * (v[0] * v[0] + v[1] * v[1])) * g[0]
            - v[0] * (g[1] - v[0] * g[0])
            - v[1] * (g[2] - v[1] * g[0]))
            * r;
        let tau = |j: usize| {
            let iso = if i == j { 2.0 / 3.0 * div } else { 0.0 };
            mu * (dv[i][j] + dv[j][i] - iso)
        };
        let (t1, t2) = (tau(0), tau(1));
        [0.0, t1, t2, t1 * v[0] + t2 * v[1] + k * de]
    })
}

/// `sum_ij n_i n_j G_ij`.
pub fn normal_diffusion(g: &[[Mat4; 2]; 2], n: [f64; 2]) -> Mat4 {
    core::array::from_fn(|r| {
        core::array::from_fn(|c| {
            n[0] * n[0] * g[0][0][r][c]
                + n[0] * n[1] * (g[0][1][r][c] + g[1][0][r][c])
                + n[1] * n[1] * g[1][1][r][c]
        })
    })
}

/// Test-function weights of the symmetrization term: component `j` is
/// `sum_i n_i G_ij^T jump`, so that `(G grad phi) . n . jump` equals
/// `sum_j d(phi)/dx_j . lift_j`.
#[inline]
pub fn symmetrization_lift(g: &[[Mat4; 2]; 2], n: [f64; 2], jump: &[f64; 4]) -> Pair {
    core::array::from_fn(|j| {
        let a = mat4_t_vec(&g[0][j], jump);
        let b = mat4_t_vec(&g[1][j], jump);
        core::array::from_fn(|k| n[0] * a[k] + n[1] * b[k])
    })
}

/// Roe-averaged state across a face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoeAverage {
    pub rho: f64,
    pub v: [f64; 2],
    pub h: f64,
    pub c: f64,
}

pub fn roe_average(a: &Prim, b: &Prim, gas: &GasParams, site: Site) -> Result<RoeAverage> {
    let (sa, sb) = (a.rho.sqrt(), b.rho.sqrt());
    let w = 1.0 / (sa + sb);
    let v = [
        (sa * a.v[0] + sb * b.v[0]) * w,
        (sa * a.v[1] + sb * b.v[1]) * w,
    ];
    let h = (sa * a.enthalpy(gas) + sb * b.enthalpy(gas)) * w;
    let c2 = (gas.gamma - 1.0) * (h - 0.5 * (v[0] * v[0] + v[1] * v[1]));
    if !(c2 > 0.0) {
        return Err(Error::Positivity {
            quantity: Quantity::SoundSpeed,
            value: c2,
            site,
        });
    }
    Ok(RoeAverage {
        rho: sa * sb,
        v,
        h,
        c: c2.sqrt(),
    })
}

/// Roe matrix applied to `U_b - U_a` through wave strengths. With
/// `absolute` set, the eigenvalues enter by magnitude (`|A| dU`), otherwise
/// with sign (`A dU`). Eigenvalues are shifted by the grid velocity.
pub fn roe_matrix_apply(
    avg: &RoeAverage,
    a: &Prim,
    b: &Prim,
    n: [f64; 2],
    v_w: [f64; 2],
    absolute: bool,
) -> [f64; 4] {
    let t = [-n[1], n[0]];
    let vn = avg.v[0] * n[0] + avg.v[1] * n[1];
    let vt = avg.v[0] * t[0] + avg.v[1] * t[1];
    let wn = v_w[0] * n[0] + v_w[1] * n[1];
    let c = avg.c;
    let mag = |x: f64| if absolute { x.abs() } else { x };
    let l1 = mag(vn - wn - c);
    let l2 = mag(vn - wn);
    let l3 = mag(vn - wn + c);

    let drho = b.rho - a.rho;
    let dp = b.p - a.p;
    let dvn = (b.v[0] - a.v[0]) * n[0] + (b.v[1] - a.v[1]) * n[1];
    let dvt = (b.v[0] - a.v[0]) * t[0] + (b.v[1] - a.v[1]) * t[1];
    let c2 = c * c;
    let a1 = (dp - avg.rho * c * dvn) / (2.0 * c2);
    let a2 = drho - dp / c2;
    let a3 = (dp + avg.rho * c * dvn) / (2.0 * c2);
    let a4 = avg.rho * dvt;
    let kin = 0.5 * (avg.v[0] * avg.v[0] + avg.v[1] * avg.v[1]);
    let w1 = l1 * a1;
    let w2 = l2 * a2;
    let w3 = l3 * a3;
    let w4 = l2 * a4;
    [
        w1 + w2 + w3,
        w1 * (avg.v[0] - c * n[0]) + w2 * avg.v[0] + w3 * (avg.v[0] + c * n[0]) + w4 * t[0],
        w1 * (avg.v[1] - c * n[1]) + w2 * avg.v[1] + w3 * (avg.v[1] + c * n[1]) + w4 * t[1],
        w1 * (avg.h - c * vn) + w2 * kin + w3 * (avg.h + c * vn) + w4 * vt,
    ]
}

/// Roe flux `(F_N(U+) + F_N(U-))/2 - |A| (U- - U+)/2` along `n`, which points
/// from the `+` side to the `-` side.
pub fn roe_flux(
    up: &Cons,
    um: &Cons,
    n: [f64; 2],
    v_w: [f64; 2],
    gas: &GasParams,
    site: Site,
) -> Result<Cons> {
    let qp = primitive(up, gas, site)?;
    let qm = primitive(um, gas, site)?;
    roe_flux_prim(up, um, &qp, &qm, n, v_w, gas, site)
}

/// [`roe_flux`] with primitive states already available.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn roe_flux_prim(
    up: &Cons,
    um: &Cons,
    qp: &Prim,
    qm: &Prim,
    n: [f64; 2],
    v_w: [f64; 2],
    gas: &GasParams,
    site: Site,
) -> Result<Cons> {
    let avg = roe_average(qp, qm, gas, site)?;
    let fp = normal_flux(up, qp.p, n, v_w);
    let fm = normal_flux(um, qm.p, n, v_w);
    let d = roe_matrix_apply(&avg, qp, qm, n, v_w, true);
    Ok(core::array::from_fn(|k| 0.5 * (fp[k] + fm[k]) - 0.5 * d[k]))
}

/// Wall ghost state `[rho+, v_w, p+]` in conservative form.
pub fn wall_ghost(interior: &Prim, v_w: [f64; 2], gas: &GasParams) -> Cons {
    conservative(
        &Prim {
            rho: interior.rho,
            v: v_w,
            p: interior.p,
        },
        gas,
    )
}

/// Far-field ghost state: the prescribed external state.
pub fn farfield_ghost(freestream: &Prim, gas: &GasParams) -> Cons {
    conservative(freestream, gas)
}
