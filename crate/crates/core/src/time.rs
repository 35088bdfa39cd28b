//! Time integration: the two-register low-storage Runge-Kutta step, the
//! Newmark average-acceleration oscillator, and the staggered fluid-structure
//! loop that translates the mesh rigidly with the body.

use crate::dg::{DgOperator, StateField, Terms, Workspace};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::penalty::{
    element_bounds, gradient_inverse_constant, lambda_rayleigh, lambda_tilde, timestep,
    EstimatorInput,
};
use crate::verify::{aero_forces, ForceReference, Forces};
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // redundant when num-traits is built with `std`
use num_traits::Float;

/// `K1 <- A_i K1 + dt f(t + c_i dt, K0)`, `K0 <- K0 + B_i K1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowStorageRk {
    pub a: [f64; 5],
    pub b: [f64; 5],
    pub c: [f64; 5],
}

/// Five-stage fourth-order 2N-storage scheme of Carpenter and Kennedy.
pub const CARPENTER_KENNEDY: LowStorageRk = LowStorageRk {
    a: [
        0.0,
        -567301805773.0 / 1357537059087.0,
        -2404267990393.0 / 2016746695238.0,
        -3550918686646.0 / 2091501179385.0,
        -1275806237668.0 / 842570457699.0,
    ],
    b: [
        1432997174477.0 / 9575080441755.0,
        5161836677717.0 / 13612068292357.0,
        1720146321549.0 / 2090206949498.0,
        3134564353537.0 / 4481467310338.0,
        2277821191437.0 / 14882151754819.0,
    ],
    c: [
        0.0,
        1432997174477.0 / 9575080441755.0,
        2526269341429.0 / 6820363962896.0,
        2006345519317.0 / 3224310063776.0,
        2802321613138.0 / 2924317926251.0,
    ],
};

/// Second register and stage-derivative buffer.
#[derive(Debug, Clone, Default)]
pub struct RkRegisters {
    k1: Vec<f64>,
    rhs: Vec<f64>,
}

impl LowStorageRk {
    /// Advances `u` from `t` to `t + dt`. `f(t, u, out)` writes `du/dt`.
    /// A positivity failure in stage `i` is reported with that stage index
    /// and leaves `u` partially updated.
    pub fn step<S, F>(
        &self,
        u: &mut S,
        regs: &mut RkRegisters,
        t: f64,
        dt: f64,
        mut f: F,
    ) -> Result<()>
    where
        S: AsRef<[f64]> + AsMut<[f64]>,
        F: FnMut(f64, &S, &mut [f64]) -> Result<()>,
    {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
        let n = u.as_ref().len();
        regs.k1.clear();
        regs.k1.resize(n, 0.0);
        regs.rhs.resize(n, 0.0);
        for i in 0..5 {
            f(t + self.c[i] * dt, u, &mut regs.rhs).map_err(|e| match e {
                Error::Positivity { quantity, site, .. } => Error::StagePositivity {
                    stage: i,
                    quantity,
                    site,
                },
                other => other,
            })?;
            let (a, b) = (self.a[i], self.b[i]);
            let x = u.as_mut();
            for ((k, r), x) in regs.k1.iter_mut().zip(&regs.rhs).zip(x.iter_mut()) {
                *k = a * *k + dt * r;
                *x += b * *k;
            }
        }
        Ok(())
    }
}

/// `M y'' + C y' + K y = F` advanced with the Newmark scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub m: f64,
    pub c: f64,
    pub k: f64,
    pub beta: f64,
    pub gamma: f64,
    pub y: f64,
    pub ydot: f64,
    pub yddot: f64,
}

impl Oscillator {
    /// Average-acceleration oscillator (`beta = 1/4`, `gamma = 1/2`) whose
    /// initial acceleration balances the force `f0`.
    pub fn new(m: f64, c: f64, k: f64, y0: f64, v0: f64, f0: f64) -> Result<Self> {
        if !(m > 0.0) || !(c >= 0.0) || !(k >= 0.0) {
            return Err(Error::InvalidParameter(
                "oscillator needs M > 0 and C, K >= 0",
            ));
        }
        Ok(Oscillator {
            m,
            c,
            k,
            beta: 0.25,
            gamma: 0.5,
            y: y0,
            ydot: v0,
            yddot: (f0 - c * v0 - k * y0) / m,
        })
    }

    /// One step with the force `f` held over the step; returns the
    /// displacement increment.
    pub fn step(&mut self, f: f64, dt: f64) -> f64 {
        let (b, g) = (self.beta, self.gamma);
        let y_pred = self.y + dt * self.ydot + (0.5 - b) * dt * dt * self.yddot;
        let v_pred = self.ydot + (1.0 - g) * dt * self.yddot;
        let a = (f - self.c * v_pred - self.k * y_pred)
            / (self.m + g * dt * self.c + b * dt * dt * self.k);
        let y_new = y_pred + b * dt * dt * a;
        let dy = y_new - self.y;
        self.y = y_new;
        self.ydot = v_pred + g * dt * a;
        self.yddot = a;
        dy
    }

    /// `M y'^2 / 2 + K y^2 / 2`.
    pub fn energy(&self) -> f64 {
        0.5 * self.m * self.ydot * self.ydot + 0.5 * self.k * self.y * self.y
    }
}

/// Mass-normalized coefficients of the elastically mounted cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralCoefficients {
    pub m_r: f64,
    pub c_r: f64,
    pub k_r: f64,
    /// Natural frequency (added mass included).
    pub f_n: f64,
    /// Body mass per unit span; the forcing is `F_r = lift / mass`.
    pub mass: f64,
}

/// Coefficients from the reduced velocity `U* = v_inf / (f_n D)`, the mass
/// ratio `m*`, and the damping ratio `xi`.
pub fn structural_coefficients(
    u_star: f64,
    m_star: f64,
    xi: f64,
    v_inf: f64,
    d: f64,
    rho: f64,
) -> Result<StructuralCoefficients> {
    if !(u_star > 0.0 && m_star > 0.0 && d > 0.0 && v_inf > 0.0 && rho > 0.0) || !(xi >= 0.0) {
        return Err(Error::InvalidParameter(
            "structural parameters must be positive",
        ));
    }
    let f_n = v_inf / (u_star * d);
    let w = 2.0 * PI * f_n;
    Ok(StructuralCoefficients {
        m_r: 1.0,
        c_r: 4.0 * PI * f_n * xi,
        k_r: (1.0 + 1.0 / m_star) * w * w,
        f_n,
        mass: m_star * rho * PI * d * d / 4.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CflBound {
    /// Rayleigh-quotient bound `Lambda`.
    Rayleigh,
    /// Operator-norm bound `Lambda~`.
    OperatorNorm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    pub dt_override: Option<f64>,
    pub bound: CflBound,
    /// `None` keeps the body fixed.
    pub structure: Option<StructuralCoefficients>,
    pub reference: ForceReference,
    /// Reuse the step's initial `sigma_e` in every stage.
    pub freeze_sigma: bool,
}

/// One row of the force/motion history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub cl: f64,
    pub cd: f64,
    pub y: f64,
    pub ydot: f64,
    pub dt: f64,
}

/// Restartable part of the coupled state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub t: f64,
    pub steps: u64,
    pub field: StateField,
    pub vertices: Vec<[f64; 2]>,
    pub oscillator: Oscillator,
    /// Mesh velocity of the last step.
    pub v_w: [f64; 2],
    /// Accumulated rigid translation.
    pub displacement: [f64; 2],
}

/// Staggered coupling: structure first (with the force of the previous
/// step), then the mesh translation, then one fluid step at the fixed mesh
/// velocity, then the forces of the new state.
pub struct Coupled {
    pub mesh: Mesh,
    pub op: DgOperator,
    pub config: CouplingConfig,
    pub state: CoupledState,
    pub forces: Forces,
    ws: Workspace,
    regs: RkRegisters,
    scratch: Vec<f64>,
    c_grad: f64,
}

impl Coupled {
    pub fn new(
        mesh: Mesh,
        op: DgOperator,
        field: StateField,
        config: CouplingConfig,
    ) -> Result<Self> {
        let vertices = mesh.vertices.clone();
        let placeholder = Oscillator::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)?;
        let state = CoupledState {
            t: 0.0,
            steps: 0,
            field,
            vertices,
            oscillator: placeholder,
            v_w: [0.0; 2],
            displacement: [0.0; 2],
        };
        let mut run = Self::restore(mesh, op, config, state)?;
        let osc = match config.structure {
            Some(s) => Oscillator::new(s.m_r, s.c_r, s.k_r, 0.0, 0.0, run.forces.fy / s.mass)?,
            None => placeholder,
        };
        run.state.oscillator = osc;
        Ok(run)
    }

    /// Resumes from a saved state; `mesh` supplies connectivity and the
    /// state supplies vertex positions.
    pub fn restore(
        mut mesh: Mesh,
        op: DgOperator,
        config: CouplingConfig,
        state: CoupledState,
    ) -> Result<Self> {
        let expected = mesh.num_elements() * op.tables.np() * 4;
        if state.field.data.len() != expected || state.vertices.len() != mesh.vertices.len() {
            return Err(Error::Layout {
                expected,
                found: state.field.data.len(),
            });
        }
        state.field.check(&op.gas)?;
        mesh.vertices.clone_from(&state.vertices);
        let c_grad = op
            .penalty
            .c_grad
            .unwrap_or_else(|| gradient_inverse_constant(op.tables.p));
        let mut run = Coupled {
            mesh,
            op,
            config,
            state,
            forces: Forces::default(),
            ws: Workspace::new(),
            regs: RkRegisters::default(),
            scratch: Vec::new(),
            c_grad,
        };
        run.refresh()?;
        Ok(run)
    }

    /// Recomputes gradients, face penalties, and forces for the current
    /// state.
    fn refresh(&mut self) -> Result<()> {
        let s = &self.state;
        self.scratch.resize(s.field.data.len(), 0.0);
        self.ws.sigma_frozen = false;
        self.op.assemble(
            &self.mesh,
            &s.field,
            s.t,
            s.v_w,
            Terms::ALL,
            &mut self.ws,
            &mut self.scratch,
        )?;
        self.forces = if self.mesh.has_tag(crate::mesh::BoundaryTag::Wall) {
            let reference = self.reference();
            aero_forces(
                &s.field,
                &self.ws.gradients,
                &self.mesh,
                &self.op.tables,
                &self.op.gas,
                &reference,
            )?
        } else {
            Forces::default()
        };
        Ok(())
    }

    fn reference(&self) -> ForceReference {
        let mut r = self.config.reference;
        r.point[0] += self.state.displacement[0];
        r.point[1] += self.state.displacement[1];
        r
    }

    /// Spectral bound of the current state.
    pub fn lambda(&self) -> Result<f64> {
        spectral_bound(
            &self.op,
            &self.mesh,
            &self.state.field,
            self.state.v_w,
            &self.ws,
            self.c_grad,
            self.config.bound,
        )
    }

    /// Step size from the override or the CFL estimate, capped at `t_end`.
    pub fn timestep(&self, t_end: f64) -> Result<f64> {
        let dt = match self.config.dt_override {
            Some(dt) => dt,
            None => timestep(self.lambda()?, &self.op.penalty),
        };
        let rest = t_end - self.state.t;
        Ok(if rest > 0.0 && rest < dt { rest } else { dt })
    }

    /// One coupled step. On failure the state before the step is kept.
    pub fn step(&mut self, t_end: f64) -> Result<Sample> {
        let dt = self.timestep(t_end)?;
        let saved = self.state.clone();
        let result = self.advance(dt);
        if let Err(e) = result {
            self.mesh.vertices.clone_from(&saved.vertices);
            self.state = saved;
            self.refresh()?;
            return Err(e);
        }
        Ok(self.sample(dt))
    }

    fn advance(&mut self, dt: f64) -> Result<()> {
        let dy = match self.config.structure {
            Some(s) => self.state.oscillator.step(self.forces.fy / s.mass, dt),
            None => 0.0,
        };
        let v_b = [0.0, dy / dt];
        self.mesh.translate([0.0, dy]);
        self.state.displacement[1] += dy;
        self.state.v_w = v_b;
        let (mesh, op, ws) = (&self.mesh, &self.op, &mut self.ws);
        ws.sigma_frozen = self.config.freeze_sigma;
        let t = self.state.t;
        CARPENTER_KENNEDY.step(
            &mut self.state.field,
            &mut self.regs,
            t,
            dt,
            |ts, u, out| op.residual(mesh, u, ts, v_b, ws, out),
        )?;
        self.state.t = t + dt;
        self.state.steps += 1;
        self.state.vertices.clone_from(&self.mesh.vertices);
        self.refresh()
    }

    pub fn sample(&self, dt: f64) -> Sample {
        let s = &self.state;
        Sample {
            t: s.t,
            cl: self.forces.cl,
            cd: self.forces.cd,
            y: s.oscillator.y,
            ydot: s.oscillator.ydot,
            dt,
        }
    }

    /// Broken gradients of the current state.
    pub fn gradients(&self) -> &[f64] {
        &self.ws.gradients
    }
}

/// Spectral bound of `field` from the gradients and face penalties that the
/// last assembly of `field` left in `ws`.
pub fn spectral_bound(
    op: &DgOperator,
    mesh: &Mesh,
    field: &StateField,
    v_w: [f64; 2],
    ws: &Workspace,
    c_grad: f64,
    bound: CflBound,
) -> Result<f64> {
    let bounds = element_bounds(&EstimatorInput {
        mesh,
        np: op.tables.np(),
        p: op.tables.p,
        states: &field.data,
        gradients: &ws.gradients,
        face_sigma: &ws.sigma,
        v_w,
        gas: &op.gas,
        c_grad,
    })?;
    match bound {
        CflBound::Rayleigh => lambda_rayleigh(&bounds),
        CflBound::OperatorNorm => lambda_tilde(&bounds, op.penalty.c1, op.gas.mu),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    /// Fixed pseudo-time step; estimated from the initial state when `None`.
    pub dt: Option<f64>,
    pub bound: CflBound,
    /// Stop once `|dU/dt|_inf` falls below `tol` times its initial value.
    pub tol: f64,
    /// Stop once `|dU/dt|_inf` has not dropped below its running minimum
    /// for this many consecutive checks.
    pub stall_checks: usize,
    pub check_interval: usize,
    pub max_steps: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            dt: None,
            bound: CflBound::Rayleigh,
            tol: 1e-10,
            stall_checks: 20,
            check_interval: 50,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOutcome {
    pub steps: usize,
    pub dt: f64,
    pub initial_residual: f64,
    pub residual: f64,
}

/// Marches `field` in pseudo-time with a fixed step until the time
/// derivative (source included) is negligible or has stopped decreasing.
pub fn march_steady(
    op: &DgOperator,
    mesh: &Mesh,
    field: &mut StateField,
    opts: &SteadyOptions,
) -> Result<SteadyOutcome> {
    let mut ws = Workspace::new();
    let mut rhs = alloc::vec![0.0; field.data.len()];
    let mut norm = |field: &StateField, ws: &mut Workspace| -> Result<f64> {
        op.residual(mesh, field, 0.0, [0.0; 2], ws, &mut rhs)?;
        Ok(rhs.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
    };
    let initial = norm(field, &mut ws)?;
    let dt = match opts.dt {
        Some(dt) => dt,
        None => {
            let c_grad = op
                .penalty
                .c_grad
                .unwrap_or_else(|| gradient_inverse_constant(op.tables.p));
            let lambda = spectral_bound(op, mesh, field, [0.0; 2], &ws, c_grad, opts.bound)?;
            timestep(lambda, &op.penalty)
        }
    };
    let mut regs = RkRegisters::default();
    let (mut best, mut since_best) = (initial, 0);
    let mut residual = initial;
    let mut steps = 0;
    let interval = opts.check_interval.max(1);
    while residual > opts.tol * initial {
        if steps >= opts.max_steps {
            return Err(Error::NotConverged { steps, residual });
        }
        for _ in 0..interval {
            CARPENTER_KENNEDY.step(field, &mut regs, 0.0, dt, |_, u, out| {
                op.residual(mesh, u, 0.0, [0.0; 2], &mut ws, out)
            })?;
        }
        steps += interval;
        residual = norm(field, &mut ws)?;
        if residual < best {
            (best, since_best) = (residual, 0);
        } else {
            since_best += 1;
            if since_best >= opts.stall_checks {
                break;
            }
        }
    }
    Ok(SteadyOutcome {
        steps,
        dt,
        initial_residual: initial,
        residual,
    })
}

/// Samples of `u' = f(t, u)` at the end of each of `n` uniform steps.
pub fn integrate_ode(
    scheme: &LowStorageRk,
    u0: &[f64],
    t0: f64,
    dt: f64,
    n: usize,
    mut f: impl FnMut(f64, &[f64], &mut [f64]),
) -> Result<Vec<f64>> {
    let mut u = u0.to_vec();
    let mut regs = RkRegisters::default();
    let mut t = t0;
    for _ in 0..n {
        scheme.step(&mut u, &mut regs, t, dt, |t, u: &Vec<f64>, out| {
            f(t, u, out);
            Ok(())
        })?;
        t += dt;
    }
    Ok(u)
}
