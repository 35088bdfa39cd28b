mod common;

use dgviv_core::dg::{DgOperator, Farfield, StateField};
use dgviv_core::mesh::{generate_structured, Rect};
use dgviv_core::penalty::PenaltyConfig;
use dgviv_core::physics::{conservative, primitive, GasParams, Prim};
use dgviv_core::refelem::build_tables;
use dgviv_core::time::{
    integrate_ode, structural_coefficients, CflBound, Coupled, CouplingConfig, Oscillator,
    RkRegisters, CARPENTER_KENNEDY,
};
use dgviv_core::verify::{convergence_rate, ForceReference};
use dgviv_core::{Error, Site};

#[test]
fn scheme_is_self_starting_and_consistent() {
    let rk = CARPENTER_KENNEDY;
    assert_eq!(rk.a[0], 0.0);
    let u = integrate_ode(&rk, &[0.0], 0.0, 0.37, 1, |_, _, out| out[0] = 1.0).unwrap();
    assert!((u[0] - 0.37).abs() <= 1e-14);
    // stage times are where the stage state lives for u' = 1
    let mut stage_states = Vec::new();
    let mut u = vec![0.0];
    let mut regs = RkRegisters::default();
    rk.step(&mut u, &mut regs, 0.0, 1.0, |t, u: &Vec<f64>, out| {
        stage_states.push((t, u[0]));
        out[0] = 1.0;
        Ok(())
    })
    .unwrap();
    for (t, x) in stage_states {
        assert!((t - x).abs() <= 1e-14, "{t} vs {x}");
    }
}

#[test]
fn zero_rate_leaves_state_bitwise() {
    let u0: Vec<f64> = (0..50).map(|i| (i as f64).sin() * 1e3).collect();
    let u = integrate_ode(&CARPENTER_KENNEDY, &u0, 0.0, 0.1, 20, |_, _, out| {
        out.fill(0.0)
    })
    .unwrap();
    assert!(u.iter().zip(&u0).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn fourth_order_on_linear_decay() {
    let dts = [0.1f64, 0.05, 0.025, 0.0125];
    let errors: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let n = (1.0 / dt).round() as usize;
            let u = integrate_ode(&CARPENTER_KENNEDY, &[1.0], 0.0, dt, n, |_, u, out| {
                out[0] = -u[0]
            })
            .unwrap();
            (u[0] - (-1.0f64).exp()).abs()
        })
        .collect();
    let r = convergence_rate(&errors, &dts).unwrap();
    assert!(r >= 4.0, "rate {r}, errors {errors:?}");
}

#[test]
fn nonpositive_step_is_rejected() {
    let mut u = vec![1.0];
    let r = CARPENTER_KENNEDY.step(
        &mut u,
        &mut RkRegisters::default(),
        0.0,
        0.0,
        |_, _: &Vec<f64>, _| Ok(()),
    );
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
}

#[test]
fn stage_failures_carry_the_stage_index() {
    let mut u = vec![1.0];
    let mut calls = 0;
    let r = CARPENTER_KENNEDY.step(
        &mut u,
        &mut RkRegisters::default(),
        0.0,
        0.1,
        |_, u: &Vec<f64>, out| {
            calls += 1;
            if calls == 3 {
                primitive(&[-u[0], 0.0, 0.0, 1.0], &GasParams::default(), Site::Point)?;
            }
            out[0] = 0.0;
            Ok(())
        },
    );
    assert!(matches!(r, Err(Error::StagePositivity { stage: 2, .. })));
}

#[test]
fn newmark_constant_force_is_exact() {
    let mut o = Oscillator::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
    o.step(1.0, 0.1);
    assert!((o.y - 0.005).abs() <= 1e-16);
    assert!((o.ydot - 0.1).abs() <= 1e-16);
    for n in 2..=50 {
        o.step(1.0, 0.1);
        let t = 0.1 * n as f64;
        assert!((o.y - 0.5 * t * t).abs() <= 1e-12);
    }
}

#[test]
fn newmark_conserves_undamped_energy() {
    let mut o = Oscillator::new(1.0, 0.0, 1.0, 1.0, 0.0, 0.0).unwrap();
    let e0 = o.energy();
    for _ in 0..10_000 {
        o.step(0.0, 0.05);
    }
    assert!((o.energy() - e0).abs() <= 1e-12 * e0);
}

#[test]
fn newmark_is_second_order_on_damped_oscillator() {
    let (c, k) = (0.2, 4.0 * std::f64::consts::PI.powi(2));
    let w0 = k.sqrt();
    let zeta = c / (2.0 * w0);
    let wd = w0 * (1.0 - zeta * zeta).sqrt();
    let exact =
        |t: f64| (-zeta * w0 * t).exp() * ((wd * t).cos() + zeta * w0 / wd * (wd * t).sin());
    let error = |dt: f64| {
        let mut o = Oscillator::new(1.0, c, k, 1.0, 0.0, 0.0).unwrap();
        let n = (2.0 / dt).round() as usize;
        for _ in 0..n {
            o.step(0.0, dt);
        }
        (o.y - exact(2.0)).abs()
    };
    let e: Vec<f64> = [0.01, 0.005, 0.0025].iter().map(|&dt| error(dt)).collect();
    for w in e.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 4.0).abs() <= 0.3, "{ratio}");
    }
}

#[test]
fn structural_coefficient_examples() {
    let s = structural_coefficients(5.0, 1.0, 0.01, 1.0, 1.0, 1.0).unwrap();
    assert!((s.f_n - 0.2).abs() <= 1e-15);
    assert!((s.k_r - 2.0 * (0.4 * std::f64::consts::PI).powi(2)).abs() <= 1e-12);
    assert!((s.k_r - 3.158).abs() < 1e-3);
    assert_eq!(s.m_r, 1.0);
    assert!((s.mass - std::f64::consts::PI / 4.0).abs() <= 1e-15);
    assert_eq!(
        structural_coefficients(5.0, 1.0, 0.0, 1.0, 1.0, 1.0)
            .unwrap()
            .c_r,
        0.0
    );
    assert!(structural_coefficients(0.0, 1.0, 0.0, 1.0, 1.0, 1.0).is_err());
}

/// Quadratic entropy `int dU^T H dU` of the deviation from `u0`, with the
/// Hessian of `-rho s / (gamma - 1)` at `u0` from central differences.
fn entropy_energy(
    field: &StateField,
    u0: [f64; 4],
    mesh: &dgviv_core::mesh::Mesh,
    mass: &dgviv_core::linalg::Matrix,
    gas: &GasParams,
) -> f64 {
    let eta = |u: [f64; 4]| {
        let p = (gas.gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]);
        -u[0] * (p / u[0].powf(gas.gamma)).ln() / (gas.gamma - 1.0)
    };
    let h = 1e-4;
    let mut hess = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let shift = |a: f64, b: f64| {
                let mut u = u0;
                u[i] += a * h;
                u[j] += b * h;
                eta(u)
            };
            hess[i][j] = (shift(1.0, 1.0) - shift(1.0, -1.0) - shift(-1.0, 1.0)
                + shift(-1.0, -1.0))
                / (4.0 * h * h);
        }
    }
    let np = field.np;
    let mut e = 0.0;
    for k in 0..field.num_elements() {
        let d: Vec<[f64; 4]> = (0..np)
            .map(|n| std::array::from_fn(|c| field.node(k, n)[c] - u0[c]))
            .collect();
        for a in 0..np {
            for b in 0..np {
                let m = mesh.geometry[k].det * mass[(a, b)];
                for i in 0..4 {
                    for j in 0..4 {
                        e += m * d[a][i] * hess[i][j] * d[b][j];
                    }
                }
            }
        }
    }
    e
}

#[test]
fn small_perturbations_decay_at_the_estimated_step() {
    let gas = GasParams {
        mu: 0.0,
        ..GasParams::default()
    };
    let free = Prim {
        rho: 1.0,
        v: [0.5, 0.2],
        p: 1.0 / 1.4,
    };
    let u0 = conservative(&free, &gas);
    let mesh = generate_structured(
        8,
        8,
        Rect {
            x0: -1.0,
            x1: 1.0,
            y0: -1.0,
            y1: 1.0,
        },
        false,
    )
    .unwrap();
    let tables = build_tables(2, 6).unwrap();
    let field = StateField::from_fn(&mesh, &tables, |x| {
        let g = 1e-4 * (-8.0 * (x[0] * x[0] + x[1] * x[1])).exp();
        conservative(
            &Prim {
                rho: free.rho + g,
                p: free.p + g,
                ..free
            },
            &gas,
        )
    });
    let mass = tables.mass.clone();
    let op = DgOperator::new(
        tables,
        gas,
        PenaltyConfig::default(),
        Farfield::Uniform(free),
    );
    let config = CouplingConfig {
        dt_override: None,
        bound: CflBound::Rayleigh,
        structure: None,
        reference: ForceReference {
            rho: 1.0,
            velocity: free.v,
            length: 1.0,
            point: [0.0, 0.0],
        },
        freeze_sigma: false,
    };
    let mut run = Coupled::new(mesh, op, field, config).unwrap();
    let e0 = entropy_energy(&run.state.field, u0, &run.mesh, &mass, &gas);
    let mut last = e0;
    for _ in 0..1000 {
        run.step(f64::INFINITY).unwrap();
        let e = entropy_energy(&run.state.field, u0, &run.mesh, &mass, &gas);
        assert!(e <= last * (1.0 + 1e-6), "{e} > {last}");
        last = e;
    }
    assert!(last < 0.5 * e0, "{last} vs {e0}");
}

fn cylinder_run(structure: bool, dt_override: Option<f64>) -> Coupled {
    let gas = GasParams {
        gamma: 1.4,
        prandtl: 0.72,
        mu: 0.01,
        cv: 717.5,
    };
    let c = 10.0;
    let free = Prim {
        rho: 1.0,
        v: [1.0, 0.0],
        p: c * c / 1.4,
    };
    let mesh = common::annulus(24, 5, 0.5, 4.0);
    let tables = build_tables(2, 6).unwrap();
    let field = StateField::from_fn(&mesh, &tables, |_| conservative(&free, &gas));
    let op = DgOperator::new(
        tables,
        gas,
        PenaltyConfig::default(),
        Farfield::Uniform(free),
    );
    let config = CouplingConfig {
        dt_override,
        bound: CflBound::Rayleigh,
        structure: structure
            .then(|| structural_coefficients(5.0, 1.0, 0.01, 1.0, 1.0, 1.0).unwrap()),
        reference: ForceReference {
            rho: 1.0,
            velocity: free.v,
            length: 1.0,
            point: [0.0, 0.0],
        },
        freeze_sigma: false,
    };
    Coupled::new(mesh, op, field, config).unwrap()
}

#[test]
fn fixed_body_keeps_still() {
    let mut run = cylinder_run(false, None);
    for _ in 0..5 {
        let s = run.step(f64::INFINITY).unwrap();
        assert_eq!((s.y, s.ydot), (0.0, 0.0));
        assert_eq!(run.state.v_w, [0.0, 0.0]);
    }
    assert!(run.forces.cd > 0.0);
}

#[test]
fn restart_reproduces_an_uninterrupted_run() {
    let mut whole = cylinder_run(true, None);
    let a: Vec<_> = (0..10)
        .map(|_| whole.step(f64::INFINITY).unwrap())
        .collect();

    let mut first = cylinder_run(true, None);
    let mut b: Vec<_> = (0..5).map(|_| first.step(f64::INFINITY).unwrap()).collect();
    let saved = first.state.clone();
    let fresh = cylinder_run(true, None);
    let mut resumed =
        Coupled::restore(fresh.mesh.clone(), fresh.op.clone(), fresh.config, saved).unwrap();
    // the pristine mesh supplied connectivity only
    assert_eq!(resumed.mesh.vertices, first.mesh.vertices);
    b.extend((0..5).map(|_| resumed.step(f64::INFINITY).unwrap()));

    assert_eq!(a, b);
    assert_eq!(whole.state, resumed.state);
}

#[test]
fn mesh_follows_the_body() {
    let mut run = cylinder_run(true, None);
    let x0 = run.mesh.vertices.clone();
    let mut moved = false;
    for _ in 0..10 {
        let s = run.step(f64::INFINITY).unwrap();
        assert!((run.state.displacement[1] - s.y).abs() <= 1e-14);
        moved |= s.y != 0.0;
    }
    assert!(moved);
    for (a, b) in run.mesh.vertices.iter().zip(&x0) {
        assert!((a[1] - b[1] - run.state.displacement[1]).abs() <= 1e-14);
        assert_eq!(a[0], b[0]);
    }
}

#[test]
fn estimated_steps_respect_the_cfl_bound() {
    let mut run = cylinder_run(true, None);
    for _ in 0..5 {
        let lambda = run.lambda().unwrap();
        let s = run.step(f64::INFINITY).unwrap();
        assert!(lambda * s.dt <= run.op.penalty.c_cfl * (1.0 + 1e-15));
    }
    let s = run.step(run.state.t + 1e-6).unwrap();
    assert!((s.dt - 1e-6).abs() <= 1e-18);
}

#[test]
fn failed_step_keeps_the_last_valid_state() {
    let mut run = cylinder_run(true, Some(10.0));
    let before = run.state.clone();
    let vertices = run.mesh.vertices.clone();
    let err = run.step(f64::INFINITY).unwrap_err();
    assert!(matches!(err, Error::StagePositivity { .. }), "{err}");
    assert_eq!(run.state, before);
    assert_eq!(run.mesh.vertices, vertices);
}
