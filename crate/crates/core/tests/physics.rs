use dgviv_core::physics::*;
use dgviv_core::Site;
use proptest::prelude::*;

const GAS: GasParams = GasParams {
    gamma: 1.4,
    prandtl: 0.72,
    mu: 0.013,
    cv: 2.5,
};

/// Analytic Euler flux Jacobian along `n` in terms of velocity and total
/// enthalpy, shifted by the grid velocity.
fn jacobian(v: [f64; 2], h: f64, n: [f64; 2], wn: f64, gamma: f64) -> [[f64; 4]; 4] {
    let g1 = gamma - 1.0;
    let k = 0.5 * (v[0] * v[0] + v[1] * v[1]);
    let vn = v[0] * n[0] + v[1] * n[1];
    let mut a = [
        [0.0, n[0], n[1], 0.0],
        [
            g1 * k * n[0] - v[0] * vn,
            vn + v[0] * n[0] - g1 * v[0] * n[0],
            v[0] * n[1] - g1 * v[1] * n[0],
            g1 * n[0],
        ],
        [
            g1 * k * n[1] - v[1] * vn,
            v[1] * n[0] - g1 * v[0] * n[1],
            vn + v[1] * n[1] - g1 * v[1] * n[1],
            g1 * n[1],
        ],
        [
            vn * (g1 * k - h),
            h * n[0] - g1 * v[0] * vn,
            h * n[1] - g1 * v[1] * vn,
            gamma * vn,
        ],
    ];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= wn;
    }
    a
}

fn matvec(a: &[[f64; 4]; 4], x: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|r| (0..4).map(|c| a[r][c] * x[c]).sum())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn subsonic_state() -> impl Strategy<Value = Prim> {
    (0.2..3.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.5..5.0f64).prop_map(|(rho, a, b, p)| {
        let c = (1.4 * p / rho).sqrt();
        Prim {
            rho,
            v: [0.7 * c * a / 2f64.sqrt(), 0.7 * c * b / 2f64.sqrt()],
            p,
        }
    })
}

fn unit_normal() -> impl Strategy<Value = [f64; 2]> {
    (0.0..std::f64::consts::TAU).prop_map(|a| [a.cos(), a.sin()])
}

fn grid_velocity() -> impl Strategy<Value = [f64; 2]> {
    (-0.3..0.3f64, -0.3..0.3f64).prop_map(|(a, b)| [a, b])
}

#[test]
fn zero_velocity_diffusion_blocks() {
    let u = [1.7, 0.0, 0.0, 4.2];
    let g = diffusion_tensor(&u, &GAS);
    let s = GAS.mu / u[0];
    let r = GAS.gamma / GAS.prandtl;
    let g11 = g[0][0];
    assert_eq!(g11[0], [0.0; 4]);
    assert!((g11[1][1] - s * 4.0 / 3.0).abs() < 1e-15);
    assert!((g11[2][2] - s).abs() < 1e-15);
    assert!((g11[3][3] - s * r).abs() < 1e-15);
    assert!((g11[3][0] + s * r * u[3] / u[0]).abs() < 1e-15);
    for blocks in g {
        for b in blocks {
            assert_eq!(b[0], [0.0; 4]);
        }
    }
    let doubled = diffusion_tensor(&u, &GAS.with_mu(2.0 * GAS.mu));
    assert_eq!(doubled[1][1][3][3], 2.0 * g[1][1][3][3]);
}

/// Smooth primitive field for the viscous-flux oracle.
fn prim_field(x: f64, y: f64) -> Prim {
    Prim {
        rho: 1.2 + 0.1 * x.sin() * y.cos(),
        v: [0.3 + 0.2 * x * y, -0.1 + 0.15 * y.sin() + 0.05 * x],
        p: 1.0 + 0.1 * x * x - 0.05 * y,
    }
}

fn fd<const N: usize>(f: impl Fn(f64, f64) -> [f64; N], x: f64, y: f64) -> [[f64; N]; 2] {
    let h = 1e-3;
    let d = |dx: f64, dy: f64| {
        let a = f(x + 2.0 * dx, y + 2.0 * dy);
        let b = f(x + dx, y + dy);
        let c = f(x - dx, y - dy);
        let e = f(x - 2.0 * dx, y - 2.0 * dy);
        std::array::from_fn(|k| (-a[k] + 8.0 * b[k] - 8.0 * c[k] + e[k]) / (12.0 * h))
    };
    [d(h, 0.0), d(0.0, h)]
}

#[test]
fn viscous_flux_matches_primitive_stress() {
    for &(x, y) in &[(0.1, 0.2), (-0.7, 1.3), (2.0, -0.4), (0.0, 0.0)] {
        let q = prim_field(x, y);
        let u = conservative(&q, &GAS);
        let grad_u = fd(|x, y| conservative(&prim_field(x, y), &GAS), x, y);
        let grad_v = fd(|x, y| prim_field(x, y).v, x, y);
        let grad_t = fd(|x, y| [prim_field(x, y).temperature(&GAS)], x, y);
        // grad_v[j][i] = d v_i / d x_j
        let div = grad_v[0][0] + grad_v[1][1];
        let tau = |i: usize, j: usize| {
            GAS.mu * (grad_v[j][i] + grad_v[i][j] - if i == j { 2.0 / 3.0 * div } else { 0.0 })
        };
        let k = GAS.mu * GAS.gamma * GAS.cv / GAS.prandtl;
        let fv = viscous_flux(&diffusion_tensor(&u, &GAS), &grad_u);
        for i in 0..2 {
            let expected = [
                0.0,
                tau(i, 0),
                tau(i, 1),
                tau(i, 0) * q.v[0] + tau(i, 1) * q.v[1] + k * grad_t[i][0],
            ];
            for c in 0..4 {
                assert!(
                    (fv[i][c] - expected[c]).abs() < 1e-8,
                    "point ({x},{y}) flux {i} comp {c}: {} vs {}",
                    fv[i][c],
                    expected[c]
                );
            }
        }
    }
}

#[test]
fn supersonic_flux_is_upwind() {
    let a = Prim {
        rho: 1.0,
        v: [3.0, 0.2],
        p: 1.0,
    };
    let b = Prim {
        rho: 0.8,
        v: [2.8, -0.1],
        p: 0.9,
    };
    let (ua, ub) = (conservative(&a, &GAS), conservative(&b, &GAS));
    let h = roe_flux(&ua, &ub, [1.0, 0.0], [0.0, 0.0], &GAS, Site::Point).unwrap();
    let f = normal_flux(&ua, a.p, [1.0, 0.0], [0.0, 0.0]);
    for k in 0..4 {
        assert!((h[k] - f[k]).abs() <= 1e-12 * f[k].abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn primitive_round_trip(q in subsonic_state()) {
        let u = conservative(&q, &GAS);
        let back = conservative(&primitive(&u, &GAS, Site::Point).unwrap(), &GAS);
        for k in 0..4 {
            prop_assert!((back[k] - u[k]).abs() <= 1e-14 * u[k].abs().max(u[3]));
        }
    }

    #[test]
    fn roe_consistency(q in subsonic_state(), n in unit_normal(), w in grid_velocity()) {
        let u = conservative(&q, &GAS);
        let h = roe_flux(&u, &u, n, w, &GAS, Site::Point).unwrap();
        let f = normal_flux(&u, q.p, n, w);
        for k in 0..4 {
            prop_assert!((h[k] - f[k]).abs() <= 1e-12 * norm(&f).max(1.0));
        }
    }

    #[test]
    fn rankine_hugoniot(a in subsonic_state(), b in subsonic_state(), n in unit_normal(), w in grid_velocity()) {
        let (ua, ub) = (conservative(&a, &GAS), conservative(&b, &GAS));
        let avg = roe_average(&a, &b, &GAS, Site::Point).unwrap();
        let wn = w[0] * n[0] + w[1] * n[1];
        let jac = jacobian(avg.v, avg.h, n, wn, GAS.gamma);
        let du: [f64; 4] = std::array::from_fn(|k| ua[k] - ub[k]);
        let adu = matvec(&jac, &du);
        let fa = normal_flux(&ua, a.p, n, w);
        let fb = normal_flux(&ub, b.p, n, w);
        let res: Vec<f64> = (0..4).map(|k| fa[k] - fb[k] - adu[k]).collect();
        let scale = norm(&fa).max(norm(&fb));
        prop_assert!(norm(&res) <= 1e-10 * scale);
        // wave-strength evaluation agrees with the matrix
        let waves = roe_matrix_apply(&avg, &b, &a, n, w, false);
        for k in 0..4 {
            prop_assert!((waves[k] - adu[k]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn roe_rotational_equivariance(a in subsonic_state(), b in subsonic_state(), n in unit_normal(),
                                   w in grid_velocity(), phi in 0.0..std::f64::consts::TAU) {
        let rot = |v: [f64; 2]| [phi.cos() * v[0] - phi.sin() * v[1], phi.sin() * v[0] + phi.cos() * v[1]];
        let rp = |q: Prim| Prim { v: rot(q.v), ..q };
        let h = roe_flux(&conservative(&a, &GAS), &conservative(&b, &GAS), n, w, &GAS, Site::Point).unwrap();
        let hr = roe_flux(&conservative(&rp(a), &GAS), &conservative(&rp(b), &GAS), rot(n), rot(w), &GAS, Site::Point).unwrap();
        let m = rot([h[1], h[2]]);
        let scale = norm(&h).max(1.0);
        prop_assert!((hr[0] - h[0]).abs() <= 1e-10 * scale);
        prop_assert!((hr[1] - m[0]).abs() <= 1e-10 * scale);
        prop_assert!((hr[2] - m[1]).abs() <= 1e-10 * scale);
        prop_assert!((hr[3] - h[3]).abs() <= 1e-10 * scale);
    }

    #[test]
    fn viscous_flux_is_linear_in_gradient(q in subsonic_state(), g1 in prop::array::uniform8(-2.0..2.0f64),
                                          g2 in prop::array::uniform8(-2.0..2.0f64), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let u = conservative(&q, &GAS);
        let g = diffusion_tensor(&u, &GAS);
        let pair = |v: [f64; 8]| [[v[0], v[1], v[2], v[3]], [v[4], v[5], v[6], v[7]]];
        let mix: [f64; 8] = std::array::from_fn(|k| a * g1[k] + b * g2[k]);
        let lhs = viscous_flux(&g, &pair(mix));
        let f1 = viscous_flux(&g, &pair(g1));
        let f2 = viscous_flux(&g, &pair(g2));
        for i in 0..2 {
            for k in 0..4 {
                let rhs = a * f1[i][k] + b * f2[i][k];
                prop_assert!((lhs[i][k] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn lift_is_adjoint_of_normal_flux(q in subsonic_state(), n in unit_normal(),
                                      grad in prop::array::uniform8(-2.0..2.0f64), jump in prop::array::uniform4(-1.0..1.0f64)) {
        let u = conservative(&q, &GAS);
        let g = diffusion_tensor(&u, &GAS);
        let grad = [[grad[0], grad[1], grad[2], grad[3]], [grad[4], grad[5], grad[6], grad[7]]];
        let fv = viscous_flux(&g, &grad);
        let lhs: f64 = (0..4).map(|k| (fv[0][k] * n[0] + fv[1][k] * n[1]) * jump[k]).sum();
        let lift = symmetrization_lift(&g, n, &jump);
        let rhs: f64 = (0..2).map(|j| (0..4).map(|k| grad[j][k] * lift[j][k]).sum::<f64>()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn direct_viscous_flux_matches_tensor(q in subsonic_state(), grad in prop::array::uniform8(-50.0..50.0f64)) {
        let u = conservative(&q, &GAS);
        let grad = [[grad[0], grad[1], grad[2], grad[3]], [grad[4], grad[5], grad[6], grad[7]]];
        let a = viscous_flux(&diffusion_tensor(&u, &GAS), &grad);
        let b = viscous_flux_direct(&u, &grad, &GAS);
        let scale = a.iter().flatten().fold(1e-300f64, |m, v| m.max(v.abs()));
        for i in 0..2 {
            for k in 0..4 {
                prop_assert!((a[i][k] - b[i][k]).abs() <= 1e-11 * scale, "{:?} vs {:?}", a, b);
            }
        }
    }
}
