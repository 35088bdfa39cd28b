//! Run drivers behind the command-line subcommands.

use crate::checkpoint;
use crate::config::{IpVariant, SolverConfig};
use crate::error::{io_error, Error, Result};
use crate::msh::load_msh;
use crate::series::{write_profile, write_rows, write_series, write_spectrum, ErrorRow, RateRow};
use crate::spectrum::{dft_spectrum, dominant_modes, Mode, Window};
use crate::vtk::write_vtk;
use dgviv_core::dg::{DgOperator, Farfield, StateField, Terms, Workspace};
use dgviv_core::mesh::{generate_structured, BoundaryTag, Mesh, Rect};
use dgviv_core::penalty::{
    element_bounds, gradient_inverse_constant, lambda_rayleigh, lambda_tilde, timestep,
    EstimatorInput,
};
use dgviv_core::physics::{conservative, GasParams, Prim};
use dgviv_core::refelem::build_tables;
use dgviv_core::time::{
    march_steady, structural_coefficients, Coupled, CouplingConfig, Sample, SteadyOptions,
};
use dgviv_core::verify::{convergence_rate, error_norms, sample_line, vorticity};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

fn output_dir(cfg: &SolverConfig) -> Result<&Path> {
    let dir = cfg.io.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(io_error(path))
}

/// One steady manufactured-solution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRun {
    pub p: usize,
    pub n: usize,
    pub h: f64,
    pub l2: f64,
    pub linf: f64,
    pub sigma_max: f64,
    pub steps: usize,
    pub residual: f64,
    /// Solver error that stopped this run; the norms are NaN then.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub variant: IpVariant,
    pub runs: Vec<ConvergenceRun>,
    pub rates: Vec<RateRow>,
}

/// Steady manufactured solution on one `n x n` mesh.
pub fn manufactured_run(
    cfg: &SolverConfig,
    variant: IpVariant,
    p: usize,
    n: usize,
) -> Result<ConvergenceRun> {
    let m = cfg
        .manufactured
        .as_ref()
        .ok_or_else(|| Error::Config("convergence needs a manufactured block".into()))?;
    let case = cfg.manufactured_case()?;
    case.validate()?;
    let mesh = generate_structured(n, n, Rect::UNIT, m.skew_layer)?;
    let tables = build_tables(p, 2 * p + 2)?;
    let quad = build_tables(p, m.source_degree.max(2 * p))?;
    let mut penalty = cfg.penalty();
    penalty.theta = variant.theta();
    let exact = move |x: [f64; 2], _t: f64| case.state(x);
    let mut op = DgOperator::new(
        tables.clone(),
        case.gas,
        penalty,
        Farfield::Function(Arc::new(exact)),
    );
    op.source = Some(DgOperator::project_source(&mesh, &tables, &quad, |x| {
        case.source(x)
    }));
    let mut field = StateField::from_fn(&mesh, &tables, |x| case.state(x));
    let outcome = march_steady(
        &op,
        &mesh,
        &mut field,
        &SteadyOptions {
            dt: cfg.time.dt_override,
            bound: cfg.time.bound.into(),
            tol: m.steady_tol,
            max_steps: m.max_steps,
            ..SteadyOptions::default()
        },
    )?;
    let e = error_norms(&field, &mesh, &tables, 2 * p + 6, 3 * p + 3, |x| {
        case.state(x)
    });
    let mut ws = Workspace::new();
    let mut scratch = vec![0.0; field.data.len()];
    op.assemble(
        &mesh,
        &field,
        0.0,
        [0.0; 2],
        Terms::ALL,
        &mut ws,
        &mut scratch,
    )?;
    Ok(ConvergenceRun {
        p,
        n,
        h: 1.0 / n as f64,
        l2: e.l2,
        linf: e.linf,
        sigma_max: ws.sigma.iter().fold(0.0, |a: f64, &b| a.max(b)),
        steps: outcome.steps,
        residual: outcome.residual,
        failure: None,
    })
}

/// Errors, least-squares rates, and penalty maxima for every configured
/// variant and order. Writes `convergence_<variant>.csv`, `rates.csv`, and
/// `summary.json`.
pub fn run_convergence(cfg: &SolverConfig) -> Result<Vec<ConvergenceReport>> {
    let m = cfg
        .manufactured
        .as_ref()
        .ok_or_else(|| Error::Config("convergence needs a manufactured block".into()))?;
    let dir = output_dir(cfg)?;
    let mut reports = Vec::new();
    for &variant in &m.variants {
        let mut runs = Vec::new();
        let mut rates = Vec::new();
        for order in &m.runs {
            let first = runs.len();
            // A diverged run is kept in the report and ends this order's
            // refinement sequence; finer meshes only diverge later.
            for &n in &order.n {
                match manufactured_run(cfg, variant, order.p, n) {
                    Ok(run) => runs.push(run),
                    Err(Error::Solver(e)) => {
                        runs.push(ConvergenceRun {
                            p: order.p,
                            n,
                            h: 1.0 / n as f64,
                            l2: f64::NAN,
                            linf: f64::NAN,
                            sigma_max: f64::NAN,
                            steps: 0,
                            residual: f64::NAN,
                            failure: Some(e.to_string()),
                        });
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            let these = &runs[first..];
            let h: Vec<f64> = these.iter().map(|r| r.h).collect();
            let l2: Vec<f64> = these.iter().map(|r| r.l2).collect();
            let linf: Vec<f64> = these.iter().map(|r| r.linf).collect();
            let failed = these.iter().any(|r| r.failure.is_some());
            let (r2, rinf) = if these.len() >= 2 && !failed {
                (convergence_rate(&l2, &h)?, convergence_rate(&linf, &h)?)
            } else {
                (f64::NAN, f64::NAN)
            };
            rates.push(RateRow {
                variant: variant.label().to_string(),
                p: order.p,
                r2,
                rinf,
                sigma_max: if failed {
                    f64::NAN
                } else {
                    these.iter().fold(0.0, |a, r| a.max(r.sigma_max))
                },
            });
        }
        write_rows(
            dir.join(format!("convergence_{}.csv", variant.label())),
            runs.iter().map(|r| ErrorRow {
                p: r.p,
                h: r.h,
                l2: r.l2,
                linf: r.linf,
            }),
        )?;
        reports.push(ConvergenceReport {
            variant,
            runs,
            rates,
        });
    }
    write_rows(
        dir.join("rates.csv"),
        reports.iter().flat_map(|r| r.rates.iter().cloned()),
    )?;
    write_json(&dir.join("summary.json"), &reports)?;
    Ok(reports)
}

fn load_mesh(cfg: &SolverConfig) -> Result<Mesh> {
    let path = cfg
        .io
        .mesh
        .as_ref()
        .ok_or_else(|| Error::Config("this run needs io.mesh".into()))?;
    load_msh(path)
}

/// Uniform free stream plus the optional vertical velocity kick.
pub fn initial_field(
    cfg: &SolverConfig,
    mesh: &Mesh,
    tables: &dgviv_core::refelem::OperatorTables,
    gas: &GasParams,
) -> Result<StateField> {
    let f = cfg.freestream()?;
    let q = f.state(gas.gamma);
    let (a, d) = (f.perturbation * f.speed(gas.gamma), f.reference_length);
    Ok(StateField::from_fn(mesh, tables, |x| {
        let bump = a * (-(x[0] * x[0] + x[1] * x[1]) / (d * d)).exp();
        conservative(
            &Prim {
                v: [q.v[0], q.v[1] + bump],
                ..q
            },
            gas,
        )
    }))
}

/// Time statistics of an unsteady run over the sampling window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnsteadySummary {
    pub case: String,
    pub steps: u64,
    pub t_final: f64,
    pub window: [f64; 2],
    pub samples: usize,
    pub mean_cd: f64,
    pub mean_cl: f64,
    /// `max |C_L|` over the window.
    pub cl_max: f64,
    pub cl_rms: f64,
    /// Dominant frequency of `C_L`.
    pub f_cl: Option<f64>,
    pub strouhal: Option<f64>,
    /// Primary oscillation frequency: of `y` when the body moves, else of
    /// `C_L`.
    pub f_prim: Option<f64>,
    /// `max |y| / D` over the window.
    pub amplitude_max: f64,
    pub f_n: Option<f64>,
    pub modes_cl: Vec<ModeRecord>,
    pub modes_y: Vec<ModeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub f: f64,
    pub mag: f64,
}

impl From<Mode> for ModeRecord {
    fn from(m: Mode) -> Self {
        ModeRecord {
            f: m.frequency,
            mag: m.magnitude,
        }
    }
}

pub struct UnsteadyOutcome {
    pub samples: Vec<Sample>,
    pub summary: UnsteadySummary,
    pub run: Coupled,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub dt_override: Option<f64>,
    pub resume: Option<PathBuf>,
}

/// Fixed cylinder (`structure` false) or elastically mounted cylinder.
pub fn run_unsteady(cfg: &SolverConfig, viv: bool, opts: &RunOptions) -> Result<UnsteadyOutcome> {
    let fs = cfg.freestream()?.clone();
    let dir = output_dir(cfg)?.to_path_buf();
    let mesh = load_mesh(cfg)?;
    if !mesh.has_tag(BoundaryTag::Wall) {
        return Err(dgviv_core::Error::NoWall.into());
    }
    let gas = cfg.gas_params();
    gas.validate()?;
    let d = &cfg.discretization;
    let tables = build_tables(d.p, d.quadrature_degree())?;
    let op = DgOperator::new(
        tables.clone(),
        gas,
        cfg.penalty(),
        Farfield::Uniform(fs.state(gas.gamma)),
    );
    let v_inf = fs.speed(gas.gamma);
    let structure = match (&cfg.viv, viv) {
        (Some(v), true) if v.motion => Some(structural_coefficients(
            v.u_star,
            v.m_star,
            v.xi,
            v_inf,
            fs.reference_length,
            fs.rho,
        )?),
        (None, true) => return Err(Error::Config("viv run needs a viv block".into())),
        _ => None,
    };
    let f_n = match (&cfg.viv, viv) {
        (Some(v), true) => Some(v_inf / (v.u_star * fs.reference_length)),
        _ => None,
    };
    let coupling = CouplingConfig {
        dt_override: opts.dt_override.or(cfg.time.dt_override),
        bound: cfg.time.bound.into(),
        structure,
        reference: cfg.force_reference()?,
        freeze_sigma: d.freeze_sigma,
    };
    let mut run = match &opts.resume {
        Some(path) => Coupled::restore(mesh, op, coupling, checkpoint::load(path)?)?,
        None => {
            let field = initial_field(cfg, &mesh, &tables, &gas)?;
            Coupled::new(mesh, op, field, coupling)?
        }
    };
    let t_end = cfg.time.t_final;
    let stride = cfg.io.series_stride as u64;
    let snapshots = cfg.io.snapshot_interval;
    let mut next_snapshot = snapshots.map(|s| (run.state.t / s).floor() * s + s);
    let mut samples = Vec::new();
    let ckpt_path = dir.join("state.ckpt");
    while run.state.t < t_end * (1.0 - 1e-14) {
        let sample = match run.step(t_end) {
            Ok(s) => s,
            Err(
                e @ (dgviv_core::Error::StagePositivity { .. }
                | dgviv_core::Error::Positivity { .. }),
            ) => {
                checkpoint::save(&ckpt_path, &run.state)?;
                write_series(dir.join("series.csv"), &samples)?;
                return Err(Error::Halted {
                    t: run.state.t,
                    checkpoint: ckpt_path,
                    source: e,
                });
            }
            Err(e) => return Err(e.into()),
        };
        if run.state.steps % stride == 0 {
            samples.push(sample);
        }
        let interval = cfg.time.checkpoint_interval;
        if interval > 0 && run.state.steps % interval == 0 {
            checkpoint::save(&ckpt_path, &run.state)?;
        }
        if let (Some(s), Some(next)) = (snapshots, next_snapshot) {
            if run.state.t >= next {
                let name = format!("snapshot_{:06}.vtk", run.state.steps);
                write_vtk(
                    dir.join(name),
                    &run.state.field,
                    run.gradients(),
                    &run.mesh,
                    &run.op.tables,
                    &run.op.gas,
                )?;
                next_snapshot = Some(next + s);
            }
        }
    }
    write_series(dir.join("series.csv"), &samples)?;
    write_vtk(
        dir.join("final.vtk"),
        &run.state.field,
        run.gradients(),
        &run.mesh,
        &run.op.tables,
        &run.op.gas,
    )?;
    if let Some(line) = &cfg.io.profile {
        let omega = vorticity(&run.state.field, run.gradients(), &run.op.gas)?;
        let profile = sample_line(
            &omega,
            &run.mesh,
            &run.op.tables,
            line.from,
            line.to,
            line.samples,
        )?;
        write_profile(dir.join("profile.csv"), &profile)?;
    }

    let case = if viv { "viv" } else { "cylinder" };
    let summary = summarize(
        case,
        &samples,
        &run,
        cfg.time.statistics_start,
        fs.reference_length,
        v_inf,
        f_n,
        structure.is_some(),
        &dir,
    )?;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(UnsteadyOutcome {
        samples,
        summary,
        run,
    })
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    case: &str,
    samples: &[Sample],
    run: &Coupled,
    start: f64,
    d: f64,
    v_inf: f64,
    f_n: Option<f64>,
    moving: bool,
    dir: &Path,
) -> Result<UnsteadySummary> {
    let window: Vec<&Sample> = samples.iter().filter(|s| s.t >= start).collect();
    let n = window.len().max(1) as f64;
    let mean = |f: fn(&Sample) -> f64| window.iter().map(|s| f(s)).sum::<f64>() / n;
    let mean_cl = mean(|s| s.cl);
    let t: Vec<f64> = window.iter().map(|s| s.t).collect();
    let cl: Vec<f64> = window.iter().map(|s| s.cl).collect();
    let y: Vec<f64> = window.iter().map(|s| s.y).collect();
    let modes = |series: &[f64], name: &str| -> Result<Vec<Mode>> {
        match dft_spectrum(&t, series, Window::Hann) {
            Ok(spec) => {
                write_spectrum(dir.join(format!("spectrum_{name}.csv")), &spec)?;
                Ok(dominant_modes(&spec, 2))
            }
            Err(dgviv_core::Error::ShortSeries) => Ok(Vec::new()),
            Err(e) => Err(e.into()),
        }
    };
    let nonzero = |m: &[Mode]| m.first().filter(|m| m.frequency > 0.0).map(|m| m.frequency);
    let modes_cl = modes(&cl, "cl")?;
    let modes_y = if moving { modes(&y, "y")? } else { Vec::new() };
    let f_cl = nonzero(&modes_cl);
    let f_prim = if moving { nonzero(&modes_y) } else { f_cl };
    Ok(UnsteadySummary {
        case: case.to_string(),
        steps: run.state.steps,
        t_final: run.state.t,
        window: [
            t.first().copied().unwrap_or(start),
            t.last().copied().unwrap_or(start),
        ],
        samples: window.len(),
        mean_cd: mean(|s| s.cd),
        mean_cl,
        cl_max: cl.iter().fold(0.0, |a: f64, v| a.max(v.abs())),
        cl_rms: (cl.iter().map(|v| (v - mean_cl).powi(2)).sum::<f64>() / n).sqrt(),
        f_cl,
        strouhal: f_cl.map(|f| f * d / v_inf),
        f_prim,
        amplitude_max: y.iter().fold(0.0, |a: f64, v| a.max(v.abs())) / d,
        f_n,
        modes_cl: modes_cl.into_iter().map(Into::into).collect(),
        modes_y: modes_y.into_iter().map(Into::into).collect(),
    })
}

/// Mesh and state for the estimator reports: the configured mesh with the
/// free stream, or the coarsest manufactured mesh with the exact solution.
fn report_setup(cfg: &SolverConfig, p: usize) -> Result<(Mesh, DgOperator, StateField)> {
    let gas = cfg.gas_params();
    let tables = build_tables(p, (2 * p + 2).max(cfg.discretization.p_f.unwrap_or(0)))?;
    if cfg.io.mesh.is_some() {
        let mesh = load_mesh(cfg)?;
        let fs = cfg.freestream()?;
        let op = DgOperator::new(
            tables.clone(),
            gas,
            cfg.penalty(),
            Farfield::Uniform(fs.state(gas.gamma)),
        );
        let field = initial_field(cfg, &mesh, &tables, &gas)?;
        return Ok((mesh, op, field));
    }
    let m = cfg
        .manufactured
        .as_ref()
        .ok_or_else(|| Error::Config("reports need io.mesh or a manufactured block".into()))?;
    let case = cfg.manufactured_case()?;
    let n = m
        .runs
        .first()
        .and_then(|r| r.n.first())
        .copied()
        .unwrap_or(4);
    let mesh = generate_structured(n, n, Rect::UNIT, m.skew_layer)?;
    let op = DgOperator::new(
        tables.clone(),
        gas,
        cfg.penalty(),
        Farfield::Function(Arc::new(move |x, _| case.state(x))),
    );
    let field = StateField::from_fn(&mesh, &tables, |x| case.state(x));
    Ok((mesh, op, field))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacePenaltyRow {
    pub face: usize,
    pub sigma: f64,
    pub gbar: f64,
    pub length: f64,
    pub boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementBoundRow {
    pub element: usize,
    pub beta: f64,
    pub beta_prime: f64,
    pub g: f64,
    pub sigma: f64,
    pub c_inv: f64,
    pub c_inv2: f64,
    pub lambda: f64,
    pub lambda_tilde: f64,
}

/// Per-face penalties (`penalty_faces.csv`) and per-element estimator terms
/// (`penalty_elements.csv`) of the initial state at the configured order.
pub fn penalty_report(cfg: &SolverConfig) -> Result<(Vec<FacePenaltyRow>, Vec<ElementBoundRow>)> {
    let dir = output_dir(cfg)?;
    let p = cfg.discretization.p;
    let (mesh, op, field) = report_setup(cfg, p)?;
    let mut ws = Workspace::new();
    let mut scratch = vec![0.0; field.data.len()];
    op.assemble(
        &mesh,
        &field,
        0.0,
        [0.0; 2],
        Terms::ALL,
        &mut ws,
        &mut scratch,
    )?;
    let faces: Vec<FacePenaltyRow> = mesh
        .faces
        .iter()
        .enumerate()
        .map(|(i, f)| FacePenaltyRow {
            face: i,
            sigma: ws.sigma[i],
            gbar: ws.gbar[i],
            length: f.length,
            boundary: f.is_boundary(),
        })
        .collect();
    let bounds = element_bounds(&EstimatorInput {
        mesh: &mesh,
        np: op.tables.np(),
        p,
        states: &field.data,
        gradients: &ws.gradients,
        face_sigma: &ws.sigma,
        v_w: [0.0; 2],
        gas: &op.gas,
        c_grad: gradient_inverse_constant(p),
    })?;
    let (c1, mu) = (op.penalty.c1, op.gas.mu);
    let elements = bounds
        .iter()
        .enumerate()
        .map(|(k, b)| {
            Ok(ElementBoundRow {
                element: k,
                beta: b.beta,
                beta_prime: b.beta_prime,
                g: b.g,
                sigma: b.sigma,
                c_inv: b.c_inv,
                c_inv2: b.c_inv2,
                lambda: b.rayleigh(),
                lambda_tilde: (2.0 * (b.lambda_a() + b.lambda_d(c1, mu, k)?)).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(dir.join("penalty_faces.csv"), faces.iter().copied())?;
    write_rows(dir.join("penalty_elements.csv"), elements.iter().copied())?;
    Ok((faces, elements))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CflRow {
    pub p: usize,
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub dt: f64,
    pub dt_tilde: f64,
}

/// Both spectral bounds and the resulting steps for `p = 1..=P`
/// (`cfl.csv`).
pub fn cfl_report(cfg: &SolverConfig) -> Result<Vec<CflRow>> {
    let dir = output_dir(cfg)?;
    let mut rows = Vec::new();
    for p in 1..=cfg.discretization.p {
        let (mesh, op, field) = report_setup(cfg, p)?;
        let mut ws = Workspace::new();
        let mut scratch = vec![0.0; field.data.len()];
        op.assemble(
            &mesh,
            &field,
            0.0,
            [0.0; 2],
            Terms::ALL,
            &mut ws,
            &mut scratch,
        )?;
        let bounds = element_bounds(&EstimatorInput {
            mesh: &mesh,
            np: op.tables.np(),
            p,
            states: &field.data,
            gradients: &ws.gradients,
            face_sigma: &ws.sigma,
            v_w: [0.0; 2],
            gas: &op.gas,
            c_grad: gradient_inverse_constant(p),
        })?;
        let lambda = lambda_rayleigh(&bounds)?;
        let lambda_t = lambda_tilde(&bounds, op.penalty.c1, op.gas.mu)?;
        rows.push(CflRow {
            p,
            lambda,
            lambda_tilde: lambda_t,
            dt: timestep(lambda, &op.penalty),
            dt_tilde: timestep(lambda_t, &op.penalty),
        });
    }
    write_rows(dir.join("cfl.csv"), rows.iter().copied())?;
    Ok(rows)
}
