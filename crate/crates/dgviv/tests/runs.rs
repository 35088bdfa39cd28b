//! Short unsteady runs on the bundled cylinder mesh.

use dgviv::checkpoint;
use dgviv::drivers::{run_unsteady, RunOptions};
use dgviv::vtk::read_vtk;
use dgviv::{Error, SolverConfig};
use std::path::{Path, PathBuf};

fn mesh_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/cylinder_coarse.msh")
}

fn config(out: &Path, steps: usize, dt: f64, viv: Option<&str>) -> SolverConfig {
    let viv = viv.map_or(String::new(), |v| format!(", \"viv\": {v}"));
    let text = format!(
        r#"{{
          "schema_version": 1,
          "discretization": {{ "p": 1 }},
          "time": {{ "dt_override": {dt}, "t_final": {t_final}, "checkpoint_interval": 2 }},
          "freestream": {{ "mach": 0.1, "rho": 1.0, "pressure": 71.42857142857143,
                          "reynolds": 100.0, "perturbation": 0.1 }},
          "io": {{ "mesh": {mesh:?}, "output_dir": {out:?} }}
          {viv}
        }}"#,
        t_final = steps as f64 * dt,
        mesh = mesh_path(),
    );
    SolverConfig::from_json(&text).unwrap()
}

fn series(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("series.csv")).unwrap()
}

#[test]
fn motion_disabled_viv_matches_fixed_cylinder() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("cyl"), tmp.path().join("viv"));
    let opts = RunOptions::default();
    run_unsteady(&config(&a, 4, 2e-5, None), false, &opts).unwrap();
    let off = r#"{ "u_star": 5.0, "motion": false }"#;
    let out = run_unsteady(&config(&b, 4, 2e-5, Some(off)), true, &opts).unwrap();
    assert_eq!(series(&a), series(&b));
    assert!(out.samples.iter().all(|s| s.y == 0.0));
    assert_eq!(out.summary.steps, 4);
}

#[test]
fn moving_body_responds_to_lift() {
    let tmp = tempfile::tempdir().unwrap();
    let on = r#"{ "u_star": 5.0, "m_star": 1.0, "xi": 0.01 }"#;
    let out = run_unsteady(
        &config(tmp.path(), 4, 2e-5, Some(on)),
        true,
        &RunOptions::default(),
    )
    .unwrap();
    assert!(out.samples.iter().any(|s| s.y != 0.0));
    // The wall vertices moved with the body.
    let dy = out.run.state.displacement[1];
    assert_eq!(dy, out.run.state.oscillator.y);
    assert!(out.summary.f_n.unwrap() > 0.0);
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 3] {
        let dir = tmp.path().join(format!("t{threads}"));
        let cfg = config(&dir, 3, 2e-5, None);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_unsteady(&cfg, false, &RunOptions::default()))
            .unwrap();
        outputs.push(series(&dir));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn resume_continues_bitwise() {
    let tmp = tempfile::tempdir().unwrap();
    let whole = tmp.path().join("whole");
    let full = run_unsteady(
        &config(&whole, 4, 2e-5, None),
        false,
        &RunOptions::default(),
    )
    .unwrap();

    let part = tmp.path().join("part");
    run_unsteady(&config(&part, 2, 2e-5, None), false, &RunOptions::default()).unwrap();
    let resume = RunOptions {
        resume: Some(part.join("state.ckpt")),
        ..RunOptions::default()
    };
    let rest = run_unsteady(&config(&part, 4, 2e-5, None), false, &resume).unwrap();
    assert_eq!(rest.samples.len(), 2);
    assert_eq!(rest.run.state, full.run.state);
    assert_eq!(rest.samples[..], full.samples[2..]);
}

#[test]
fn outputs_are_written() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_unsteady(
        &config(tmp.path(), 2, 2e-5, None),
        false,
        &RunOptions::default(),
    )
    .unwrap();
    let grid = read_vtk(tmp.path().join("final.vtk")).unwrap();
    assert_eq!(grid.cells.len(), out.run.mesh.num_elements());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("summary.json")).unwrap())
            .unwrap();
    for key in ["f_prim", "cl_max", "amplitude_max", "mean_cd", "strouhal"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    assert!(checkpoint::load(tmp.path().join("state.ckpt")).is_ok());
}

#[test]
fn blow_up_halts_with_a_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let err = run_unsteady(
        &config(tmp.path(), 10, 1e-2, None),
        false,
        &RunOptions::default(),
    )
    .err()
    .unwrap();
    let Error::Halted {
        checkpoint: path,
        t,
        ..
    } = err
    else {
        panic!("{err}");
    };
    let state = checkpoint::load(path).unwrap();
    assert_eq!(state.t, t);
}

#[test]
fn missing_wall_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(mesh_path())
        .unwrap()
        .replace("1 1 \"wall\"", "1 1 \"farfield\"");
    let mesh = tmp.path().join("nowall.msh");
    std::fs::write(&mesh, text).unwrap();
    let mut cfg = config(tmp.path(), 1, 2e-5, None);
    cfg.io.mesh = Some(mesh);
    let err = run_unsteady(&cfg, false, &RunOptions::default())
        .err()
        .unwrap();
    assert!(
        matches!(err, Error::Solver(dgviv_core::Error::NoWall)),
        "{err}"
    );
}
