use clap::{Parser, Subcommand};
use dgviv::drivers::{self, RunOptions};
use dgviv::SolverConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dgviv",
    version,
    about = "Compressible Navier-Stokes DG solver with VIV coupling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution error study.
    Convergence(Common),
    /// Flow past a fixed cylinder.
    Cylinder(Unsteady),
    /// Flow past an elastically mounted cylinder.
    Viv(Unsteady),
    /// Per-face penalties and per-element estimator terms.
    PenaltyReport(Common),
    /// Spectral bounds and time steps for each order.
    CflReport(Common),
}

#[derive(clap::Args)]
struct Unsteady {
    #[command(flatten)]
    common: Common,
    /// Fixed time step, bypassing the estimator.
    #[arg(long)]
    dt: Option<f64>,
    /// Checkpoint to resume from.
    #[arg(long)]
    resume: Option<PathBuf>,
}

fn run(cli: Cli) -> dgviv::Result<()> {
    let common = match &cli.command {
        Command::Convergence(c) | Command::PenaltyReport(c) | Command::CflReport(c) => c,
        Command::Cylinder(u) | Command::Viv(u) => &u.common,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| dgviv::Error::Config(e.to_string()))?;
    }
    let cfg = SolverConfig::load(&common.config)?;
    match &cli.command {
        Command::Convergence(_) => {
            for report in drivers::run_convergence(&cfg)? {
                for run in &report.runs {
                    if let Some(f) = &run.failure {
                        eprintln!(
                            "{} p={} n={} diverged: {f}",
                            report.variant.label(),
                            run.p,
                            run.n
                        );
                    }
                }
                for r in &report.rates {
                    println!(
                        "{} p={} r2={:.3} rinf={:.3} sigma_max={:.3e}",
                        r.variant, r.p, r.r2, r.rinf, r.sigma_max
                    );
                }
            }
        }
        Command::Cylinder(u) | Command::Viv(u) => {
            let viv = matches!(cli.command, Command::Viv(_));
            let opts = RunOptions {
                dt_override: u.dt,
                resume: u.resume.clone(),
            };
            let out = drivers::run_unsteady(&cfg, viv, &opts)?;
            println!("{}", serde_json::to_string_pretty(&out.summary)?);
        }
        Command::PenaltyReport(_) => {
            let (faces, elements) = drivers::penalty_report(&cfg)?;
            println!("{} faces, {} elements", faces.len(), elements.len());
        }
        Command::CflReport(_) => {
            for r in drivers::cfl_report(&cfg)? {
                println!(
                    "p={} lambda={:.4e} lambda_tilde={:.4e} dt={:.4e}",
                    r.p, r.lambda, r.lambda_tilde, r.dt
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
