//! Versioned JSON run configuration. Unknown keys are rejected.
//!
//! Units are SI. The viscosity is either given directly or derived from the
//! Reynolds number of the free stream, whose velocity follows from the Mach
//! number and the free-stream sound speed.

use crate::error::{io_error, Error, Result};
use dgviv_core::penalty::PenaltyConfig;
use dgviv_core::physics::{GasParams, Prim};
use dgviv_core::time::CflBound;
use dgviv_core::verify::{ForceReference, ManufacturedCase};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub gas: GasConfig,
    pub discretization: Discretization,
    pub time: TimeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freestream: Option<Freestream>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manufactured: Option<ManufacturedConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viv: Option<VivConfig>,
    #[serde(default)]
    pub io: IoConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasConfig {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_prandtl")]
    pub prandtl: f64,
    /// Dynamic viscosity; derived from `freestream.reynolds` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default = "default_cv")]
    pub cv: f64,
}

impl Default for GasConfig {
    fn default() -> Self {
        GasConfig {
            gamma: default_gamma(),
            prandtl: default_prandtl(),
            mu: None,
            cv: default_cv(),
        }
    }
}

fn default_gamma() -> f64 {
    1.4
}
fn default_prandtl() -> f64 {
    0.72
}
fn default_cv() -> f64 {
    717.5
}

/// Interior-penalty variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IpVariant {
    Symmetric,
    Incomplete,
    NonSymmetric,
}

impl IpVariant {
    pub fn theta(self) -> f64 {
        match self {
            IpVariant::Symmetric => 1.0,
            IpVariant::Incomplete => 0.0,
            IpVariant::NonSymmetric => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IpVariant::Symmetric => "sip",
            IpVariant::Incomplete => "iip",
            IpVariant::NonSymmetric => "nip",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Rayleigh,
    OperatorNorm,
}

impl From<BoundKind> for CflBound {
    fn from(b: BoundKind) -> Self {
        match b {
            BoundKind::Rayleigh => CflBound::Rayleigh,
            BoundKind::OperatorNorm => CflBound::OperatorNorm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub p: usize,
    /// Cubature degree; `2p + 2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_f: Option<usize>,
    #[serde(default = "default_variant")]
    pub variant: IpVariant,
    #[serde(default = "default_c1")]
    pub c1: f64,
    /// Keep each step's initial penalties for all its stages.
    #[serde(default)]
    pub freeze_sigma: bool,
}

fn default_variant() -> IpVariant {
    IpVariant::Incomplete
}
fn default_c1() -> f64 {
    0.01
}

impl Discretization {
    pub fn quadrature_degree(&self) -> usize {
        self.p_f.unwrap_or(2 * self.p + 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default = "default_cfl")]
    pub c_cfl: f64,
    #[serde(default = "default_bound")]
    pub bound: BoundKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_override: Option<f64>,
    #[serde(default)]
    pub t_final: f64,
    /// Steps between checkpoints; 0 disables them.
    #[serde(default)]
    pub checkpoint_interval: u64,
    /// Statistics and spectra use samples with `t >= statistics_start`.
    #[serde(default)]
    pub statistics_start: f64,
}

fn default_cfl() -> f64 {
    0.8
}
fn default_bound() -> BoundKind {
    BoundKind::Rayleigh
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Freestream {
    pub mach: f64,
    pub rho: f64,
    pub pressure: f64,
    /// Flow angle from the x axis in degrees.
    #[serde(default)]
    pub angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reynolds: Option<f64>,
    /// Body diameter `D`: the reference length of the coefficients, the
    /// Reynolds number, and the Strouhal number.
    #[serde(default = "default_length")]
    pub reference_length: f64,
    /// Relative amplitude of an antisymmetric vertical velocity kick
    /// `v = a |v_inf| exp(-r^2 / D^2)` added to the initial field to shorten
    /// the symmetric start-up of the wake.
    #[serde(default)]
    pub perturbation: f64,
}

fn default_length() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedConfig {
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_c2")]
    pub c2: f64,
    /// Polynomial orders and the structured `n x n` meshes used for each.
    pub runs: Vec<OrderRun>,
    #[serde(default = "default_variants")]
    pub variants: Vec<IpVariant>,
    #[serde(default)]
    pub skew_layer: bool,
    /// Degree of the cubature that projects the source.
    #[serde(default = "default_source_degree")]
    pub source_degree: usize,
    #[serde(default = "default_steady_tol")]
    pub steady_tol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderRun {
    pub p: usize,
    pub n: Vec<usize>,
}

fn default_kappa() -> f64 {
    25.0
}
fn default_c2() -> f64 {
    200.0
}
fn default_variants() -> Vec<IpVariant> {
    vec![IpVariant::Incomplete, IpVariant::Symmetric]
}
fn default_source_degree() -> usize {
    25
}
fn default_steady_tol() -> f64 {
    1e-8
}
fn default_max_steps() -> usize {
    200_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VivConfig {
    pub u_star: f64,
    #[serde(default = "default_m_star")]
    pub m_star: f64,
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// With motion disabled the body stays fixed.
    #[serde(default = "default_true")]
    pub motion: bool,
}

fn default_m_star() -> f64 {
    1.0
}
fn default_xi() -> f64 {
    0.01
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    /// Mesh file, relative to the configuration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Every `series_stride`-th step is written to the time series.
    #[serde(default = "default_stride")]
    pub series_stride: usize,
    /// Simulated time between VTK snapshots; none when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_interval: Option<f64>,
    /// Segment for the final vorticity profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<LineProfile>,
}

impl Default for IoConfig {
    fn default() -> Self {
        IoConfig {
            mesh: None,
            output_dir: default_output(),
            series_stride: default_stride(),
            snapshot_interval: None,
            profile: None,
        }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineProfile {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub samples: usize,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

impl Freestream {
    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.pressure / self.rho).sqrt()
    }

    pub fn speed(&self, gamma: f64) -> f64 {
        self.mach * self.sound_speed(gamma)
    }

    pub fn velocity(&self, gamma: f64) -> [f64; 2] {
        let (s, c) = self.angle.to_radians().sin_cos();
        let v = self.speed(gamma);
        [v * c, v * s]
    }

    pub fn state(&self, gamma: f64) -> Prim {
        Prim {
            rho: self.rho,
            v: self.velocity(gamma),
            p: self.pressure,
        }
    }
}

impl SolverConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SolverConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Loads a configuration and resolves relative paths against its
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(m) = &cfg.io.mesh {
            cfg.io.mesh = Some(base.join(m));
        }
        cfg.io.output_dir = base.join(&cfg.io.output_dir);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let g = &self.gas;
        if !(g.gamma > 1.0) {
            return Err(invalid("gamma must exceed 1"));
        }
        positive("prandtl", g.prandtl)?;
        positive("cv", g.cv)?;
        if let Some(mu) = g.mu {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(invalid("mu must be non-negative"));
            }
        }
        let d = &self.discretization;
        if !(1..=9).contains(&d.p) {
            return Err(invalid(format!("p = {} outside 1..=9", d.p)));
        }
        if d.quadrature_degree() < 2 * d.p {
            return Err(invalid("p_f must be at least 2p"));
        }
        if !(d.c1 >= 0.0) {
            return Err(invalid("c1 must be non-negative"));
        }
        let t = &self.time;
        positive("c_cfl", t.c_cfl)?;
        if let Some(dt) = t.dt_override {
            positive("dt_override", dt)?;
        }
        if !(t.t_final >= 0.0) || !(t.statistics_start >= 0.0) {
            return Err(invalid("t_final and statistics_start must be non-negative"));
        }
        if let Some(f) = &self.freestream {
            positive("mach", f.mach)?;
            positive("rho", f.rho)?;
            positive("pressure", f.pressure)?;
            positive("reference_length", f.reference_length)?;
            if let Some(re) = f.reynolds {
                positive("reynolds", re)?;
            }
            if !f.angle.is_finite() || !f.perturbation.is_finite() {
                return Err(invalid("angle and perturbation must be finite"));
            }
        }
        match (g.mu, self.freestream.as_ref().and_then(|f| f.reynolds)) {
            (Some(_), Some(_)) => return Err(invalid("give either gas.mu or freestream.reynolds")),
            (None, None) => return Err(invalid("gas.mu or freestream.reynolds is required")),
            _ => {}
        }
        if let Some(m) = &self.manufactured {
            if !(m.c2 > 1.0) {
                return Err(invalid("manufactured c2 must exceed 1"));
            }
            if m.runs.is_empty() || m.variants.is_empty() {
                return Err(invalid("manufactured study needs runs and variants"));
            }
            for r in &m.runs {
                if !(1..=9).contains(&r.p) || r.n.is_empty() || r.n.contains(&0) {
                    return Err(invalid("each run needs 1 <= p <= 9 and mesh sizes n >= 1"));
                }
            }
            positive("steady_tol", m.steady_tol)?;
        }
        if let Some(v) = &self.viv {
            positive("u_star", v.u_star)?;
            positive("m_star", v.m_star)?;
            if !(v.xi >= 0.0) {
                return Err(invalid("xi must be non-negative"));
            }
        }
        if self.io.series_stride == 0 {
            return Err(invalid("series_stride must be at least 1"));
        }
        if let Some(s) = self.io.snapshot_interval {
            positive("snapshot_interval", s)?;
        }
        Ok(())
    }

    pub fn gas_params(&self) -> GasParams {
        let g = &self.gas;
        let mu = match (g.mu, &self.freestream) {
            (Some(mu), _) => mu,
            (None, Some(f)) => {
                let re = f.reynolds.unwrap_or(f64::INFINITY);
                f.rho * f.speed(g.gamma) * f.reference_length / re
            }
            (None, None) => 0.0,
        };
        GasParams {
            gamma: g.gamma,
            prandtl: g.prandtl,
            mu,
            cv: g.cv,
        }
    }

    pub fn penalty(&self) -> PenaltyConfig {
        PenaltyConfig {
            theta: self.discretization.variant.theta(),
            c1: self.discretization.c1,
            c_cfl: self.time.c_cfl,
            ..PenaltyConfig::default()
        }
    }

    pub fn freestream(&self) -> Result<&Freestream> {
        self.freestream
            .as_ref()
            .ok_or_else(|| invalid("this run needs a freestream block"))
    }

    pub fn manufactured_case(&self) -> Result<ManufacturedCase> {
        let m = self
            .manufactured
            .as_ref()
            .ok_or_else(|| invalid("this run needs a manufactured block"))?;
        Ok(ManufacturedCase {
            kappa: m.kappa,
            c2: m.c2,
            gas: self.gas_params(),
        })
    }

    /// Coefficient normalization: free-stream density and velocity, `D`,
    /// moments about the origin.
    pub fn force_reference(&self) -> Result<ForceReference> {
        let f = self.freestream()?;
        Ok(ForceReference {
            rho: f.rho,
            velocity: f.velocity(self.gas.gamma),
            length: f.reference_length,
            point: [0.0, 0.0],
        })
    }
}
