//! Experiment configuration: a single TOML file with sections, schema
//! version 1. Unknown keys are rejected so config drift is caught early.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use roughflow_core::flux::FluxLaw;
use roughflow_core::forge::RoughFieldSpec;
use roughflow_core::grid::{GridSpec, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Seminorm,
    Commutator,
    Convergence,
    BesovCheck,
    RegularityEnvelope,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Seminorm => "seminorm",
            ExperimentKind::Commutator => "commutator",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::BesovCheck => "besov-check",
            ExperimentKind::RegularityEnvelope => "regularity-envelope",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub kind: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub grid: GridSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub flux: FluxSection,
    #[serde(default)]
    pub velocity: VelocitySection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub ladder: LadderSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub d: usize,
    pub n: usize,
    /// time step; alternative to `cfl`
    pub dt: Option<f64>,
    /// dt = cfl * dx / (sup|a| * lip(f)), applied per experiment
    pub cfl: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    /// upwind | lax-friedrichs | centered
    pub name: String,
    pub nu: f64,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection { name: "lax-friedrichs".into(), nu: 0.25 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluxSection {
    /// linear | burgers | logistic | piecewise-linear
    pub kind: String,
    pub u_c: f64,
    pub u_max: f64,
    pub points: Vec<(f64, f64)>,
}

impl Default for FluxSection {
    fn default() -> Self {
        FluxSection { kind: "linear".into(), u_c: 1.0, u_max: 1.0, points: Vec::new() }
    }
}

impl FluxSection {
    pub fn build(&self) -> Result<FluxLaw> {
        match self.kind.as_str() {
            "linear" => Ok(FluxLaw::linear()),
            "burgers" => Ok(FluxLaw::burgers(self.u_max)),
            "logistic" => Ok(FluxLaw::logistic(self.u_c)),
            "piecewise-linear" => {
                if self.points.len() < 2 {
                    return Err(CliError::Config("piecewise-linear flux needs points".into()));
                }
                Ok(FluxLaw::piecewise_linear(self.points.clone()))
            }
            other => Err(CliError::Config(format!("unknown flux kind: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VelocitySection {
    /// spectral | poisson | constant | file
    pub source: String,
    pub beta: f64,
    pub divfree: bool,
    pub amplitude: f64,
    pub log_damping: f64,
    /// rescale so max component magnitude hits this value (0 = off)
    pub scale_to_max: f64,
    /// flips the sign of the field (bridges scheme orientation to oracles)
    pub flip_sign: bool,
    pub value: Vec<f64>,
    pub path: Option<PathBuf>,
    /// poisson coupling response: g(u) = coupling_scale * u
    pub coupling_scale: f64,
}

impl Default for VelocitySection {
    fn default() -> Self {
        VelocitySection {
            source: "spectral".into(),
            beta: 1.5,
            divfree: false,
            amplitude: 1.0,
            log_damping: 0.0,
            scale_to_max: 0.0,
            flip_sign: false,
            value: vec![1.0],
            path: None,
            coupling_scale: 1.0,
        }
    }
}

impl VelocitySection {
    pub fn rough_spec(&self, seed: u64) -> RoughFieldSpec {
        let mut spec = RoughFieldSpec::new(self.beta, seed, self.divfree);
        spec.amplitude = self.amplitude;
        spec.log_damping = self.log_damping;
        spec
    }

    pub fn build(&self, grid: &GridSpec, seed: u64, u0: &ScalarField) -> Result<VectorField> {
        let mut field = match self.source.as_str() {
            "spectral" => roughflow_core::forge::spectral_field(&self.rough_spec(seed), grid)?,
            "poisson" => {
                let scale = self.coupling_scale;
                roughflow_core::forge::poisson_coupling(u0, move |v| scale * v)?
            }
            "constant" => {
                if self.value.len() != grid.dim() {
                    return Err(CliError::Config(format!(
                        "constant velocity needs {} components",
                        grid.dim()
                    )));
                }
                VectorField::constant(*grid, &self.value)
            }
            "file" => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| CliError::Config("velocity.path missing".into()))?;
                if !path.exists() {
                    return Err(CliError::Config(format!(
                        "velocity file {} does not exist",
                        path.display()
                    )));
                }
                roughflow_core::io::read_vector_csv(path, grid.dt())?
            }
            other => return Err(CliError::Config(format!("unknown velocity source: {other}"))),
        };
        if self.scale_to_max > 0.0 {
            let m = field.max_component();
            if m > 0.0 {
                field = field.scale(self.scale_to_max / m);
            }
        }
        if self.flip_sign {
            field = field.scale(-1.0);
        }
        Ok(field)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSection {
    /// spectral | indicator | mode | riemann | constant
    pub kind: String,
    pub beta: f64,
    pub amplitude: f64,
    pub log_damping: f64,
    /// affine range mapping for density-like data
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub mode: i64,
    /// riemann profile: `value` on [jump_up, jump_down), zero elsewhere
    pub jump_up: f64,
    pub jump_down: f64,
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection {
            kind: "spectral".into(),
            beta: 2.0,
            amplitude: 1.0,
            log_damping: 0.0,
            lo: 0.0,
            hi: 1.0,
            value: 0.5,
            mode: 1,
            jump_up: 0.05,
            jump_down: 0.35,
        }
    }
}

impl InitSection {
    pub fn build(&self, grid: &GridSpec, seed: u64) -> Result<ScalarField> {
        match self.kind.as_str() {
            "spectral" => {
                let mut spec = RoughFieldSpec::new(self.beta, seed, false);
                spec.amplitude = self.amplitude;
                spec.log_damping = self.log_damping;
                let base = roughflow_core::forge::spectral_scalar(&spec, grid, "init");
                Ok(map_to_range(&base, self.lo, self.hi))
            }
            "indicator" => Ok(ScalarField::from_fn(*grid, |x| {
                if x[0] >= self.jump_up && x[0] < self.jump_down {
                    self.value
                } else {
                    0.0
                }
            })),
            "mode" => {
                let m = self.mode as f64;
                let amp = self.amplitude;
                Ok(ScalarField::from_fn(*grid, move |x| {
                    amp * (std::f64::consts::TAU * m * x[0]).cos()
                }))
            }
            "riemann" => Ok(ScalarField::from_fn(*grid, |x| {
                if x[0] >= self.jump_up && x[0] < self.jump_down {
                    self.value
                } else {
                    0.0
                }
            })),
            "constant" => Ok(ScalarField::constant(*grid, self.value)),
            other => Err(CliError::Config(format!("unknown init kind: {other}"))),
        }
    }
}

/// Affine map of a field onto [lo, hi].
pub fn map_to_range(base: &ScalarField, lo: f64, hi: f64) -> ScalarField {
    let bmin = base.min();
    let bmax = base.max();
    let span = (bmax - bmin).max(1e-300);
    ScalarField::new(
        *base.grid(),
        base.values().iter().map(|v| lo + (hi - lo) * (v - bmin) / span).collect(),
    )
    .expect("range mapping keeps values finite")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderSection {
    pub alpha: f64,
    pub theta: f64,
    pub p: f64,
    pub q: f64,
    /// explicit dyadic ladder h = 2^-h_max_pow .. 2^-h_min_pow (commutator,
    /// besov sweeps); 0 = derive from alpha
    pub h_max_pow: i32,
    pub h_min_pow: i32,
}

impl Default for LadderSection {
    fn default() -> Self {
        LadderSection { alpha: 0.5, theta: 0.5, p: 2.0, q: 2.0, h_max_pow: 3, h_min_pow: 10 }
    }
}

impl LadderSection {
    pub fn explicit_ladder(&self) -> Vec<f64> {
        (self.h_max_pow..=self.h_min_pow).map(|m| 2.0f64.powi(-m)).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub t_final: f64,
    pub steps: usize,
    pub trials: usize,
    pub refinements: Vec<usize>,
    /// record the semi-norm at this many equispaced times (0 = every step)
    pub sample_times: usize,
    /// fields averaged per point in scaling sweeps
    pub fields: usize,
    /// commutator: cancellation | control | report
    pub branch: String,
    /// convergence: self | characteristics | riemann
    pub compare: String,
    /// envelope: this branch is the non-monotone control expected to blow up
    pub expect_growth: bool,
    /// convergence: required fitted decay order (0 = only monotone decrease)
    pub min_order: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            t_final: 0.25,
            steps: 0,
            trials: 1,
            refinements: Vec::new(),
            sample_times: 32,
            fields: 20,
            branch: "report".into(),
            compare: "self".into(),
            expect_growth: false,
            min_order: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksSection {
    pub mass: bool,
    pub order: bool,
    pub ledger: bool,
    pub max_principle: bool,
    pub moment: bool,
    pub axioms: bool,
    pub entropy: bool,
    /// expect the order check to fail on most trials (negative control)
    pub expect_order_violation: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// csv | json | svg
    pub format: String,
    /// dump the first trial's velocity and final density in the field layout
    pub save_fields: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), format: "csv".into(), save_fields: false }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(CliError::Config(format!(
                "unsupported config version {}",
                self.version
            )));
        }
        if self.grid.d == 0 || self.grid.d > 2 {
            return Err(CliError::Config("grid.d must be 1 or 2".into()));
        }
        if !self.grid.n.is_power_of_two() {
            return Err(CliError::Config("grid.n must be a power of two".into()));
        }
        if self.grid.dt.is_none() && self.grid.cfl.is_none() {
            return Err(CliError::Config("set grid.dt or grid.cfl".into()));
        }
        if let Some(dt) = self.grid.dt {
            // NaN fails this comparison too
            if dt.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(CliError::Config("grid.dt must be positive".into()));
            }
        }
        if !(self.ladder.alpha > 0.0 && self.ladder.alpha <= 1.0) {
            return Err(CliError::Config("ladder.alpha must be in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.ladder.theta) {
            return Err(CliError::Config("ladder.theta must be in [0, 1]".into()));
        }
        if self.ladder.p < 1.0 || self.ladder.q < 1.0 {
            return Err(CliError::Config("ladder exponents must be >= 1".into()));
        }
        let known = ["csv", "json", "svg"];
        if !known.contains(&self.output.format.as_str()) {
            return Err(CliError::Config(format!(
                "output.format must be one of {known:?}"
            )));
        }
        // "random" defers the flux draw to the per-trial RNG
        if self.flux.kind != "random" {
            self.flux.build()?;
        }
        if let Some(path) = &self.velocity.path {
            if self.velocity.source == "file" && !path.exists() {
                return Err(CliError::Config(format!(
                    "velocity file {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    /// Canonical TOML serialization hashed for reproducibility records.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = toml::to_string(self).unwrap_or_default();
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let out = hasher.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Grid with the time step resolved: either explicit dt, or
    /// `cfl * dx / speed_scale`.
    pub fn grid_with_speed(&self, speed_scale: f64) -> Result<GridSpec> {
        let dx = 1.0 / self.grid.n as f64;
        let dt = match (self.grid.dt, self.grid.cfl) {
            (Some(dt), _) => dt,
            (None, Some(cfl)) => cfl * dx / speed_scale.max(1e-12),
            _ => unreachable!("validated"),
        };
        Ok(GridSpec::new(self.grid.d, self.grid.n, dt)?)
    }

    pub fn build_scheme(
        &self,
        grid: GridSpec,
        flux: FluxLaw,
    ) -> Result<roughflow_core::scheme::SchemeDef> {
        Ok(match self.scheme.name.as_str() {
            "upwind" => roughflow_core::scheme::SchemeDef::upwind(grid, flux),
            "lax-friedrichs" => {
                roughflow_core::scheme::SchemeDef::lax_friedrichs(grid, flux, self.scheme.nu)?
            }
            "centered" => roughflow_core::scheme::SchemeDef::centered_control(grid, flux),
            other => return Err(CliError::Config(format!("unknown scheme: {other}"))),
        })
    }
}
