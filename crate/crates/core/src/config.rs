//! Run configuration read from TOML. Every field has a default, so an empty
//! file (or no file) is a valid configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridRef};
use crate::solver::{DtPolicy, GeneratorParams};
use crate::verify::RunParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub data: DataConfig,
    pub time: TimeConfig,
    pub output: OutputConfig,
    pub experiments: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lx: f64,
    pub nx: usize,
    /// Defaults to `10 sqrt(theta_e)`.
    pub ymax: Option<f64>,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub theta_e: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub seed: u64,
    pub u_norm: f64,
    pub modes: usize,
    pub allow_out_of_theory: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DtMode {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub policy: DtMode,
    /// Fixed step, or the cap of the adaptive step.
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub norm_every: usize,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Radius-audit slack as a fraction of `delta`.
    pub radius_tolerance: f64,
    /// Upper bound on the a priori ratio.
    pub ratio_bound: f64,
    /// Upper bound on `||theta_Phi||_{L~inf B^{1,1}} / epsilon`.
    pub smallness_bound: f64,
    pub sigma: f64,
    pub perturbation_seed: u64,
    pub uniqueness_t_end: f64,
    pub nus: Vec<f64>,
    pub nu_t_end: f64,
    pub nu_spread_bound: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lx: 2.0 * std::f64::consts::PI,
            nx: 32,
            ymax: None,
            ny: 128,
        }
    }
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            theta_e: 1.0,
            nu: 0.0,
            epsilon: 0.1,
            delta: 1.0,
            lambda: 1.0,
        }
    }
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            u_norm: 0.1,
            modes: 10,
            allow_out_of_theory: false,
        }
    }
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            policy: DtMode::Fixed,
            dt: 1e-3,
            t_end: 1.0,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "reports".to_string(),
            norm_every: 50,
            snapshot_every: 0,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            radius_tolerance: 0.1,
            ratio_bound: 2.1,
            smallness_bound: 1.0,
            sigma: 1e-6,
            perturbation_seed: 8,
            uniqueness_t_end: 0.5,
            nus: vec![1e-2, 5e-3, 2.5e-3],
            nu_t_end: 0.5,
            nu_spread_bound: 1.1,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            physics: PhysicsConfig::default(),
            data: DataConfig::default(),
            time: TimeConfig::default(),
            output: OutputConfig::default(),
            experiments: ExperimentConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be nonnegative and finite, got {v}"
        )))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn ymax(&self) -> f64 {
        self.grid.ymax.unwrap_or(10.0 * self.physics.theta_e.sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.physics;
        positive("grid.lx", self.grid.lx)?;
        positive("grid.ymax", self.ymax())?;
        positive("physics.theta_e", p.theta_e)?;
        nonneg("physics.nu", p.nu)?;
        nonneg("physics.epsilon", p.epsilon)?;
        positive("physics.delta", p.delta)?;
        positive("physics.lambda", p.lambda)?;
        nonneg("data.u_norm", self.data.u_norm)?;
        positive("time.dt", self.time.dt)?;
        positive("time.t_end", self.time.t_end)?;
        if p.epsilon >= p.theta_e && !self.data.allow_out_of_theory {
            return Err(Error::Config(format!(
                "physics.epsilon = {} must be below theta_e = {} (set data.allow_out_of_theory to override)",
                p.epsilon, p.theta_e
            )));
        }
        let e = &self.experiments;
        nonneg("experiments.radius_tolerance", e.radius_tolerance)?;
        positive("experiments.ratio_bound", e.ratio_bound)?;
        positive("experiments.smallness_bound", e.smallness_bound)?;
        nonneg("experiments.sigma", e.sigma)?;
        positive("experiments.uniqueness_t_end", e.uniqueness_t_end)?;
        positive("experiments.nu_t_end", e.nu_t_end)?;
        positive("experiments.nu_spread_bound", e.nu_spread_bound)?;
        for &nu in &e.nus {
            positive("experiments.nus", nu)?;
        }
        if !e.nus.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::Config(
                "experiments.nus must be strictly decreasing".into(),
            ));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<GridRef> {
        Grid::new(self.grid.lx, self.grid.nx, self.ymax(), self.grid.ny)
    }

    pub fn generator(&self) -> GeneratorParams {
        GeneratorParams {
            u_norm: self.data.u_norm,
            modes: self.data.modes,
            allow_out_of_theory: self.data.allow_out_of_theory,
            ..GeneratorParams::new(
                self.physics.delta,
                self.physics.epsilon,
                self.physics.theta_e,
                self.data.seed,
            )
        }
    }

    pub fn run_params(&self) -> RunParams {
        RunParams {
            theta_e: self.physics.theta_e,
            nu: self.physics.nu,
            delta: self.physics.delta,
            lambda: self.physics.lambda,
            dt: match self.time.policy {
                DtMode::Fixed => DtPolicy::Fixed(self.time.dt),
                DtMode::Adaptive => DtPolicy::Adaptive { cap: self.time.dt },
            },
            t_end: self.time.t_end,
            norm_every: self.output.norm_every,
            snapshot_every: self.output.snapshot_every,
            audit_tolerance: self.experiments.radius_tolerance,
        }
    }
}
