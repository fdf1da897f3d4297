//! Versioned JSON problem configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constitutive::MaterialParams;
use crate::error::{Error, Result};
use crate::experiments::Scenario;
use crate::loading::{BCSpec, LoadingSpec, Profile};
use crate::nonlinear_solver::SolverSettings;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub tau: f64,
    pub t_final: f64,
    /// Times written to `trajectory.csv`; empty means every step.
    #[serde(default)]
    pub checkpoints: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub u0: Profile,
    pub rho0: Profile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub tau: f64,
    pub t_final: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            tau: 0.01,
            t_final: 50.0,
        }
    }
}

fn default_eps_list() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

fn default_moser_levels() -> u32 {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema_version: u32,
    pub material: MaterialParams<f64>,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub loading: LoadingSpec,
    pub initial: InitialConfig,
    #[serde(default)]
    pub boundary: BCSpec,
    pub eps: f64,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub decay: DecayConfig,
    #[serde(default = "default_moser_levels")]
    pub moser_levels: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl ProblemConfig {
    /// Field-level checks; material checks are delegated to the material model.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errs.push(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            ));
        }
        if let Err(Error::InvalidParams(v)) = self.material.validate() {
            errs.extend(v.into_iter().map(|m| format!("material: {m}")));
        }
        if self.material.dim != 1 {
            errs.push(format!(
                "material.dim: the solvers are one-dimensional (got {})",
                self.material.dim
            ));
        }
        if self.grid.n_cells < 4 {
            errs.push(format!("grid.n_cells: must be >= 4 (got {})", self.grid.n_cells));
        }
        let t = &self.time;
        if !(t.tau > 0.0 && t.tau.is_finite()) {
            errs.push(format!("time.tau: must be > 0 (got {})", t.tau));
        }
        if !(t.t_final > 0.0 && t.t_final.is_finite()) {
            errs.push(format!("time.t_final: must be > 0 (got {})", t.t_final));
        }
        if t.checkpoints.iter().any(|c| !(*c >= 0.0 && *c <= t.t_final)) {
            errs.push("time.checkpoints: every entry must lie in [0, t_final]".into());
        }
        if t.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            errs.push("time.checkpoints: must be strictly increasing".into());
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            errs.push(format!("eps: must lie in (0, 1] (got {})", self.eps));
        }
        if self.eps_list.len() < 3 {
            errs.push(format!(
                "eps_list: needs at least 3 entries (got {})",
                self.eps_list.len()
            ));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) || self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            errs.push("eps_list: entries must lie in (0, 1] and strictly decrease".into());
        }
        if !(self.boundary.kappa >= 0.0 && self.boundary.kappa.is_finite()) {
            errs.push(format!("boundary.kappa: must be >= 0 (got {})", self.boundary.kappa));
        }
        if !(self.decay.tau > 0.0 && self.decay.t_final > 0.0) {
            errs.push("decay: tau and t_final must be > 0".into());
        }
        let s = &self.solver;
        if !(s.tol > 0.0) || s.max_newton == 0 || !(s.tikhonov >= 0.0) {
            errs.push("solver: tol must be > 0, max_newton >= 1 and tikhonov >= 0".into());
        }
        let worst_f = (0..=1000)
            .map(|i| {
                1.0 + self.eps_list.iter().chain([&self.eps]).fold(0.0, |m: f64, e| m.max(*e))
                    * self.initial.u0.derivative(i as f64 / 1000.0)
            })
            .fold(f64::INFINITY, f64::min);
        if !(worst_f > 0.0) {
            errs.push("initial.u0: id + eps u0 must preserve orientation for every eps".into());
        }
        let worst_c = (0..=1000)
            .map(|i| {
                let rho = self.initial.rho0.eval(i as f64 / 1000.0);
                self.eps_list
                    .iter()
                    .chain([&self.eps])
                    .fold(f64::INFINITY, |m: f64, e| m.min(self.material.c_eq + e * rho))
            })
            .fold(f64::INFINITY, f64::min);
        if !(worst_c > 0.0) {
            errs.push("initial.rho0: c_eq + eps rho0 must stay positive for every eps".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            material: self.material.clone(),
            n_cells: self.grid.n_cells,
            tau: self.time.tau,
            t_final: self.time.t_final,
            loading: self.loading.clone(),
            bc: self.boundary.clone(),
            u0: self.initial.u0.clone(),
            rho0: self.initial.rho0.clone(),
            solver: self.solver,
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn parse_config_str(text: &str) -> Result<ProblemConfig> {
    if text.trim().is_empty() {
        return Err(Error::Parse("empty configuration".into()));
    }
    let cfg: ProblemConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}
