//! JSON run configuration.
//!
//! ```json
//! {
//!   "instance": {
//!     "kind": "process",
//!     "intensity": { "kind": "linear", "c0": 20.0, "c1": -20.0 },
//!     "filter": { "kind": "exponential", "scale": 1.0 }
//!   },
//!   "m": 20.0,
//!   "lambda_max": 20.0,
//!   "horizon": 50000,
//!   "seed": 1,
//!   "replications": 20,
//!   "output": "out/experiment-1"
//! }
//! ```
//!
//! Other instance kinds are `continuum_lb` (x_star, epsilon, filter),
//! `fpmab_lb` (good_arm, epsilon, gamma) and `fpmab` (lambda, gamma).
//! Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cif_ucb::ConfidenceWidth;
use crate::environment::{FpmabInstance, FppbInstance};
use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, FpmabPolicy};
use crate::instances::{build_fpmab_lb, ContinuumLbInstance, FpmabLbInstance, LB_LIPSCHITZ_SLACK};
use crate::process::{FilterModel, IntensityModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Process { intensity: IntensityModel, filter: FilterModel },
    ContinuumLb { x_star: f64, epsilon: f64, filter: FilterModel },
    FpmabLb { good_arm: usize, epsilon: f64, gamma: Vec<f64> },
    Fpmab { lambda: Vec<f64>, gamma: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub lambda_max: Option<f64>,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// FPMAB arm-selection rule.
    #[serde(default)]
    pub policy: Option<FpmabPolicy>,
    /// c of the c·ln(t)·t^{2/3} overlay written next to the regret curve.
    #[serde(default)]
    pub reference_constant: Option<f64>,
    #[serde(default)]
    pub confidence_scale: Option<f64>,
    /// Feed each sweep to every active cell left of the endpoint too.
    #[serde(default)]
    pub share_left_sweeps: bool,
    /// Also run the fixed-grid baseline with this many cells.
    #[serde(default)]
    pub baseline_grid: Option<usize>,
}

fn one() -> usize {
    1
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        doc.check()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn check(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if let Some(c) = self.confidence_scale {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("confidence_scale = {c} must be > 0")));
            }
        }
        if let Some(c) = self.reference_constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("reference_constant = {c} must be > 0")));
            }
        }
        if self.baseline_grid == Some(0) {
            return Err(Error::Config("baseline_grid must be >= 1".into()));
        }
        Ok(())
    }

    pub fn confidence_scale(&self) -> f64 {
        self.confidence_scale.unwrap_or(ConfidenceWidth::DEFAULT_SCALE)
    }

    fn require(&self, value: Option<f64>, key: &str) -> Result<f64> {
        value.ok_or_else(|| Error::Config(format!("\"{key}\" is required for this instance kind")))
    }

    /// Rate and filter of a continuum instance, without assumption checks.
    pub fn process_models(&self) -> Result<(IntensityModel, FilterModel)> {
        match &self.instance {
            InstanceSpec::Process { intensity, filter } => Ok((intensity.clone(), filter.clone())),
            InstanceSpec::ContinuumLb { filter, .. } => {
                let lb = self.continuum_lb()?.expect("continuum kind");
                Ok((lb.to_intensity()?, filter.clone()))
            }
            _ => Err(Error::Config("instance kind is not a continuum problem".into())),
        }
    }

    pub fn continuum_lb(&self) -> Result<Option<ContinuumLbInstance>> {
        match &self.instance {
            InstanceSpec::ContinuumLb { x_star, epsilon, filter } => {
                let m = self.require(self.m, "m")?;
                Ok(Some(ContinuumLbInstance::new(*x_star, *epsilon, m, filter.clone())?))
            }
            _ => Ok(None),
        }
    }

    /// The m that the algorithm and the Lipschitz check use. For
    /// `continuum_lb` this is the construction's m plus the discretisation
    /// slack.
    pub fn algorithm_m(&self) -> Result<f64> {
        let m = self.require(self.m, "m")?;
        Ok(match self.instance {
            InstanceSpec::ContinuumLb { .. } => m * (1.0 + LB_LIPSCHITZ_SLACK),
            _ => m,
        })
    }

    /// Continuum instance with A1/A2 checked against the declared m, λ_max.
    pub fn fppb_instance(&self) -> Result<FppbInstance> {
        let (intensity, filter) = self.process_models()?;
        let m = self.algorithm_m()?;
        let lambda_max = self.require(self.lambda_max, "lambda_max")?;
        FppbInstance::new(intensity, filter, m, lambda_max, self.horizon)
    }

    pub fn fpmab_instance(&self) -> Result<FpmabInstance> {
        match &self.instance {
            InstanceSpec::Fpmab { lambda, gamma } => FpmabInstance::new(lambda.clone(), gamma.clone()),
            InstanceSpec::FpmabLb { .. } => build_fpmab_lb(&self.fpmab_lb().expect("fpmab_lb kind")),
            _ => Err(Error::Config("instance kind is not a K-armed problem".into())),
        }
    }

    pub fn fpmab_lb(&self) -> Option<FpmabLbInstance> {
        match &self.instance {
            InstanceSpec::FpmabLb { good_arm, epsilon, gamma } => {
                Some(FpmabLbInstance { good_arm: *good_arm, epsilon: *epsilon, gamma: gamma.clone() })
            }
            _ => None,
        }
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(self.fppb_instance()?, self.replications, self.seed);
        cfg.confidence_scale = self.confidence_scale();
        cfg.reference_constant = self.reference_constant;
        cfg.share_left_sweeps = self.share_left_sweeps;
        Ok(cfg)
    }
}
