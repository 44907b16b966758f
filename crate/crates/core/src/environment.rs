//! Round-by-round environments: the continuum sweep problem and its
//! K-armed discretisation with per-increment feedback.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::process::{self, FilterModel, IntensityModel, PointSample};

/// Grid used for the Lipschitz (A1) check and for locating the optimum.
pub const CHECK_GRID: usize = 10_001;

/// Outcome of the A1/A2 grid checks for a candidate instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub lipschitz_estimate: f64,
    pub declared_m: f64,
    pub lipschitz_ok: bool,
    pub max_rate: f64,
    pub declared_lambda_max: f64,
    pub rate_bound_ok: bool,
}

impl AssumptionReport {
    pub fn check(intensity: &IntensityModel, filter: &FilterModel, m: f64, lambda_max: f64) -> Self {
        let lipschitz_estimate = process::lipschitz_estimate(intensity, filter, CHECK_GRID);
        let max_rate = intensity.max_rate();
        Self {
            lipschitz_estimate,
            declared_m: m,
            lipschitz_ok: lipschitz_estimate <= m * (1.0 + 1e-9),
            max_rate,
            declared_lambda_max: lambda_max,
            rate_bound_ok: max_rate <= lambda_max * (1.0 + 1e-12),
        }
    }

    pub fn passed(&self) -> bool {
        self.lipschitz_ok && self.rate_bound_ok
    }
}

/// A continuum problem: rate model, filter, the known constants m and
/// λ_max, and the horizon T.
#[derive(Debug, Clone)]
pub struct FppbInstance {
    pub intensity: IntensityModel,
    pub filter: FilterModel,
    pub m: f64,
    pub lambda_max: f64,
    pub horizon: usize,
}

impl FppbInstance {
    pub fn new(
        intensity: IntensityModel,
        filter: FilterModel,
        m: f64,
        lambda_max: f64,
        horizon: usize,
    ) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::InvalidInstance("horizon must be >= 1".into()));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidInstance(format!("Lipschitz constant m = {m} must be > 0")));
        }
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(Error::InvalidInstance(format!("lambda_max = {lambda_max} must be > 0")));
        }
        let report = AssumptionReport::check(&intensity, &filter, m, lambda_max);
        if !report.lipschitz_ok {
            return Err(Error::InvalidInstance(format!(
                "objective slope {:.6} exceeds m = {m}",
                report.lipschitz_estimate
            )));
        }
        if !report.rate_bound_ok {
            return Err(Error::InvalidInstance(format!(
                "max rate {:.6} exceeds lambda_max = {lambda_max}",
                report.max_rate
            )));
        }
        Ok(Self { intensity, filter, m, lambda_max, horizon })
    }

    pub fn with_horizon(mut self, horizon: usize) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::InvalidInstance("horizon must be >= 1".into()));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn objective(&self, y: f64) -> Result<f64> {
        process::objective(&self.intensity, &self.filter, y)
    }

    /// (z*, γ(z*)Λ(z*)) located on the check grid.
    pub fn optimum(&self) -> (f64, f64) {
        process::argmax_objective(&self.intensity, &self.filter, CHECK_GRID)
    }
}

/// One round of the continuum problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepObservation {
    pub round: usize,
    pub endpoint: f64,
    pub detected: PointSample,
    pub reward: u64,
}

/// Sweep [0, y]: detected events follow the thinned NHPP with intensity
/// γ(y)λ(·) on [0, y]; the reward is their count.
pub fn sweep<R: Rng + ?Sized>(instance: &FppbInstance, rng: &mut R, y: f64, round: usize) -> Result<SweepObservation> {
    check_unit(y)?;
    let cif = instance.intensity.cif_unchecked(y);
    let gamma = instance.filter.gamma_unchecked(y);
    let detected = process::sample_detected_events(rng, &instance.intensity, cif, gamma, y);
    let reward = detected.len() as u64;
    Ok(SweepObservation { round, endpoint: y, detected, reward })
}

/// Pseudo-regret max(0, optimum − γ(y)Λ(y)) of sweeping [0, y].
pub fn per_round_regret(instance: &FppbInstance, optimum_value: f64, y: f64) -> f64 {
    let y = y.clamp(0.0, 1.0);
    let value = instance.filter.gamma_unchecked(y) * instance.intensity.cif_unchecked(y);
    (optimum_value - value).max(0.0)
}

/// K-armed filtered Poisson bandit. Arms are 1-based in the public API.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpmabInstance {
    lambda: Vec<f64>,
    gamma: Vec<f64>,
}

impl FpmabInstance {
    pub fn new(lambda: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() || lambda.len() != gamma.len() {
            return Err(Error::InvalidInstance(format!(
                "need K >= 1 matching CIF and filter parameters, got {} and {}",
                lambda.len(),
                gamma.len()
            )));
        }
        if lambda.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::InvalidInstance("CIF parameters must be finite and >= 0".into()));
        }
        if gamma.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return Err(Error::InvalidInstance("filter parameters must lie in [0, 1]".into()));
        }
        if let Some(k) = lambda.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidInstance(format!("CIF parameters decrease at arm {}", k + 2)));
        }
        if let Some(k) = gamma.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidInstance(format!("filter parameters increase at arm {}", k + 2)));
        }
        Ok(Self { lambda, gamma })
    }

    pub fn arms(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Mean reward μ_a = γ_a·Λ_a.
    pub fn mean(&self, arm: usize) -> Result<f64> {
        self.check_arm(arm)?;
        Ok(self.gamma[arm - 1] * self.lambda[arm - 1])
    }

    pub fn means(&self) -> Vec<f64> {
        self.lambda.iter().zip(&self.gamma).map(|(l, g)| l * g).collect()
    }

    /// Λ_k − Λ_{k−1} with Λ_0 = 0.
    pub fn increment(&self, k: usize) -> f64 {
        let prev = if k > 1 { self.lambda[k - 2] } else { 0.0 };
        self.lambda[k - 1] - prev
    }

    pub fn best_arm(&self) -> (usize, f64) {
        self.means()
            .into_iter()
            .enumerate()
            .fold((1, f64::NEG_INFINITY), |best, (i, mu)| if mu > best.1 { (i + 1, mu) } else { best })
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm == 0 || arm > self.arms() {
            Err(Error::ArmIndex { arm, k: self.arms() })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpmabObservation {
    pub arm: usize,
    /// R̃_{k,t} for k = 1..=arm.
    pub per_arm: Vec<u64>,
    pub reward: u64,
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean > 0.0 {
        Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
    } else {
        0
    }
}

/// Pull arm `a`: independent R̃_k ~ Poisson(γ_a(Λ_k − Λ_{k−1})) for k ≤ a,
/// reward = their sum.
pub fn fpmab_pull<R: Rng + ?Sized>(instance: &FpmabInstance, rng: &mut R, a: usize) -> Result<FpmabObservation> {
    instance.check_arm(a)?;
    let gamma = instance.gamma[a - 1];
    let per_arm: Vec<u64> = (1..=a).map(|k| poisson_draw(rng, gamma * instance.increment(k))).collect();
    let reward = per_arm.iter().sum();
    Ok(FpmabObservation { arm: a, per_arm, reward })
}
