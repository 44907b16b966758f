//! Lower-bound instances and Poisson KL utilities.
//!
//! The continuum family puts a small bump of height mε² centred at x* on top
//! of the flat reward mε, and the K-armed family raises the mean of a single
//! arm from 1 to 1 + ε. Both need the filter to fall fast enough that the
//! implied CIF stays nondecreasing. That is checked numerically here.
//!
//! Note: the lower-bound argument phrases its filter assumption as γ being
//! "strictly increasing". The filter is nonincreasing by definition of the
//! model; the increasing object is 1/γ. Only the numeric checks below are
//! enforced.

use serde::{Deserialize, Serialize};

use crate::environment::FpmabInstance;
use crate::error::{check_unit, Error, Result};
use crate::process::{FilterModel, IntensityModel};

/// Pieces used when a continuum lower-bound CIF is turned into a rate.
pub const LB_INTENSITY_PIECES: usize = 2048;

/// Relative slack on m for the discretised rate: interpolating Λ between
/// nodes lets γΛ's slope exceed m by O(1/pieces).
pub const LB_LIPSCHITZ_SLACK: f64 = 1e-3;

/// Continuum instance with reward ν(x) = γ(x)Λ(x) peaked at x*.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumLbInstance {
    pub x_star: f64,
    pub epsilon: f64,
    pub m: f64,
    pub filter: FilterModel,
}

impl ContinuumLbInstance {
    pub fn new(x_star: f64, epsilon: f64, m: f64, filter: FilterModel) -> Result<Self> {
        if !(0.0..=1.0).contains(&x_star) {
            return Err(Error::InvalidInstance(format!("x* = {x_star} outside [0, 1]")));
        }
        if !(epsilon > 0.0 && epsilon <= 0.5) {
            return Err(Error::InvalidInstance(format!("epsilon = {epsilon} outside (0, 1/2]")));
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidInstance(format!("m = {m} must be >= 0")));
        }
        Ok(Self { x_star, epsilon, m, filter })
    }

    /// ν(x) = mε(1 + ε − |x − x*|) within ε of x*, min(mx, mε) elsewhere.
    pub fn nu_eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.nu(x))
    }

    fn nu(&self, x: f64) -> f64 {
        let (m, eps) = (self.m, self.epsilon);
        let d = (x - self.x_star).abs();
        if d <= eps {
            m * eps * (1.0 + eps - d)
        } else {
            (m * x).min(m * eps)
        }
    }

    /// Λ(x) = ν(x)/γ(x).
    pub fn lb_cif_eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        let g = self.filter.gamma_unchecked(x);
        if g <= 0.0 {
            return Err(Error::DegenerateFilter(x));
        }
        Ok(self.nu(x) / g)
    }

    /// Whether Λ is nondecreasing on `grid` equally spaced points.
    pub fn cif_nondecreasing(&self, grid: usize) -> Result<bool> {
        let values = self.cif_on_grid(grid)?;
        Ok(values.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0)))
    }

    fn cif_on_grid(&self, grid: usize) -> Result<Vec<f64>> {
        let n = grid.max(2);
        (0..n).map(|i| self.lb_cif_eval(i as f64 / (n - 1) as f64)).collect()
    }

    /// Piecewise-constant rate whose CIF equals Λ at the nodes of a uniform
    /// grid with [`LB_INTENSITY_PIECES`] cells.
    pub fn to_intensity(&self) -> Result<IntensityModel> {
        let n = LB_INTENSITY_PIECES;
        let nodes = self.cif_on_grid(n + 1)?;
        let width = 1.0 / n as f64;
        let mut rates = Vec::with_capacity(n);
        for (i, w) in nodes.windows(2).enumerate() {
            let inc = w[1] - w[0];
            if inc < -1e-12 * w[0].abs().max(1.0) {
                return Err(Error::InvalidInstance(format!(
                    "lower-bound CIF decreases near x = {}; the filter falls too slowly",
                    i as f64 * width
                )));
            }
            rates.push(inc.max(0.0) / width);
        }
        let breakpoints = (0..=n).map(|i| i as f64 / n as f64).collect();
        IntensityModel::piecewise_constant(breakpoints, rates)
    }
}

/// Outcome of the filter-decay check on grid pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaConditionReport {
    pub passed: bool,
    /// min over pairs of (γ(a) − γ(b))/(b − a) − γ((a + b)/2)/4.
    pub min_slack: f64,
    pub worst_pair: (f64, f64),
}

/// Check (γ(a) − γ(b))/(b − a) ≥ ¼·γ((a + b)/2) on every pair of a uniform
/// grid with `grid` points.
pub fn check_gamma_condition(filter: &FilterModel, grid: usize) -> GammaConditionReport {
    let n = grid.max(2);
    let pts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let g: Vec<f64> = pts.iter().map(|&p| filter.gamma_unchecked(p)).collect();
    let mut worst = (f64::INFINITY, (0.0, 0.0));
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (pts[i], pts[j]);
            let slack = (g[i] - g[j]) / (b - a) - 0.25 * filter.gamma_unchecked(0.5 * (a + b));
            if slack < worst.0 {
                worst = (slack, (a, b));
            }
        }
    }
    // tolerate rounding in the difference quotient
    GammaConditionReport { passed: worst.0 >= -1e-12, min_slack: worst.0, worst_pair: worst.1 }
}

/// K-armed family: arm `good_arm` has mean 1 + ε, all others 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpmabLbInstance {
    pub good_arm: usize,
    pub epsilon: f64,
    pub gamma: Vec<f64>,
}

impl FpmabLbInstance {
    pub fn arms(&self) -> usize {
        self.gamma.len()
    }

    /// First 1-based k with γ_k < (1 + ε)γ_{k+1}, if any.
    pub fn condition_violation(&self) -> Option<usize> {
        self.gamma
            .windows(2)
            .position(|w| w[0] < (1.0 + self.epsilon) * w[1])
            .map(|k| k + 1)
    }

    /// Λ_i = (1 + ε)/γ_i and Λ_k = 1/γ_k otherwise.
    pub fn cif(&self) -> Vec<f64> {
        self.gamma
            .iter()
            .enumerate()
            .map(|(k, g)| if k + 1 == self.good_arm { (1.0 + self.epsilon) / g } else { 1.0 / g })
            .collect()
    }
}

pub fn build_fpmab_lb(inst: &FpmabLbInstance) -> Result<FpmabInstance> {
    let k = inst.arms();
    if k == 0 {
        return Err(Error::InvalidInstance("need K >= 1".into()));
    }
    if inst.good_arm == 0 || inst.good_arm > k {
        return Err(Error::ArmIndex { arm: inst.good_arm, k });
    }
    if !(inst.epsilon >= 0.0 && inst.epsilon.is_finite()) {
        return Err(Error::InvalidInstance(format!("epsilon = {} must be >= 0", inst.epsilon)));
    }
    if let Some(pos) = inst.gamma.iter().position(|g| !(*g > 0.0 && *g <= 1.0)) {
        return Err(Error::Construction { index: pos + 1, detail: format!("γ = {} outside (0, 1]", inst.gamma[pos]) });
    }
    if let Some(index) = inst.condition_violation() {
        return Err(Error::Construction {
            index,
            detail: format!(
                "γ_{index} = {} < (1 + ε)·γ_{} = {}",
                inst.gamma[index - 1],
                index + 1,
                (1.0 + inst.epsilon) * inst.gamma[index]
            ),
        });
    }
    FpmabInstance::new(inst.cif(), inst.gamma.clone())
}

/// Arm centre f_ε(a) = (2a − 1)ε.
pub fn map_arm(epsilon: f64, a: usize) -> f64 {
    (2.0 * a as f64 - 1.0) * epsilon
}

/// Arm whose bucket ((a − 1)/K, a/K] contains x, with K = 1/(2ε); x = 0
/// belongs to arm 1.
pub fn arm_of(epsilon: f64, x: f64) -> usize {
    let k = (0.5 / epsilon).round().max(1.0) as usize;
    ((x * k as f64).ceil() as usize).clamp(1, k)
}

/// KL(Poisson(λ) ‖ Poisson(ν)) = λ ln(λ/ν) + ν − λ.
pub fn poisson_kl(lambda: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::Domain(nu));
    }
    if !(lambda >= 0.0) {
        return Err(Error::Domain(lambda));
    }
    let head = if lambda > 0.0 { lambda * (lambda / nu).ln() } else { 0.0 };
    Ok((head + nu - lambda).max(0.0))
}

/// KL between the feedback laws of one pull of arm `k` under the ε = 0
/// instance `equ` and under `lb`: the sum over increments j ≤ k of
/// KL(γ_k ΔΛ_j^equ ‖ γ_k ΔΛ_j^lb). Zero-mean against zero-mean counts as 0.
pub fn pull_kl_contribution(equ: &FpmabInstance, lb: &FpmabLbInstance, k: usize) -> Result<f64> {
    if equ.arms() != lb.arms() || equ.gamma() != lb.gamma.as_slice() {
        return Err(Error::Consistency("instances differ in K or filter".into()));
    }
    if k == 0 || k > equ.arms() {
        return Err(Error::ArmIndex { arm: k, k: equ.arms() });
    }
    let alt = lb.cif();
    let g = lb.gamma[k - 1];
    let mut total = 0.0;
    for j in 1..=k {
        let p = g * equ.increment(j);
        let prev = if j > 1 { alt[j - 2] } else { 0.0 };
        let q = g * (alt[j - 1] - prev);
        if q > 0.0 {
            total += poisson_kl(p, q)?;
        } else if p > 0.0 {
            return Ok(f64::INFINITY);
        }
    }
    Ok(total)
}
