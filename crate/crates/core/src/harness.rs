//! Multi-replication experiments: averaged regret curves, end-of-run cell
//! tables and the fixed-grid baseline.
//!
//! Replication `r` always draws from RNG stream `r` of the base seed and the
//! per-replication results are reduced in replication order, so the output
//! does not depend on thread count or scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::cif_ucb::{self, CifUcb, CifUcbOptions, ConfidenceWidth};
use crate::environment::{fpmab_pull, FpmabInstance, FppbInstance};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub instance: FppbInstance,
    pub replications: usize,
    pub seed: u64,
    pub confidence_scale: f64,
    /// c in the c·ln(t)·t^{2/3} overlay.
    pub reference_constant: Option<f64>,
    pub share_left_sweeps: bool,
}

impl ExperimentConfig {
    pub fn new(instance: FppbInstance, replications: usize, seed: u64) -> Self {
        Self {
            instance,
            replications,
            seed,
            confidence_scale: ConfidenceWidth::DEFAULT_SCALE,
            reference_constant: None,
            share_left_sweeps: false,
        }
    }

    fn check(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        Ok(())
    }
}

/// Average cumulative pseudo-regret per round plus every replication's
/// terminal regret.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub average: Vec<f64>,
    pub terminal: Vec<f64>,
}

impl RegretCurve {
    fn from_paths(paths: &[Vec<f64>]) -> Self {
        let horizon = paths.first().map_or(0, Vec::len);
        let mut average = vec![0.0; horizon];
        for path in paths {
            for (acc, v) in average.iter_mut().zip(path) {
                *acc += v;
            }
        }
        let n = paths.len() as f64;
        average.iter_mut().for_each(|v| *v /= n);
        let terminal = paths.iter().map(|p| p.last().copied().unwrap_or(0.0)).collect();
        Self { average, terminal }
    }

    pub fn horizon(&self) -> usize {
        self.average.len()
    }

    pub fn terminal_mean(&self) -> f64 {
        self.terminal.iter().sum::<f64>() / self.terminal.len() as f64
    }

    /// Standard error of the terminal mean; 0 for a single replication.
    pub fn terminal_se(&self) -> f64 {
        let n = self.terminal.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.terminal_mean();
        let var = self.terminal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    }

    /// Least-squares slope of ln R(t) on ln t over t ∈ [T/10, T].
    pub fn loglog_slope(&self) -> f64 {
        let t_max = self.horizon();
        let t_min = (t_max / 10).max(1);
        let (xs, ys): (Vec<f64>, Vec<f64>) = (t_min..=t_max)
            .filter(|&t| self.average[t - 1] > 0.0)
            .map(|t| ((t as f64).ln(), self.average[t - 1].ln()))
            .unzip();
        ols_slope(&xs, &ys)
    }
}

pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// One row of the end-of-run cell table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellTableRow {
    pub x: f64,
    pub y: f64,
    pub effective_samples: f64,
    pub index: f64,
    pub lambda_hat: f64,
}

/// Active cells of `state`, sorted by left endpoint.
pub fn dump_cell_table(state: &CifUcb) -> Vec<CellTableRow> {
    state
        .cells()
        .map(|c| CellTableRow {
            x: c.x(),
            y: c.y(),
            effective_samples: c.effective_samples(),
            index: c.index(),
            lambda_hat: c.lambda_hat(),
        })
        .collect()
}

/// Results of an experiment. Final states are reduced to their cell tables.
#[derive(Debug, Clone)]
pub struct Replications {
    pub optimum: (f64, f64),
    pub curve: RegretCurve,
    pub cell_tables: Vec<Vec<CellTableRow>>,
}

fn replicate<F>(instance: &FppbInstance, replications: usize, seed: u64, make: F) -> Result<Replications>
where
    F: Fn() -> Result<CifUcb> + Sync,
{
    let results: Vec<Result<(Vec<f64>, Vec<CellTableRow>)>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, r as u64);
            let mut state = make()?;
            let traj = cif_ucb::run_state(instance, &mut state, &mut rng)?;
            Ok((traj.cumulative_regret(), dump_cell_table(&state)))
        })
        .collect();
    let mut paths = Vec::with_capacity(replications);
    let mut cell_tables = Vec::with_capacity(replications);
    for r in results {
        let (p, c) = r?;
        paths.push(p);
        cell_tables.push(c);
    }
    Ok(Replications { optimum: instance.optimum(), curve: RegretCurve::from_paths(&paths), cell_tables })
}

/// Run CIF-UCB once per replication on independent RNG streams.
pub fn run_replications(config: &ExperimentConfig) -> Result<Replications> {
    config.check()?;
    let options = CifUcbOptions {
        confidence_scale: config.confidence_scale,
        share_left_sweeps: config.share_left_sweeps,
        ..CifUcbOptions::default()
    };
    replicate(&config.instance, config.replications, config.seed, || {
        Ok(CifUcb::with_options(&config.instance, options))
    })
}

/// Same protocol with the non-adaptive K-cell grid.
pub fn baseline_fixed_grid(config: &ExperimentConfig, k: usize) -> Result<Replications> {
    config.check()?;
    replicate(&config.instance, config.replications, config.seed, || {
        CifUcb::fixed_grid(&config.instance, k, config.confidence_scale)
    })
}

/// c·ln(t)·t^{2/3} for t = 1..=horizon.
pub fn reference_curve(horizon: usize, c: f64) -> Vec<f64> {
    (1..=horizon).map(|t| reference_value(t as f64, c)).collect()
}

pub fn reference_value(t: f64, c: f64) -> f64 {
    c * t.ln() * t.powf(2.0 / 3.0)
}

/// Arm-selection rule for the K-armed problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FpmabPolicy {
    Uniform,
    Ucb,
}

/// One pull of an FPMAB run.
#[derive(Debug, Clone, PartialEq)]
pub struct FpmabRow {
    pub round: usize,
    pub arm: usize,
    pub per_arm: Vec<u64>,
    pub reward: u64,
    /// μ* − μ_arm.
    pub regret: f64,
}

/// Play `horizon` pulls. The `ucb` rule pools every pull of an arm a ≥ k to
/// estimate Λ_k: the first k increments of such a pull are Poisson with
/// mean γ_a·Λ_k. Arm k's index is γ_k·(Λ̂_k + ζ(S_k)) with S_k = Σ γ_a.
pub fn run_fpmab<R: rand::Rng + ?Sized>(
    instance: &FpmabInstance,
    policy: FpmabPolicy,
    horizon: usize,
    width: &ConfidenceWidth,
    rng: &mut R,
) -> Result<Vec<FpmabRow>> {
    let k = instance.arms();
    let best = instance.best_arm().1;
    let means = instance.means();
    let mut samples = vec![0.0; k];
    let mut counts = vec![0u64; k];
    let mut rows = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let arm = match policy {
            FpmabPolicy::Uniform => rng.random_range(1..=k),
            FpmabPolicy::Ucb => {
                let mut best_arm = 1;
                let mut best_index = f64::NEG_INFINITY;
                for j in 0..k {
                    let index = if samples[j] > 0.0 {
                        let g = instance.gamma()[j];
                        g * (counts[j] as f64 / samples[j] + width.width(samples[j]))
                    } else {
                        f64::INFINITY
                    };
                    if index > best_index {
                        best_index = index;
                        best_arm = j + 1;
                    }
                }
                best_arm
            }
        };
        let obs = fpmab_pull(instance, rng, arm)?;
        let g = instance.gamma()[arm - 1];
        let mut prefix = 0;
        for j in 0..arm {
            prefix += obs.per_arm[j];
            counts[j] += prefix;
            samples[j] += g;
        }
        rows.push(FpmabRow { round: t, arm, regret: best - means[arm - 1], per_arm: obs.per_arm, reward: obs.reward });
    }
    Ok(rows)
}

/// Sample lag-1 autocorrelation.
pub fn lag1_autocorrelation(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 3 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let denom: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = values.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    num / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{FilterModel, IntensityModel};
    use approx::assert_abs_diff_eq;

    fn experiment_one(horizon: usize) -> FppbInstance {
        FppbInstance::new(
            IntensityModel::linear(20.0, -20.0).unwrap(),
            FilterModel::exponential(1.0).unwrap(),
            20.0,
            20.0,
            horizon,
        )
        .unwrap()
    }

    #[test]
    fn single_replication_is_its_trajectory() {
        let inst = experiment_one(500);
        let out = run_replications(&ExperimentConfig::new(inst.clone(), 1, 4)).unwrap();
        let (traj, state) = cif_ucb::run(&inst, &mut rng::stream(4, 0)).unwrap();
        assert_eq!(out.curve.average, traj.cumulative_regret());
        assert_eq!(out.cell_tables[0], dump_cell_table(&state));
        assert_eq!(out.curve.terminal_se(), 0.0);
    }

    #[test]
    fn curve_is_monotone_and_reproducible() {
        let cfg = ExperimentConfig::new(experiment_one(800), 6, 11);
        let a = run_replications(&cfg).unwrap();
        let b = run_replications(&cfg).unwrap();
        assert_eq!(a.curve, b.curve);
        assert!(a.curve.average[0] >= 0.0);
        assert!(a.curve.average.windows(2).all(|w| w[1] >= w[0]));
        assert!(run_replications(&ExperimentConfig::new(experiment_one(10), 0, 1)).is_err());
    }

    #[test]
    fn single_round_table() {
        let inst = experiment_one(1);
        let out = run_replications(&ExperimentConfig::new(inst, 1, 0)).unwrap();
        let rows = &out.cell_tables[0];
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].x, rows[0].y), (0.0, 1.0));
        assert_abs_diff_eq!(rows[0].effective_samples, (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn one_cell_baseline_always_sweeps_everything() {
        let inst = experiment_one(200);
        let out = baseline_fixed_grid(&ExperimentConfig::new(inst.clone(), 2, 3), 1).unwrap();
        let gap = inst.optimum().1 - (-1.0f64).exp() * 10.0;
        for (t, v) in out.curve.average.iter().enumerate() {
            assert_abs_diff_eq!(*v, gap * (t + 1) as f64, epsilon = 1e-9 * (t + 1) as f64);
        }
    }

    #[test]
    fn reference_curve_examples() {
        let c = reference_curve(10, 2.0);
        assert_eq!(c[0], 0.0);
        assert!(c.windows(2).all(|w| w[1] >= w[0]));
        let t = 3f64.exp();
        assert_abs_diff_eq!(reference_value(t, 1.0), 3.0 * 2f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn slope_of_power_law() {
        let curve = RegretCurve { average: (1..=1000).map(|t| 3.0 * (t as f64).powf(0.7)).collect(), terminal: vec![1.0] };
        assert_abs_diff_eq!(curve.loglog_slope(), 0.7, epsilon = 1e-10);
    }

    #[test]
    fn fpmab_uniform_mixture_mean() {
        use crate::instances::{build_fpmab_lb, FpmabLbInstance};
        let lb = FpmabLbInstance { good_arm: 2, epsilon: 0.2, gamma: vec![1.0, 0.7, 0.4, 0.2] };
        let inst = build_fpmab_lb(&lb).unwrap();
        let width = ConfidenceWidth::new(1.0, 20_000.0);
        let rows = run_fpmab(&inst, FpmabPolicy::Uniform, 20_000, &width, &mut rng::seeded(3)).unwrap();
        assert!(rows.iter().all(|r| r.per_arm.iter().sum::<u64>() == r.reward && r.per_arm.len() == r.arm));
        let mean = rows.iter().map(|r| r.reward as f64).sum::<f64>() / rows.len() as f64;
        let want = (3.0 + 1.2) / 4.0;
        // rewards have variance near 1
        assert!((mean - want).abs() < 4.0 * (1.1f64 / 20_000.0).sqrt(), "{mean}");
    }

    #[test]
    fn fpmab_ucb_prefers_good_arm() {
        use crate::instances::{build_fpmab_lb, FpmabLbInstance};
        let lb = FpmabLbInstance { good_arm: 3, epsilon: 0.5, gamma: vec![1.0, 0.6, 0.35, 0.2] };
        let inst = build_fpmab_lb(&lb).unwrap();
        let width = ConfidenceWidth::new(1.0, 20_000.0);
        let rows = run_fpmab(&inst, FpmabPolicy::Ucb, 20_000, &width, &mut rng::seeded(8)).unwrap();
        let late = &rows[10_000..];
        let good = late.iter().filter(|r| r.arm == 3).count();
        assert!(good > late.len() / 2, "{good}");
        let uniform = run_fpmab(&inst, FpmabPolicy::Uniform, 20_000, &width, &mut rng::seeded(8)).unwrap();
        let regret = |rows: &[FpmabRow]| rows.iter().map(|r| r.regret).sum::<f64>();
        assert!(regret(&rows) < regret(&uniform));
    }

    #[test]
    fn autocorrelation_examples() {
        assert_abs_diff_eq!(lag1_autocorrelation(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]), -5.0 / 6.0, epsilon = 1e-12);
        assert_eq!(lag1_autocorrelation(&[2.0, 2.0, 2.0]), 0.0);
    }
}
