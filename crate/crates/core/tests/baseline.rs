use fppb::environment::FppbInstance;
use fppb::harness::{baseline_fixed_grid, run_replications, ExperimentConfig};
use fppb::process::{FilterModel, IntensityModel};

fn experiment_one(horizon: usize, reps: usize, share: bool) -> ExperimentConfig {
    let instance = FppbInstance::new(
        IntensityModel::linear(20.0, -20.0).unwrap(),
        FilterModel::exponential(1.0).unwrap(),
        20.0,
        20.0,
        horizon,
    )
    .unwrap();
    let mut cfg = ExperimentConfig::new(instance, reps, 77);
    cfg.share_left_sweeps = share;
    cfg
}

#[test]
fn cube_root_grid_loses_to_adaptive_cells() {
    let horizon = 50_000;
    let k = (horizon as f64).cbrt().round() as usize;
    for share in [false, true] {
        let cfg = experiment_one(horizon, 4, share);
        let adaptive = run_replications(&cfg).unwrap().curve.terminal_mean();
        let grid = baseline_fixed_grid(&cfg, k).unwrap().curve.terminal_mean();
        assert!(grid > adaptive, "share {share}: K={k} {grid} vs adaptive {adaptive}");
    }
}

#[test]
fn single_cell_baseline_pays_the_full_gap() {
    let cfg = experiment_one(1000, 1, false);
    let gap = cfg.instance.optimum().1 - cfg.instance.objective(1.0).unwrap();
    let out = baseline_fixed_grid(&cfg, 1).unwrap();
    assert!((out.curve.terminal_mean() - 1000.0 * gap).abs() < 1e-6);
}

// The endpoint 0.5 of the 4-cell grid sits in the flat top of the objective
// (gap about 0.063 per round), so this comparison goes the other way.
#[test]
#[ignore = "does not hold: K=4 measures about 8.9e3 against 1.5e4 to 1.7e4 for adaptive cells"]
fn coarse_grid_loses_to_adaptive_cells() {
    let cfg = experiment_one(50_000, 4, true);
    let adaptive = run_replications(&cfg).unwrap().curve.terminal_mean();
    let grid = baseline_fixed_grid(&cfg, 4).unwrap().curve.terminal_mean();
    assert!(grid > adaptive, "K=4 {grid} vs adaptive {adaptive}");
}
