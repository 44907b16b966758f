//! Adaptive refinement against UCB over fixed uniform grids of endpoints.
//!
//!     cargo run --release --example fixed_grid_baseline -- [reps] [horizon]

use fppb::environment::FppbInstance;
use fppb::harness::{baseline_fixed_grid, run_replications, ExperimentConfig};
use fppb::process::{FilterModel, IntensityModel};

fn main() -> fppb::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps = args.next().and_then(|a| a.parse().ok()).unwrap_or(8);
    let horizon: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(50_000);

    let instance = FppbInstance::new(
        IntensityModel::linear(20.0, -20.0)?,
        FilterModel::exponential(1.0)?,
        20.0,
        20.0,
        horizon,
    )?;
    let config = ExperimentConfig::new(instance, reps, 99);

    let adaptive = run_replications(&config)?;
    println!("adaptive cells       terminal regret {:>10.1} ± {:.1}", adaptive.curve.terminal_mean(), adaptive.curve.terminal_se());
    let cube_root = (horizon as f64).cbrt().round() as usize;
    for k in [1, 4, cube_root, 4 * cube_root] {
        let b = baseline_fixed_grid(&config, k)?;
        println!("fixed grid K = {k:<5}  terminal regret {:>10.1} ± {:.1}", b.curve.terminal_mean(), b.curve.terminal_se());
    }
    Ok(())
}
