//! Linear rate λ(x) = 20 − 20x with filter γ(x) = e^{−x}: averaged regret
//! curve, fitted growth exponent and the first run's final partition.
//!
//!     cargo run --release --example experiment_one -- [reps] [horizon] [--selected-only]
//!
//! By default every sweep also updates the cells left of its endpoint; pass
//! `--selected-only` to update only the selected cell.

use fppb::environment::FppbInstance;
use fppb::harness::{reference_value, run_replications, ExperimentConfig};
use fppb::process::{FilterModel, IntensityModel};

fn main() -> fppb::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let selected_only = args.iter().any(|a| a == "--selected-only");
    let mut numbers = args.iter().filter_map(|a| a.parse::<usize>().ok());
    let reps = numbers.next().unwrap_or(20);
    let horizon = numbers.next().unwrap_or(50_000);

    let instance = FppbInstance::new(
        IntensityModel::linear(20.0, -20.0)?,
        FilterModel::exponential(1.0)?,
        20.0,
        20.0,
        horizon,
    )?;
    let mut config = ExperimentConfig::new(instance, reps, 2024);
    config.share_left_sweeps = !selected_only;

    let started = std::time::Instant::now();
    let out = run_replications(&config)?;
    println!("optimum z* = {:.4}, value = {:.4}", out.optimum.0, out.optimum.1);
    println!(
        "terminal regret {:.1} ± {:.1} over {reps} runs, log-log slope {:.3}",
        out.curve.terminal_mean(),
        out.curve.terminal_se(),
        out.curve.loglog_slope()
    );
    for t in [horizon / 100, horizon / 10, horizon / 2, horizon] {
        let t = t.max(1);
        println!("  t = {t:>6}: regret {:>9.1}   ln(t)·t^(2/3) = {:>9.1}", out.curve.average[t - 1], reference_value(t as f64, 1.0));
    }

    let cells = &out.cell_tables[0];
    let finest = cells.iter().map(|c| c.y - c.x).fold(f64::INFINITY, f64::min);
    let worst = cells
        .iter()
        .map(|c| {
            let truth = 20.0 * c.y - 10.0 * c.y * c.y;
            (c.lambda_hat - truth).abs() / truth
        })
        .fold(0.0, f64::max);
    println!(
        "first run: {} cells, finest length {finest}, max relative CIF error {:.2}%",
        cells.len(),
        100.0 * worst
    );
    println!("elapsed {:.1?}", started.elapsed());
    Ok(())
}
