//! Final partition of one run: endpoints, effective samples, index and CIF
//! estimate of every active cell, next to the true Λ(y).
//!
//!     cargo run --release --example cell_table -- [horizon] [seed]

use fppb::cif_ucb::{run_with, CifUcbOptions};
use fppb::environment::FppbInstance;
use fppb::harness::dump_cell_table;
use fppb::process::{FilterModel, IntensityModel};
use fppb::rng;

fn main() -> fppb::Result<()> {
    let mut args = std::env::args().skip(1);
    let horizon = args.next().and_then(|a| a.parse().ok()).unwrap_or(50_000);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);

    let intensity = IntensityModel::linear(20.0, -20.0)?;
    let instance = FppbInstance::new(intensity.clone(), FilterModel::exponential(1.0)?, 20.0, 20.0, horizon)?;
    let options = CifUcbOptions { share_left_sweeps: true, ..CifUcbOptions::default() };
    let (_, state) = run_with(&instance, options, &mut rng::seeded(seed))?;

    println!("{:>10} {:>10} {:>12} {:>9} {:>9} {:>9}", "x", "y", "S", "index", "Λ̄(y)", "Λ(y)");
    for row in dump_cell_table(&state) {
        println!(
            "{:>10.7} {:>10.7} {:>12.3} {:>9.6} {:>9.6} {:>9.6}",
            row.x,
            row.y,
            row.effective_samples,
            row.index,
            row.lambda_hat,
            intensity.cif(row.y)?
        );
    }
    println!("{} splits in {horizon} rounds", state.splits().len());
    Ok(())
}
