//! A piecewise-linear filter that creates a local optimum at 0.33 and the
//! global one at 0.8. Shows the objective and where one run's sweeps ended.
//!
//!     cargo run --release --example multimodal_filter -- [horizon]

use fppb::cif_ucb::{run_with, CifUcbOptions};
use fppb::environment::FppbInstance;
use fppb::process::{FilterModel, IntensityModel};
use fppb::rng;

fn main() -> fppb::Result<()> {
    let horizon = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50_000);
    let filter = FilterModel::piecewise_linear(vec![0.0, 0.25, 0.5, 0.8, 1.0], vec![1.0, 1.0, 0.5, 0.5, 0.3])?;
    let instance = FppbInstance::new(IntensityModel::linear(20.0, -20.0)?, filter, 20.0, 20.0, horizon)?;

    println!("objective γ(y)Λ(y):");
    for i in 0..=20 {
        let y = i as f64 / 20.0;
        let v = instance.objective(y)?;
        println!("  {y:.2} {v:6.3} {}", "#".repeat((v * 8.0) as usize));
    }
    let (z, v) = instance.optimum();
    println!("optimum z* = {z:.4}, value {v:.4}; local peak at 0.33 has value {:.4}", instance.objective(0.33)?);

    let options = CifUcbOptions { share_left_sweeps: true, ..CifUcbOptions::default() };
    let (traj, state) = run_with(&instance, options, &mut rng::seeded(3))?;
    let mut buckets = [0usize; 10];
    for r in &traj.rows[horizon / 2..] {
        buckets[((r.b * 10.0).ceil() as usize).clamp(1, 10) - 1] += 1;
    }
    println!("sweep endpoints over the second half of the run:");
    for (i, n) in buckets.iter().enumerate() {
        println!("  ({:.1}, {:.1}] {n:>6}", i as f64 / 10.0, (i + 1) as f64 / 10.0);
    }
    println!(
        "cumulative regret {:.1}, {} cells at the end",
        traj.cumulative_regret().last().copied().unwrap_or(0.0),
        state.active_len()
    );
    Ok(())
}
