//! The estimator Λ̄ under a fixed schedule that always sweeps all of [0, 1],
//! against its confidence width ζ.
//!
//!     cargo run --release --example concentration -- [rounds]

use fppb::cif_ucb::{Cell, ConfidenceWidth, SweepRecord};
use fppb::environment::{sweep, FppbInstance};
use fppb::process::{FilterModel, IntensityModel};
use fppb::rng;

fn main() -> fppb::Result<()> {
    let rounds: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let instance = FppbInstance::new(
        IntensityModel::linear(20.0, -20.0)?,
        FilterModel::exponential(1.0)?,
        20.0,
        20.0,
        rounds,
    )?;
    let truth = instance.intensity.cif(1.0)?;
    let width = ConfidenceWidth::new(instance.lambda_max, rounds as f64);

    let mut rng = rng::seeded(12);
    let mut cell = Cell::new(0.0, 1.0)?;
    let mut outside = 0;
    println!("{:>6} {:>10} {:>10} {:>10}", "t", "Λ̄(1)", "|error|", "ζ");
    for t in 1..=rounds {
        let obs = sweep(&instance, &mut rng, 1.0, t)?;
        cell.update(SweepRecord::from_observation(&obs, 0.0, 1.0), &instance.filter, &width)?;
        let err = (cell.lambda_hat() - truth).abs();
        outside += (err > cell.zeta()) as usize;
        if t.is_power_of_two() || t == rounds {
            println!("{t:>6} {:>10.4} {err:>10.4} {:>10.4}", cell.lambda_hat(), cell.zeta());
        }
    }
    println!("Λ(1) = {truth}; rounds with |error| > ζ: {outside}");
    Ok(())
}
