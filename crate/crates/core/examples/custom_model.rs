//! Building models by hand: a tabulated rate and a piecewise filter, their
//! assumption checks, and a few simulated sweeps.
//!
//!     cargo run --example custom_model

use fppb::environment::{sweep, AssumptionReport, FppbInstance};
use fppb::process::{argmax_objective, lipschitz_estimate, FilterModel, IntensityModel};
use fppb::rng;

fn main() -> fppb::Result<()> {
    // a rate with a bump around 0.7
    let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
    let values: Vec<f64> = grid.iter().map(|x| 4.0 + 12.0 * (-((x - 0.7) / 0.1f64).powi(2)).exp()).collect();
    let intensity = IntensityModel::tabulated(grid, values)?;
    let filter = FilterModel::piecewise_linear(vec![0.0, 0.4, 1.0], vec![1.0, 0.9, 0.4])?;

    let slope = lipschitz_estimate(&intensity, &filter, 10_001);
    let (z, v) = argmax_objective(&intensity, &filter, 10_001);
    println!("max rate {:.3}, objective slope {slope:.3}, optimum at {z:.4} with value {v:.4}", intensity.max_rate());

    let m = slope.ceil();
    let lambda_max = intensity.max_rate().ceil();
    let report = AssumptionReport::check(&intensity, &filter, m, lambda_max);
    println!("assumptions with m = {m}, λ_max = {lambda_max}: {}", if report.passed() { "ok" } else { "violated" });
    let too_small = AssumptionReport::check(&intensity, &filter, m / 2.0, lambda_max);
    println!("with m = {}: lipschitz ok = {}", m / 2.0, too_small.lipschitz_ok);

    let instance = FppbInstance::new(intensity, filter, m, lambda_max, 10)?;
    let mut rng = rng::seeded(8);
    for (t, y) in [0.3, z, 1.0].into_iter().enumerate() {
        let obs = sweep(&instance, &mut rng, y, t + 1)?;
        let shown: Vec<String> = obs.detected.locations().iter().map(|p| format!("{p:.3}")).collect();
        println!("sweep to {y:.3}: {} detections (mean {:.3}) {}", obs.reward, instance.objective(y)?, shown.join(" "));
    }
    Ok(())
}
