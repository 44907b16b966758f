//! The K-armed filtered Poisson bandit under a uniform policy and under a
//! pooled-estimate UCB policy.
//!
//!     cargo run --release --example fpmab_bandit -- [horizon]

use fppb::cif_ucb::ConfidenceWidth;
use fppb::harness::{run_fpmab, FpmabPolicy};
use fppb::instances::{build_fpmab_lb, FpmabLbInstance};
use fppb::rng;

fn main() -> fppb::Result<()> {
    let horizon: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let lb = FpmabLbInstance { good_arm: 4, epsilon: 0.3, gamma: vec![1.0, 0.7, 0.5, 0.35, 0.25, 0.15] };
    let instance = build_fpmab_lb(&lb)?;
    let width = ConfidenceWidth::new(1.0, horizon as f64);

    for policy in [FpmabPolicy::Uniform, FpmabPolicy::Ucb] {
        let rows = run_fpmab(&instance, policy, horizon, &width, &mut rng::seeded(5))?;
        let regret: f64 = rows.iter().map(|r| r.regret).sum();
        let mut pulls = vec![0usize; instance.arms()];
        for r in &rows {
            pulls[r.arm - 1] += 1;
        }
        println!("{policy:?}: regret {regret:.1}, pulls per arm {pulls:?}");
    }
    Ok(())
}
