//! Lower-bound constructions: the continuum bump instance, the filter decay
//! condition, the K-armed family and its per-pull KL divergences.
//!
//!     cargo run --example lower_bound_instances

use fppb::environment::FpmabInstance;
use fppb::instances::{
    arm_of, build_fpmab_lb, check_gamma_condition, map_arm, pull_kl_contribution, ContinuumLbInstance,
    FpmabLbInstance,
};
use fppb::process::FilterModel;

fn main() -> fppb::Result<()> {
    let filter = FilterModel::exponential(1.0)?;
    for f in [filter.clone(), FilterModel::exponential(10.0)?, FilterModel::constant(0.8)?] {
        let report = check_gamma_condition(&f, 201);
        println!("{:?}: decay condition {} (min slack {:.4})", f.spec(), if report.passed { "holds" } else { "fails" }, report.min_slack);
    }

    let k = 5;
    let eps = 0.5 / k as f64;
    let bump = ContinuumLbInstance::new(map_arm(eps, 3), eps, 20.0, filter)?;
    println!("\ncontinuum instance, x* = {}, ε = {eps}:", bump.x_star);
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        println!("  x = {x:.1}  arm {}  ν = {:.4}  Λ = {:.4}", arm_of(eps, x), bump.nu_eval(x)?, bump.lb_cif_eval(x)?);
    }
    println!("  Λ nondecreasing on a 10^4 grid: {}", bump.cif_nondecreasing(10_000)?);

    let gamma: Vec<f64> = (0..k).map(|j| 0.75f64.powi(j as i32)).collect();
    let lb = FpmabLbInstance { good_arm: 3, epsilon: 0.2, gamma: gamma.clone() };
    let alt = build_fpmab_lb(&lb)?;
    let equ: FpmabInstance = build_fpmab_lb(&FpmabLbInstance { epsilon: 0.0, ..lb.clone() })?;
    println!("\nK-armed family, good arm {}:", lb.good_arm);
    for a in 1..=k {
        println!(
            "  arm {a}: γ = {:.4}  Λ = {:.4}  μ = {:.4}  KL per pull vs ε = 0: {:.6}",
            gamma[a - 1],
            alt.lambda()[a - 1],
            alt.mean(a)?,
            pull_kl_contribution(&equ, &lb, a)?
        );
    }
    match build_fpmab_lb(&FpmabLbInstance { good_arm: 1, epsilon: 0.1, gamma: vec![1.0, 0.95] }) {
        Ok(_) => println!("unexpectedly built"),
        Err(e) => println!("\nfilter falling too slowly: {e}"),
    }
    Ok(())
}
