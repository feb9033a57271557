//! Multi-start sweep for three unequal masses over a radius grid, followed
//! by the empirical minimum-distance report.
//!
//! Run with `cargo run --example sweep_min_distance`.

use curved_nbody::experiments::{min_distance_probe, sweep_equilibria, SweepSpec};
use curved_nbody::{MassVector, SpaceSpec};

pub fn main() -> curved_nbody::Result<()> {
    let masses = MassVector::new(vec![1.0, 1.5, 0.7])?;
    let spec = SweepSpec::new(SpaceSpec::sphere(2)?, masses, vec![0.3, 0.5, 0.7], 10, 42);
    let result = sweep_equilibria(&spec, None)?;
    println!(
        "{} certified, {} unverified roots, {} failed starts",
        result.catalog.len(),
        result.unverified.len(),
        result.failures.len()
    );

    let roots = result.converged();
    let report = min_distance_probe(&roots)?;
    print!("{}", report.to_csv());
    if let Some((id, d)) = report.global_min {
        println!("empirical minimum {d:.12} at record {id}: angles {:?}", roots[id].cfg.alphas);
    }
    Ok(())
}
