//! Pushes two of three bodies together and tabulates how the tangential
//! residual of the first body grows.
//!
//! Run with `cargo run --example blowup_probe`.

use curved_nbody::experiments::cluster_blowup_probe;
use curved_nbody::experiments::probes::halving_grid;
use curved_nbody::{MassVector, SpaceSpec};

pub fn main() -> curved_nbody::Result<()> {
    let space = SpaceSpec::sphere(2)?;
    let report = cluster_blowup_probe(&MassVector::equal(3), 0.5, &space, &halving_grid(1e-1, 10))?;
    print!("{}", report.to_csv());
    for (ratio, p) in report.ratios.iter().zip(&report.exponents) {
        println!("growth ratio {ratio:.6}, local exponent {p:.6}");
    }
    println!("monotone growth: {}", report.monotone);
    Ok(())
}
