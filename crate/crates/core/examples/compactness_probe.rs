//! Traces `A^2(r)` for the equal-mass pair on the hyperbolic plane and
//! inverts it at a fixed angular velocity.
//!
//! Run with `cargo run --example compactness_probe`.

use curved_nbody::equilibria::polygon_angular_velocity_squared;
use curved_nbody::experiments::{boundedness_probe, Family};
use curved_nbody::{MassVector, SpaceSpec};

pub fn main() -> curved_nbody::Result<()> {
    let space = SpaceSpec::hyperbolic(2)?;
    let a_fixed = polygon_angular_velocity_squared(2, 0.5, &space)?.sqrt();

    let report =
        boundedness_probe(&MassVector::equal(2), &space, a_fixed, &Family::Polygon, (0.1, 10.0), 20)?;
    print!("{}", report.to_csv());
    println!("verdict: {:?}", report.verdict);
    match report.solved_r {
        Some(r) => println!("A = {a_fixed:.12} is attained at r = {r:.12}"),
        None => println!("no radius found: {:?}", report.no_solution),
    }
    Ok(())
}
