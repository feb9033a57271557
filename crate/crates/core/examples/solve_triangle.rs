//! Solves for the equal-mass triangle on the sphere from a lopsided guess,
//! brings it to canonical form and certifies it.
//!
//! Run with `cargo run --example solve_triangle`.

use curved_nbody::equilibria::{self, canonicalize, certify, CertifyOptions};
use curved_nbody::{MassVector, SolveOutcome, SolverOptions, SpaceSpec};

pub fn main() -> curved_nbody::Result<()> {
    let space = SpaceSpec::sphere(2)?;
    let masses = MassVector::equal(3);
    let guess = [0.0, 1.7, 4.4];

    let outcome = equilibria::solve_equilibrium(&masses, 0.5, &space, &guess, &SolverOptions::default())?;
    let record = match outcome {
        SolveOutcome::Equilibrium(rec) => canonicalize(&rec),
        other => {
            println!("no equilibrium: {other:?}");
            return Ok(());
        }
    };

    println!("angles:           {:?}", record.cfg.alphas);
    println!("angular velocity: {:.12}", record.angular_velocity);
    println!("Newton iterations: {}", record.iterations);
    for check in certify(&record, &CertifyOptions::default())?.checks {
        let verdict = if check.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {:.3e} (threshold {:.0e})", check.name, check.value, check.threshold);
    }
    Ok(())
}
