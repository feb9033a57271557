//! Writes a small catalog to a JSONL file, reads it back and re-verifies
//! every record, as the `find-eq` and `verify` commands do.
//!
//! Run with `cargo run --example verify_catalog`.

use curved_nbody::equilibria::{certify, CertifyOptions};
use curved_nbody::experiments::{load_catalog, persist_catalog, sweep_equilibria, SweepSpec};
use curved_nbody::{MassVector, SpaceSpec};

pub fn main() -> curved_nbody::Result<()> {
    let spec = SweepSpec::new(SpaceSpec::hyperbolic(2)?, MassVector::equal(3), vec![0.5, 1.0], 6, 3);
    let catalog = sweep_equilibria(&spec, None)?.catalog;

    let path = std::env::temp_dir().join(format!("curved-nbody-catalog-{}.jsonl", std::process::id()));
    persist_catalog(&catalog, &path)?;
    let reloaded = load_catalog(&path)?;
    std::fs::remove_file(&path)?;
    assert_eq!(reloaded, catalog, "catalog files round-trip exactly");

    for (i, record) in reloaded.iter().enumerate() {
        let certificate = certify(record, &CertifyOptions::default())?;
        println!(
            "record {i}: r = {}, A = {:.12}, {}",
            record.cfg.r,
            record.angular_velocity,
            if certificate.passed() { "verified" } else { "FAILED" }
        );
    }
    Ok(())
}
