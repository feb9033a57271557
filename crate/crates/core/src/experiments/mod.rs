//! Parameter sweeps, minimum-distance and compactness probes, and catalog persistence.

pub mod catalog;
pub mod probes;
pub mod sweep;

pub use catalog::{fmt_f64, load_catalog, persist_catalog};
pub use probes::{
    boundedness_probe, cluster_blowup_probe, min_distance_probe, BlowupReport, BoundednessReport,
    BoundednessVerdict, Family, MinDistanceReport,
};
pub use sweep::{sweep_equilibria, SweepResult, SweepSpec};
