//! The commands behind the `curved-nbody` binary.
//!
//! Each command writes its main artifact to `--out` and a human-readable
//! summary to the supplied writer. Errors map to exit codes through
//! [`Error::exit_code`].

use std::io::Write;
use std::path::Path;

use crate::config::{self, AngularVelocity, ProbeFamily, ProbeSettings, RunConfig};
use crate::dynamics::{self, AmbientState};
use crate::equilibria::{self, canonicalize, certify, CertifyOptions, EquilibriumRecord, SolveOutcome};
use crate::error::{Error, Result};
use crate::experiments::{self, catalog, fmt_f64, probes, sweep_equilibria, Family};
use crate::geometry::{pairwise_euclidean_distance, SpaceSpec};

/// Exit code of `verify` when a check fails.
pub const EXIT_CHECK_FAILED: u8 = 1;

/// Reads the sweep parallelism cap from `NBODY_THREADS`.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("NBODY_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(vec![format!("NBODY_THREADS must be a positive integer, got {v:?}")])),
        },
    }
}

/// CSV header for a simulation of `n` bodies.
pub fn simulation_header(n: usize, space: &SpaceSpec) -> String {
    let mut cols = vec!["t".to_string()];
    for i in 1..=n {
        for m in 1..=space.ambient_dim() {
            cols.push(format!("q{i}_x{m}"));
        }
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            cols.push(format!("d_{i}_{j}"));
        }
    }
    cols.join(",")
}

pub fn simulation_csv(series: &[AmbientState], space: &SpaceSpec) -> String {
    let n = series.first().map_or(0, AmbientState::n);
    let mut out = simulation_header(n, space);
    out.push('\n');
    for state in series {
        let mut cols = vec![fmt_f64(state.time)];
        cols.extend(state.positions.iter().flatten().map(|x| fmt_f64(*x)));
        let d = pairwise_euclidean_distance(&state.positions);
        for (i, row) in d.iter().enumerate() {
            cols.extend(row[i + 1..].iter().map(|x| fmt_f64(*x)));
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// `simulate`: integrates the configured polar configuration.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Vec<AmbientState>> {
    let polar = cfg.polar()?;
    let a = match cfg.angular_velocity.unwrap_or(AngularVelocity::Fixed(0.0)) {
        AngularVelocity::Fixed(a) => a,
        AngularVelocity::Balance => {
            let a_sq: Vec<f64> = (0..polar.n())
                .map(|i| equilibria::angular_velocity_squared(&cfg.masses, &polar, &cfg.space, i))
                .collect::<Result<_>>()?;
            (a_sq.iter().sum::<f64>() / a_sq.len() as f64).max(0.0).sqrt()
        }
    };
    let state0 = dynamics::initial_state_from_equilibrium(&polar, a, &cfg.space)?;
    let series = dynamics::simulate(&state0, &cfg.masses, &cfg.space, &cfg.integration)?;
    std::fs::write(out, simulation_csv(&series, &cfg.space))?;
    Ok(series)
}

fn summary_line(rec: &EquilibriumRecord) -> String {
    let angles: Vec<String> = rec.cfg.alphas.iter().map(|a| format!("{a:.12}")).collect();
    format!(
        "r={} alphas=[{}] A={:.12} residual={:.3e}",
        rec.cfg.r,
        angles.join(", "),
        rec.angular_velocity,
        rec.residual_norm
    )
}

/// `find-eq`: a single solve, or a sweep when the config has a `sweep` section.
pub fn find_eq(
    cfg: &RunConfig,
    out: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
    log: &mut dyn Write,
) -> Result<Vec<EquilibriumRecord>> {
    let records = if cfg.sweep.is_some() {
        let result = sweep_equilibria(&cfg.sweep_spec(seed)?, threads)?;
        if !result.unverified.is_empty() || !result.failures.is_empty() {
            writeln!(
                log,
                "# {} unverified roots, {} failed starts",
                result.unverified.len(),
                result.failures.len()
            )?;
        }
        result.catalog
    } else {
        let r = cfg.r.ok_or_else(|| Error::Config(vec!["find-eq needs `r` or a `sweep` section".into()]))?;
        let alphas = cfg
            .alphas
            .clone()
            .ok_or_else(|| Error::Config(vec!["find-eq needs `alphas` as the initial guess".into()]))?;
        match equilibria::solve_equilibrium(&cfg.masses, r, &cfg.space, &alphas, &cfg.solver)? {
            SolveOutcome::Equilibrium(rec) => vec![canonicalize(&rec)],
            SolveOutcome::Unbalanced { consistency, .. } => return Err(Error::NoSolution(format!(
                "the tangential criterion converged but the bodies disagree on A^2 (spread {consistency:e})"
            ))),
            SolveOutcome::NoSolution(diag) => {
                return Err(Error::NoSolution(format!(
                    "{} after {} iterations (residual {:e})",
                    diag.reason, diag.iterations, diag.residual_norm
                )))
            }
        }
    };
    catalog::persist_catalog(&records, out)?;
    for rec in &records {
        writeln!(log, "{}", summary_line(rec))?;
    }
    Ok(records)
}

/// `verify`: re-certifies record `index` (0-based) of a catalog.
/// Returns whether every check passed.
pub fn verify(eq: &Path, index: usize, log: &mut dyn Write) -> Result<bool> {
    let records = catalog::load_catalog(eq)?;
    let rec = records.get(index).ok_or_else(|| {
        Error::InvalidInput(format!("catalog has {} records, no index {index}", records.len()))
    })?;
    let cert = certify(rec, &CertifyOptions::default())?;
    for c in &cert.checks {
        writeln!(
            log,
            "{} {}: {:.3e} (threshold {:.0e})",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        )?;
    }
    Ok(cert.passed())
}

/// `probe`: dispatches on the config's `probe.kind`.
pub fn probe(
    cfg: &RunConfig,
    out: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
    log: &mut dyn Write,
) -> Result<()> {
    let settings =
        cfg.probe.as_ref().ok_or_else(|| Error::Config(vec!["probe needs a `probe` section".into()]))?;
    match settings {
        ProbeSettings::MinDistance => {
            let result = sweep_equilibria(&cfg.sweep_spec(seed)?, threads)?;
            let roots = result.converged();
            let report = experiments::min_distance_probe(&roots)?;
            std::fs::write(out, report.to_csv())?;
            match report.global_min {
                Some((id, d)) => {
                    let status = if id < result.catalog.len() { "verified" } else { "unverified" };
                    writeln!(log, "empirical minimum distance {d:.12} at record {id} ({status})")?;
                    writeln!(log, "witness: {}", summary_line(&roots[id]))?;
                }
                None => writeln!(log, "no converged records")?,
            }
        }
        ProbeSettings::Boundedness { angular_velocity, family, r_search, grid_points } => {
            let family = match family {
                ProbeFamily::Polygon => Family::Polygon,
                ProbeFamily::Solver => Family::Solver {
                    initial_alphas: cfg
                        .alphas
                        .clone()
                        .ok_or_else(|| Error::Config(vec!["the solver family needs `alphas`".into()]))?,
                    options: cfg.solver.clone(),
                },
            };
            let report = experiments::boundedness_probe(
                &cfg.masses,
                &cfg.space,
                *angular_velocity,
                &family,
                *r_search,
                *grid_points,
            )?;
            std::fs::write(out, report.to_csv())?;
            writeln!(log, "empirical verdict: {:?}", report.verdict)?;
            match (report.solved_r, &report.no_solution) {
                (Some(r), _) => writeln!(log, "A^2(r) = {} at r = {r:.15}", report.target_a_squared)?,
                (None, Some(why)) => writeln!(log, "no solution in range: {why}")?,
                (None, None) => {}
            }
        }
        ProbeSettings::ClusterBlowup { deltas } => {
            let r = cfg.r.ok_or_else(|| Error::Config(vec!["the cluster probe needs `r`".into()]))?;
            let report = probes::cluster_blowup_probe(&cfg.masses, r, &cfg.space, deltas)?;
            std::fs::write(out, report.to_csv())?;
            let ratios: Vec<String> = report.ratios.iter().map(|x| format!("{x:.4}")).collect();
            writeln!(log, "empirical growth ratios: [{}]", ratios.join(", "))?;
        }
    }
    Ok(())
}

/// Convenience for callers holding a path rather than a parsed config.
pub fn load(config: &Path) -> Result<RunConfig> {
    config::parse_config(config)
}
