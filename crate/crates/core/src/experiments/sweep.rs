use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::equilibria::{
    self, canonicalize, certify, same_equilibrium, CertifyOptions, EquilibriumRecord, MassVector,
    SolveOutcome, SolverOptions,
};
use crate::error::{Error, Result};
use crate::geometry::SpaceSpec;

/// Canonical angles within this distance are the same equilibrium.
pub const DEDUP_ANGLE_TOL: f64 = 1e-8;

pub const DEFAULT_MIN_SEPARATION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub space: SpaceSpec,
    pub masses: MassVector,
    pub r_grid: Vec<f64>,
    /// Random starts per grid radius.
    pub starts: usize,
    /// Smallest circular distance between seeded start angles.
    pub min_separation: f64,
    pub seed: u64,
    pub solver: SolverOptions,
    pub certify: CertifyOptions,
}

impl SweepSpec {
    pub fn new(space: SpaceSpec, masses: MassVector, r_grid: Vec<f64>, starts: usize, seed: u64) -> Self {
        SweepSpec {
            space,
            masses,
            r_grid,
            starts,
            min_separation: DEFAULT_MIN_SEPARATION,
            seed,
            solver: SolverOptions::default(),
            certify: CertifyOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.r_grid.iter().find(|r| !equilibria::feasible_radius(**r, &self.space)) {
            return Err(match self.space.curvature() {
                crate::geometry::Curvature::Positive if *r > 1.0 => Error::InfeasibleRadius { r: *r },
                _ => Error::InvalidInput(format!("grid radius {r} is not feasible")),
            });
        }
        let n = self.masses.len();
        if n < 2 {
            return Err(Error::InvalidInput("a sweep needs at least two bodies".into()));
        }
        if !(self.min_separation >= 0.0) || self.min_separation * n as f64 >= TAU {
            return Err(Error::InvalidInput(format!(
                "cannot place {n} angles {} rad apart",
                self.min_separation
            )));
        }
        Ok(())
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Uniform angles in `[0, 2pi)` with every pair at least `min_separation` apart.
pub fn seed_angles<R: Rng>(n: usize, min_separation: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let mut angles: Vec<f64> = Vec::with_capacity(n);
        let mut ok = true;
        for _ in 0..n {
            let mut placed = false;
            for _ in 0..1000 {
                let a = rng.random_range(0.0..TAU);
                if angles.iter().all(|b| circular_gap(a, *b) >= min_separation) {
                    angles.push(a);
                    placed = true;
                    break;
                }
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if ok {
            return angles;
        }
    }
}

/// A converged solve that did not make it into the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Unverified {
    pub record: EquilibriumRecord,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub r: f64,
    pub start: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    /// Canonical, deduplicated and certified equilibria in grid order.
    pub catalog: Vec<EquilibriumRecord>,
    /// Distinct roots of the tangential criterion that failed certification
    /// (typically because the bodies disagree on the angular velocity).
    pub unverified: Vec<Unverified>,
    pub failures: Vec<SweepFailure>,
}

impl SweepResult {
    /// Every distinct converged root, certified or not.
    pub fn converged(&self) -> Vec<EquilibriumRecord> {
        self.catalog.iter().cloned().chain(self.unverified.iter().map(|u| u.record.clone())).collect()
    }
}

fn push_distinct(list: &mut Vec<(EquilibriumRecord, String)>, rec: EquilibriumRecord, note: String) {
    if !list.iter().any(|(r, _)| same_equilibrium(r, &rec, DEDUP_ANGLE_TOL)) {
        list.push((rec, note));
    }
}

/// Multi-start solves over the radius grid, merged deterministically.
///
/// `threads` caps the worker count; `None` uses the global rayon pool.
pub fn sweep_equilibria(spec: &SweepSpec, threads: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.masses.len();
    let jobs: Vec<(usize, usize, Vec<f64>)> = spec
        .r_grid
        .iter()
        .enumerate()
        .flat_map(|(ri, _)| (0..spec.starts).map(move |s| (ri, s)))
        .map(|(ri, s)| (ri, s, seed_angles(n, spec.min_separation, &mut rng)))
        .collect();

    let run = || -> Result<SweepResult> {
        let outcomes: Vec<Result<SolveOutcome>> = jobs
            .par_iter()
            .map(|(ri, _, start)| {
                equilibria::solve_equilibrium(
                    &spec.masses,
                    spec.r_grid[*ri],
                    &spec.space,
                    start,
                    &spec.solver,
                )
            })
            .collect();

        let mut result = SweepResult::default();
        for ri in 0..spec.r_grid.len() {
            let mut balanced = Vec::new();
            let mut unbalanced = Vec::new();
            for ((jri, start, _), outcome) in jobs.iter().zip(&outcomes) {
                if *jri != ri {
                    continue;
                }
                match outcome {
                    Ok(SolveOutcome::Equilibrium(rec)) => {
                        push_distinct(&mut balanced, canonicalize(rec), String::new())
                    }
                    Ok(SolveOutcome::Unbalanced { record, consistency }) => push_distinct(
                        &mut unbalanced,
                        canonicalize(record),
                        format!("A^2 spread {consistency:e} exceeds {:e}", spec.solver.tol_consistency),
                    ),
                    Ok(SolveOutcome::NoSolution(diag)) => result.failures.push(SweepFailure {
                        r: spec.r_grid[ri],
                        start: *start,
                        reason: diag.reason.clone(),
                    }),
                    Err(e) => result.failures.push(SweepFailure {
                        r: spec.r_grid[ri],
                        start: *start,
                        reason: e.to_string(),
                    }),
                }
            }
            let certificates: Vec<Result<equilibria::Certificate>> =
                balanced.par_iter().map(|(rec, _)| certify(rec, &spec.certify)).collect();
            for ((rec, _), cert) in balanced.into_iter().zip(certificates) {
                match cert {
                    Ok(c) if c.passed() => result.catalog.push(rec),
                    Ok(c) => {
                        let failed: Vec<String> = c
                            .checks
                            .iter()
                            .filter(|k| !k.passed())
                            .map(|k| format!("{} = {:e} > {:e}", k.name, k.value, k.threshold))
                            .collect();
                        result.unverified.push(Unverified { record: rec, reason: failed.join("; ") })
                    }
                    Err(e) => result.unverified.push(Unverified { record: rec, reason: e.to_string() }),
                }
            }
            result
                .unverified
                .extend(unbalanced.into_iter().map(|(record, reason)| Unverified { record, reason }));
        }
        Ok(result)
    };

    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::regular_polygon;

    #[test]
    fn seeded_angles_are_separated_and_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = seed_angles(5, 0.1, &mut a);
            assert_eq!(x, seed_angles(5, 0.1, &mut b));
            for i in 0..5 {
                assert!((0.0..TAU).contains(&x[i]));
                for j in (i + 1)..5 {
                    assert!(circular_gap(x[i], x[j]) >= 0.1);
                }
            }
        }
    }

    #[test]
    fn empty_grid_gives_empty_catalog() {
        let spec = SweepSpec::new(SpaceSpec::sphere(2).unwrap(), MassVector::equal(3), vec![], 5, 1);
        let res = sweep_equilibria(&spec, Some(1)).unwrap();
        assert!(res.catalog.is_empty() && res.unverified.is_empty() && res.failures.is_empty());
    }

    #[test]
    fn equal_triangle_found_at_each_radius() {
        let grid = vec![0.3, 0.5, 0.7];
        let spec = SweepSpec::new(SpaceSpec::sphere(2).unwrap(), MassVector::equal(3), grid.clone(), 8, 11);
        let res = sweep_equilibria(&spec, None).unwrap();
        let triangle = regular_polygon(3);
        for r in grid {
            assert!(
                res.catalog.iter().any(|rec| rec.cfg.r == r
                    && rec.cfg.alphas.iter().zip(&triangle).all(|(a, b)| (a - b).abs() < 1e-8)),
                "missing triangle at r = {r}"
            );
        }
    }

    #[test]
    fn antipodal_pair_is_cataloged_when_balanced() {
        let space = SpaceSpec::hyperbolic(2).unwrap();
        let spec = SweepSpec::new(space, MassVector::equal(2), vec![0.5, 1.5], 3, 5);
        let res = sweep_equilibria(&spec, Some(2)).unwrap();
        assert_eq!(res.catalog.len(), 2);
        for rec in &res.catalog {
            assert!((rec.cfg.alphas[1] - std::f64::consts::PI).abs() < 1e-10);
        }

        let spec = SweepSpec::new(space, MassVector::new(vec![1.0, 2.0]).unwrap(), vec![0.5], 3, 5);
        let res = sweep_equilibria(&spec, Some(2)).unwrap();
        assert!(res.catalog.is_empty());
        assert_eq!(res.unverified.len(), 1);
    }

    #[test]
    fn sweep_is_deterministic_across_thread_counts() {
        let spec = SweepSpec::new(
            SpaceSpec::sphere(2).unwrap(),
            MassVector::new(vec![1.0, 1.3, 0.8]).unwrap(),
            vec![0.4, 0.6],
            6,
            42,
        );
        let a = sweep_equilibria(&spec, Some(1)).unwrap();
        let b = sweep_equilibria(&spec, Some(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_grid_is_rejected() {
        let spec = SweepSpec::new(SpaceSpec::sphere(2).unwrap(), MassVector::equal(3), vec![0.5, 1.2], 2, 0);
        assert!(matches!(sweep_equilibria(&spec, None), Err(Error::InfeasibleRadius { .. })));
    }
}
