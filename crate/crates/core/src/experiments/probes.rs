//! Numerical probes of the minimum-distance and compactness properties.
//!
//! All reports are empirical evidence gathered on finite grids; none of them
//! certifies a universal bound.

use std::f64::consts::TAU;

use crate::equilibria::{
    self, angular_velocity_squared_closed_form, regular_polygon, EquilibriumRecord, MassVector, SolveOutcome,
    SolverOptions,
};
use crate::error::{Error, Result};
use crate::experiments::catalog::fmt_f64;
use crate::geometry::{min_pairwise_distance, PolarConfiguration, SpaceSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct MinDistanceRow {
    pub record_id: usize,
    pub r: f64,
    pub n: usize,
    pub min_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinDistanceReport {
    /// Always true: the minimum is a witness, not a proven constant.
    pub empirical: bool,
    pub rows: Vec<MinDistanceRow>,
    /// Smallest distance over the catalog and the record attaining it.
    pub global_min: Option<(usize, f64)>,
}

impl MinDistanceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("record_id,r,n,min_distance\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.record_id,
                fmt_f64(row.r),
                row.n,
                fmt_f64(row.min_distance)
            ));
        }
        out
    }
}

/// Smallest ambient distance between any two bodies, per record and overall.
pub fn min_distance_probe(catalog: &[EquilibriumRecord]) -> Result<MinDistanceReport> {
    let mut rows = Vec::with_capacity(catalog.len());
    let mut global_min: Option<(usize, f64)> = None;
    for (id, rec) in catalog.iter().enumerate() {
        let q = rec.positions()?;
        let (i, j, d) = min_pairwise_distance(&q)
            .ok_or_else(|| Error::InvalidInput(format!("record {id} has fewer than two bodies")))?;
        if !(d > 0.0) {
            return Err(Error::InvalidConfiguration(format!("record {id}: bodies {i} and {j} coincide")));
        }
        if global_min.is_none_or(|(_, g)| d < g) {
            global_min = Some((id, d));
        }
        rows.push(MinDistanceRow { record_id: id, r: rec.cfg.r, n: rec.cfg.n(), min_distance: d });
    }
    Ok(MinDistanceReport { empirical: true, rows, global_min })
}

/// Which configurations a boundedness probe follows as `r` varies.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Equal-mass regular polygon, closed-form angular velocity.
    Polygon,
    /// Solver continuation from `initial_alphas`, warm-started across the grid.
    Solver { initial_alphas: Vec<f64>, options: SolverOptions },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundednessVerdict {
    /// `A^2` strictly decreasing over the grid; the level set is a single radius.
    Bounded,
    /// `A^2` not monotone on the grid.
    NotMonotone,
    /// Some grid radii had no equilibrium in the family.
    Incomplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    pub empirical: bool,
    /// `(r, A^2(r))` samples; `None` where the family has no equilibrium.
    pub samples: Vec<(f64, Option<f64>)>,
    pub strictly_decreasing: bool,
    pub verdict: BoundednessVerdict,
    pub target_a_squared: f64,
    /// Radius with `A^2(r) = A_fixed^2`, if one lies in the search interval.
    pub solved_r: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    /// Why `solved_r` is absent.
    pub no_solution: Option<String>,
}

impl BoundednessReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,a_squared\n");
        for (r, a) in &self.samples {
            let a = a.map(fmt_f64).unwrap_or_default();
            out.push_str(&format!("{},{}\n", fmt_f64(*r), a));
        }
        out
    }
}

pub const BISECTION_TOL: f64 = 1e-12;

/// Bisection for a root of `f` on `[lo, hi]`, given a sign change.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
        .collect()
}

/// `A^2` at a radius, given (and updating) a warm-start guess.
type SampleFn = dyn Fn(f64, &mut Vec<f64>) -> Option<f64>;

/// Traces `A^2(r)` of a family over `r_search` and inverts it at `A_fixed`.
pub fn boundedness_probe(
    masses: &MassVector,
    space: &SpaceSpec,
    a_fixed: f64,
    family: &Family,
    r_search: (f64, f64),
    grid_points: usize,
) -> Result<BoundednessReport> {
    let (lo, hi) = r_search;
    if !(a_fixed.is_finite() && a_fixed > 0.0) {
        return Err(Error::InvalidInput(format!("fixed angular velocity must be positive, got {a_fixed}")));
    }
    if !(lo > 0.0 && hi > lo && equilibria::feasible_radius(hi, space)) {
        return Err(Error::InvalidInput(format!("invalid radius interval [{lo}, {hi}]")));
    }
    if grid_points < 2 {
        return Err(Error::InvalidInput("need at least two grid points".into()));
    }
    let n = masses.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two bodies".into()));
    }

    let a_squared: Box<SampleFn> = match family {
        Family::Polygon => {
            if masses.as_slice().iter().any(|m| *m != masses.as_slice()[0]) {
                return Err(Error::InvalidInput("the polygon family needs equal masses".into()));
            }
            let masses = masses.clone();
            let space = *space;
            Box::new(move |r, _| {
                let cfg = PolarConfiguration::canonical(r, regular_polygon(n), &space).ok()?;
                angular_velocity_squared_closed_form(&masses, &cfg, &space, 0).ok()
            })
        }
        Family::Solver { initial_alphas, options } => {
            if initial_alphas.len() != n {
                return Err(Error::InvalidInput("initial angles do not match the masses".into()));
            }
            let masses = masses.clone();
            let space = *space;
            let options = options.clone();
            Box::new(move |r, warm: &mut Vec<f64>| {
                match equilibria::solve_equilibrium(&masses, r, &space, warm, &options).ok()? {
                    SolveOutcome::Equilibrium(rec) => {
                        *warm = rec.cfg.alphas.clone();
                        Some(rec.angular_velocity * rec.angular_velocity)
                    }
                    _ => None,
                }
            })
        }
    };
    let initial_warm = match family {
        Family::Solver { initial_alphas, .. } => initial_alphas.clone(),
        Family::Polygon => regular_polygon(n),
    };

    let mut warm = initial_warm.clone();
    let samples: Vec<(f64, Option<f64>)> =
        linspace(lo, hi, grid_points).into_iter().map(|r| (r, a_squared(r, &mut warm))).collect();
    let complete = samples.iter().all(|(_, a)| a.is_some());
    let values: Vec<f64> = samples.iter().filter_map(|(_, a)| *a).collect();
    let strictly_decreasing = complete && values.windows(2).all(|w| w[1] < w[0]);
    let verdict = if !complete {
        BoundednessVerdict::Incomplete
    } else if strictly_decreasing {
        BoundednessVerdict::Bounded
    } else {
        BoundednessVerdict::NotMonotone
    };

    let target = a_fixed * a_fixed;
    let mut report = BoundednessReport {
        empirical: true,
        samples,
        strictly_decreasing,
        verdict,
        target_a_squared: target,
        solved_r: None,
        bracket: None,
        no_solution: None,
    };

    let sup = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let inf = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        report.no_solution = Some("family has no equilibrium in the search interval".into());
        return Ok(report);
    }
    if target > sup {
        report.no_solution =
            Some(format!("A_fixed^2 = {target:e} exceeds the largest A^2 = {sup:e} on [{lo}, {hi}]"));
        return Ok(report);
    }
    if target < inf {
        report.no_solution =
            Some(format!("A_fixed^2 = {target:e} is below the smallest A^2 = {inf:e} on [{lo}, {hi}]"));
        return Ok(report);
    }

    // First grid cell whose values straddle the target.
    let cell = report.samples.windows(2).find_map(|w| match (w[0].1, w[1].1) {
        (Some(a), Some(b)) if (a - target) * (b - target) <= 0.0 => Some((w[0].0, w[1].0)),
        _ => None,
    });
    let Some((b_lo, b_hi)) = cell else {
        report.no_solution = Some("no grid cell brackets the target".into());
        return Ok(report);
    };
    let mut warm = initial_warm;
    let r = bisect(|r| a_squared(r, &mut warm).map_or(f64::NAN, |a| a - target), b_lo, b_hi, BISECTION_TOL);
    report.bracket = Some((b_lo, b_hi));
    report.solved_r = Some(r);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupRow {
    pub delta: f64,
    /// `|m_2 sin(delta) / denom|`, the clustered pair's contribution to `F_1`.
    pub pair_term: f64,
    /// `|F_1|` including the distant bodies.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub empirical: bool,
    pub rows: Vec<BlowupRow>,
    /// `|F_1|(delta_(k+1)) / |F_1|(delta_k)` for consecutive grid entries.
    pub ratios: Vec<f64>,
    /// Local exponent `p` in `|F_1| ~ delta^(-p)`.
    pub exponents: Vec<f64>,
    /// True when `|F_1|` grows at every refinement.
    pub monotone: bool,
}

impl BlowupReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,pair_term\n");
        for row in &self.rows {
            out.push_str(&format!("{},{}\n", fmt_f64(row.delta), fmt_f64(row.pair_term)));
        }
        out
    }
}

/// Angles for a two-body cluster `(0, delta)` with the remaining bodies
/// spread over the far side of the circle.
pub fn cluster_angles(n: usize, delta: f64) -> Vec<f64> {
    let far = n.saturating_sub(2);
    let mut alphas = vec![0.0, delta];
    alphas.extend((0..far).map(|k| TAU / 3.0 + (TAU / 3.0) * (k + 1) as f64 / (far + 1) as f64));
    alphas
}

/// Tabulates `|F_1|` as the first two bodies approach each other.
///
/// Stops at the first delta where the pair kernel becomes singular.
pub fn cluster_blowup_probe(
    masses: &MassVector,
    r: f64,
    space: &SpaceSpec,
    delta_grid: &[f64],
) -> Result<BlowupReport> {
    if masses.len() < 2 {
        return Err(Error::InvalidInput("need at least two bodies".into()));
    }
    if delta_grid.iter().any(|d| !(*d > 0.0)) || delta_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("delta grid must be positive and decreasing".into()));
    }
    let m = masses.as_slice();
    let mut rows = Vec::new();
    for &delta in delta_grid {
        let cfg = PolarConfiguration::canonical(r, cluster_angles(m.len(), delta), space)?;
        let pair = match equilibria::pair_term(-delta, m[1], r, space) {
            Ok(p) => p,
            Err(Error::Singularity { .. }) => break,
            Err(e) => return Err(e),
        };
        let f = match equilibria::criterion_residual(masses, &cfg, space) {
            Ok(f) => f,
            Err(Error::Singularity { .. }) => break,
            Err(e) => return Err(e),
        };
        rows.push(BlowupRow { delta, pair_term: pair.abs(), residual: f[0].abs() });
    }
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].residual / w[0].residual).collect();
    let exponents: Vec<f64> = rows
        .windows(2)
        .map(|w| (w[1].residual / w[0].residual).ln() / (w[0].delta / w[1].delta).ln())
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].residual > w[0].residual);
    Ok(BlowupReport { empirical: true, rows, ratios, exponents, monotone })
}

/// `delta_0, delta_0 / 2, ...` with `count` entries.
pub fn halving_grid(delta_0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| delta_0 / 2f64.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn record(space: SpaceSpec, r: f64, alphas: Vec<f64>) -> EquilibriumRecord {
        let n = alphas.len();
        EquilibriumRecord {
            space,
            masses: MassVector::equal(n),
            cfg: PolarConfiguration::canonical(r, alphas, &space).unwrap(),
            angular_velocity: 1.0,
            residual_norm: 0.0,
            converged: true,
            iterations: 0,
        }
    }

    #[test]
    fn min_distance_examples() {
        let s2 = SpaceSpec::sphere(2).unwrap();
        let rep = min_distance_probe(&[record(s2, 0.5, vec![0.0, PI])]).unwrap();
        assert!((rep.rows[0].min_distance - 1.0).abs() < 1e-15);

        let rep = min_distance_probe(&[record(s2, 0.5, vec![0.0, PI]), record(s2, 0.5, regular_polygon(3))])
            .unwrap();
        let expect = (2.0 * 0.25 * (1.0 - (TAU / 3.0).cos())).sqrt();
        assert!((expect - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((rep.rows[1].min_distance - expect).abs() < 1e-15);
        assert_eq!(rep.global_min.unwrap().0, 1);
        assert!(rep.empirical);
        assert!(rep.to_csv().starts_with("record_id,r,n,min_distance\n0,5.0000000000000000e-1,2,"));
    }

    #[test]
    fn coincident_record_is_an_invariant_violation() {
        let s2 = SpaceSpec::sphere(2).unwrap();
        let rec = record(s2, 0.5, vec![1.0, 1.0, 3.0]);
        assert!(matches!(min_distance_probe(&[rec]), Err(Error::InvalidConfiguration(_))));
    }

    #[test]
    fn bisection_finds_a_simple_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_pair_inverts_closed_form() {
        let h2 = SpaceSpec::hyperbolic(2).unwrap();
        let a_sq = |r: f64| 1.0 / (4.0 * r.powi(3) * (1.0 + r * r).powf(1.5));
        let rep = boundedness_probe(
            &MassVector::equal(2),
            &h2,
            a_sq(0.5).sqrt(),
            &Family::Polygon,
            (0.1, 10.0),
            100,
        )
        .unwrap();
        assert_eq!(rep.verdict, BoundednessVerdict::Bounded);
        assert!((rep.solved_r.unwrap() - 0.5).abs() < 1e-10);
        for (r, a) in &rep.samples {
            assert!((a.unwrap() - a_sq(*r)).abs() <= 1e-12 * a_sq(*r));
        }
    }

    #[test]
    fn unreachable_angular_velocity_reports_no_solution() {
        let h2 = SpaceSpec::hyperbolic(2).unwrap();
        let rep =
            boundedness_probe(&MassVector::equal(2), &h2, 1e6, &Family::Polygon, (1.0, 10.0), 20).unwrap();
        assert!(rep.solved_r.is_none());
        assert!(rep.no_solution.unwrap().contains("exceeds"));
    }

    #[test]
    fn sphere_polygon_is_not_monotone() {
        let s2 = SpaceSpec::sphere(2).unwrap();
        let rep =
            boundedness_probe(&MassVector::equal(3), &s2, 2.0, &Family::Polygon, (0.1, 0.95), 40).unwrap();
        assert_eq!(rep.verdict, BoundednessVerdict::NotMonotone);
    }

    #[test]
    fn solver_family_tracks_the_triangle() {
        let h2 = SpaceSpec::hyperbolic(2).unwrap();
        let fam = Family::Solver { initial_alphas: vec![0.0, 2.0, 4.3], options: SolverOptions::default() };
        let target = equilibria::polygon_angular_velocity_squared(3, 1.0, &h2).unwrap().sqrt();
        let rep = boundedness_probe(&MassVector::equal(3), &h2, target, &fam, (0.5, 3.0), 11).unwrap();
        assert_eq!(rep.verdict, BoundednessVerdict::Bounded);
        assert!((rep.solved_r.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn blowup_scales_like_inverse_square() {
        let s2 = SpaceSpec::sphere(2).unwrap();
        let rep = cluster_blowup_probe(&MassVector::equal(3), 0.5, &s2, &halving_grid(0.1, 8)).unwrap();
        assert!(rep.monotone);
        for ratio in &rep.ratios[rep.ratios.len() - 3..] {
            assert!((ratio - 4.0).abs() < 0.2, "{:?}", rep.ratios);
        }
        let far = cluster_blowup_probe(&MassVector::equal(2), 0.5, &s2, &[PI]).unwrap();
        assert!(far.rows[0].residual.is_finite() && far.rows[0].residual < 10.0);
        assert!(rep.to_csv().starts_with("delta,pair_term\n"));
    }

    #[test]
    fn blowup_stops_at_the_singularity() {
        let s2 = SpaceSpec::sphere(2).unwrap();
        let rep = cluster_blowup_probe(&MassVector::equal(3), 0.5, &s2, &[1e-3, 1e-9]).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert!(cluster_blowup_probe(&MassVector::equal(3), 0.5, &s2, &[1e-3, 1e-2]).is_err());
    }
}
