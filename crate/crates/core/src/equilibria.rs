//! Relative equilibria `q_i(t) = (T(At) Q_i, Z)` with `Q_i = r (cos a_i, sin a_i)`.
//!
//! Substituting the rotating ansatz into the equations of motion splits the
//! force balance into a tangential part, which involves only the angles and
//! `r`,
//!
//! ```text
//! F_i = sum_{j != i} m_j sin(a_i - a_j) / [ u_ij^(3/2) (2 - sigma r^2 u_ij)^(3/2) ] = 0,
//! u_ij = 1 - cos(a_i - a_j),
//! ```
//!
//! and, when `Z != 0`, a radial part that fixes the angular velocity:
//!
//! ```text
//! sigma A^2 r^2 = sum_{j != i} m_j (1 - sigma q_i.q_j) / (sigma - sigma (q_i.q_j)^2)^(3/2).
//! ```

use std::cmp::Ordering;
use std::f64::consts::TAU;

use crate::dynamics::{self, IntegrationConfig};
use crate::error::{Error, Result, SingularityKind};
use crate::geometry::{self, inner, Curvature, PolarConfiguration, SpaceSpec};
use crate::newton::{self, NewtonOptions};

/// Pair kernels with `u` or `2 - sigma r^2 u` at or below this are singular.
pub const TOL_PAIR: f64 = 1e-12;

/// Relative spread allowed between per-body values of `A^2`.
pub const TOL_CONSISTENCY: f64 = 1e-10;

/// Positive point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MassVector(Vec<f64>);

impl MassVector {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidInput("mass vector is empty".into()));
        }
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidInput(format!("mass {i} must be positive, got {m}")));
        }
        Ok(MassVector(masses))
    }

    pub fn equal(n: usize) -> Self {
        MassVector(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `u = 1 - cos(delta)` and the criterion denominator `u^(3/2) (2 - sigma r^2 u)^(3/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairKernel {
    pub u: f64,
    pub denom: f64,
}

fn kernel(delta: f64, r: f64, sigma: f64) -> std::result::Result<PairKernel, SingularityKind> {
    // 2 sin^2(d/2) avoids the cancellation in 1 - cos(d) for small d.
    let half = (0.5 * delta).sin();
    let u = 2.0 * half * half;
    if !(u > TOL_PAIR) {
        return Err(SingularityKind::Collision);
    }
    let radial = 2.0 - sigma * r * r * u;
    if !(radial > TOL_PAIR) {
        return Err(SingularityKind::Antipodal);
    }
    Ok(PairKernel { u, denom: (u * radial).powf(1.5) })
}

/// The pair kernel for an angle difference `delta_alpha`.
pub fn pair_kernel(delta_alpha: f64, r: f64, space: &SpaceSpec) -> Result<PairKernel> {
    kernel(delta_alpha, r, space.sigma()).map_err(|kind| Error::Singularity { i: 0, j: 1, kind })
}

/// One summand of the tangential criterion: `m_j sin(delta) / denom`.
pub fn pair_term(delta_alpha: f64, mass: f64, r: f64, space: &SpaceSpec) -> Result<f64> {
    let k = pair_kernel(delta_alpha, r, space)?;
    Ok(mass * delta_alpha.sin() / k.denom)
}

/// Absolute difference between `sigma - sigma (q_i.q_j)^2`, computed from
/// embedded coordinates, and its reduction `r^2 u (2 - sigma r^2 u)`.
pub fn denominator_identity_check(alpha_i: f64, alpha_j: f64, r: f64, space: &SpaceSpec) -> Result<f64> {
    let (ambient, reduced, _) = denominator_sides(alpha_i, alpha_j, r, space)?;
    Ok((ambient - reduced).abs())
}

/// [`denominator_identity_check`] divided by the magnitude of the operands
/// of the ambient subtraction, `max(1, (q_i.q_j)^2)`.
pub fn denominator_identity_relative(alpha_i: f64, alpha_j: f64, r: f64, space: &SpaceSpec) -> Result<f64> {
    let (ambient, reduced, x) = denominator_sides(alpha_i, alpha_j, r, space)?;
    Ok((ambient - reduced).abs() / (x * x).max(1.0))
}

fn denominator_sides(alpha_i: f64, alpha_j: f64, r: f64, space: &SpaceSpec) -> Result<(f64, f64, f64)> {
    let cfg = PolarConfiguration::canonical(r, vec![alpha_i, alpha_j], space)?;
    let q = geometry::embed_polar(&cfg, space)?;
    let sigma = space.sigma();
    let x = inner(sigma, &q[0], &q[1]);
    let ambient = sigma - sigma * x * x;
    let u = 1.0 - (alpha_i - alpha_j).cos();
    let reduced = r * r * u * (2.0 - sigma * r * r * u);
    Ok((ambient, reduced, x))
}

fn check_bodies(masses: &MassVector, cfg: &PolarConfiguration) -> Result<()> {
    if masses.len() != cfg.n() {
        return Err(Error::InvalidInput(format!("{} masses for {} bodies", masses.len(), cfg.n())));
    }
    Ok(())
}

/// Matrix of summands `m_j sin(a_i - a_j) / denom_ij` (zero diagonal).
pub fn criterion_terms(
    masses: &MassVector,
    cfg: &PolarConfiguration,
    space: &SpaceSpec,
) -> Result<Vec<Vec<f64>>> {
    check_bodies(masses, cfg)?;
    terms_raw(masses.as_slice(), &cfg.alphas, cfg.r, space.sigma())
}

fn terms_raw(masses: &[f64], alphas: &[f64], r: f64, sigma: f64) -> Result<Vec<Vec<f64>>> {
    let n = alphas.len();
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let delta = alphas[i] - alphas[j];
            let k = kernel(delta, r, sigma).map_err(|kind| Error::Singularity { i, j, kind })?;
            let w = delta.sin() / k.denom;
            t[i][j] = masses[j] * w;
            t[j][i] = -masses[i] * w;
        }
    }
    Ok(t)
}

fn residual_raw(masses: &[f64], alphas: &[f64], r: f64, sigma: f64) -> Result<Vec<f64>> {
    Ok(terms_raw(masses, alphas, r, sigma)?.iter().map(|row| row.iter().sum()).collect())
}

/// Tangential residuals `F_i`; all vanish at a relative equilibrium.
pub fn criterion_residual(
    masses: &MassVector,
    cfg: &PolarConfiguration,
    space: &SpaceSpec,
) -> Result<Vec<f64>> {
    check_bodies(masses, cfg)?;
    if !(cfg.r.is_finite() && cfg.r > 0.0) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {}", cfg.r)));
    }
    residual_raw(masses.as_slice(), &cfg.alphas, cfg.r, space.sigma())
}

fn require_nonzero_block(cfg: &PolarConfiguration, space: &SpaceSpec) -> Result<()> {
    cfg.validate(space)?;
    if cfg.z_is_zero() {
        return Err(Error::RadialBalanceUndefined);
    }
    Ok(())
}

/// `A^2` from the radial balance of body `body_index`, evaluated through the
/// ambient inner products `q_i.q_j`.
pub fn angular_velocity_squared(
    masses: &MassVector,
    cfg: &PolarConfiguration,
    space: &SpaceSpec,
    body_index: usize,
) -> Result<f64> {
    check_bodies(masses, cfg)?;
    require_nonzero_block(cfg, space)?;
    if body_index >= cfg.n() {
        return Err(Error::InvalidInput(format!("no body {body_index}")));
    }
    let sigma = space.sigma();
    let q = geometry::embed_polar(cfg, space)?;
    let i = body_index;
    let mut sum = 0.0;
    for (j, m) in masses.as_slice().iter().enumerate() {
        if j == i {
            continue;
        }
        let x = inner(sigma, &q[i], &q[j]);
        let s = sigma - sigma * x * x;
        if !(s > dynamics::TOL_SINGULARITY) {
            let kind = if sigma * x > 0.0 { SingularityKind::Collision } else { SingularityKind::Antipodal };
            return Err(Error::Singularity { i: i.min(j), j: i.max(j), kind });
        }
        sum += m * (1.0 - sigma * x) / s.powf(1.5);
    }
    Ok(sum / (sigma * cfg.r * cfg.r))
}

/// Closed form of the radial balance:
/// `A^2 = sum_{j != i} m_j / (r^3 u_ij^(1/2) (2 - sigma r^2 u_ij)^(3/2))`.
pub fn angular_velocity_squared_closed_form(
    masses: &MassVector,
    cfg: &PolarConfiguration,
    space: &SpaceSpec,
    body_index: usize,
) -> Result<f64> {
    check_bodies(masses, cfg)?;
    require_nonzero_block(cfg, space)?;
    if body_index >= cfg.n() {
        return Err(Error::InvalidInput(format!("no body {body_index}")));
    }
    let (sigma, r) = (space.sigma(), cfg.r);
    let i = body_index;
    let mut sum = 0.0;
    for (j, m) in masses.as_slice().iter().enumerate() {
        if j == i {
            continue;
        }
        let k = kernel(cfg.alphas[i] - cfg.alphas[j], r, sigma).map_err(|kind| Error::Singularity {
            i: i.min(j),
            j: i.max(j),
            kind,
        })?;
        sum += m / (r.powi(3) * k.u.sqrt() * (2.0 - sigma * r * r * k.u).powf(1.5));
    }
    Ok(sum)
}

fn per_body_a_squared(masses: &MassVector, cfg: &PolarConfiguration, space: &SpaceSpec) -> Result<Vec<f64>> {
    (0..cfg.n()).map(|i| angular_velocity_squared(masses, cfg, space, i)).collect()
}

/// `max |A^2(i) - A^2(i')| / max A^2(i)`; zero at a relative equilibrium.
pub fn angular_velocity_consistency(
    masses: &MassVector,
    cfg: &PolarConfiguration,
    space: &SpaceSpec,
) -> Result<f64> {
    if cfg.n() < 2 {
        return Err(Error::InvalidInput("consistency needs at least two bodies".into()));
    }
    Ok(spread(&per_body_a_squared(masses, cfg, space)?))
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (hi - lo) / hi.abs()
}

/// A solved relative equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumRecord {
    pub space: SpaceSpec,
    pub masses: MassVector,
    pub cfg: PolarConfiguration,
    /// Nonnegative root of `A^2`.
    pub angular_velocity: f64,
    /// `max_i |F_i|` at the stored angles.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl EquilibriumRecord {
    pub fn positions(&self) -> Result<Vec<geometry::AmbientPoint>> {
        geometry::embed_polar(&self.cfg, &self.space)
    }

    pub fn min_distance(&self) -> Result<f64> {
        let q = self.positions()?;
        Ok(geometry::min_pairwise_distance(&q).map_or(f64::INFINITY, |(_, _, d)| d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub newton: NewtonOptions,
    /// Angular velocity to assign on a great circle, where the radial
    /// balance leaves it undetermined.
    pub great_circle_angular_velocity: Option<f64>,
    pub tol_consistency: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            newton: NewtonOptions::default(),
            great_circle_angular_velocity: None,
            tol_consistency: TOL_CONSISTENCY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub residual_norm: f64,
    pub last_alphas: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    /// Tangential criterion solved and all bodies agree on `A`.
    Equilibrium(EquilibriumRecord),
    /// Tangential criterion solved, but the radial balance gives different
    /// `A^2` for different bodies, so no common rotation exists. The stored
    /// angular velocity is the root of the mean `A^2`.
    Unbalanced {
        record: EquilibriumRecord,
        consistency: f64,
    },
    NoSolution(SolverDiagnostics),
}

impl SolveOutcome {
    pub fn equilibrium(&self) -> Option<&EquilibriumRecord> {
        match self {
            SolveOutcome::Equilibrium(r) => Some(r),
            _ => None,
        }
    }

    /// The converged record, balanced or not.
    pub fn converged_record(&self) -> Option<&EquilibriumRecord> {
        match self {
            SolveOutcome::Equilibrium(r) | SolveOutcome::Unbalanced { record: r, .. } => Some(r),
            SolveOutcome::NoSolution(_) => None,
        }
    }
}

/// Finds angles solving the tangential criterion at radius `r`.
///
/// The first angle is pinned to zero (the criterion is invariant under a
/// common rotation) and damped Newton runs on `F_2..F_n`.
pub fn solve_equilibrium(
    masses: &MassVector,
    r: f64,
    space: &SpaceSpec,
    initial_alphas: &[f64],
    options: &SolverOptions,
) -> Result<SolveOutcome> {
    let z_block = geometry::solve_z_block(r, space)?;
    let n = initial_alphas.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two bodies".into()));
    }
    if masses.len() != n {
        return Err(Error::InvalidInput(format!("{} masses for {n} initial angles", masses.len())));
    }
    let shifted: Vec<f64> = initial_alphas.iter().map(|a| a - initial_alphas[0]).collect();
    terms_raw(masses.as_slice(), &shifted, r, space.sigma())
        .map_err(|e| Error::InvalidInput(format!("initial angles are singular: {e}")))?;

    let m = masses.as_slice();
    let sigma = space.sigma();
    let reduced = |free: &[f64]| -> Result<Vec<f64>> {
        let mut alphas = Vec::with_capacity(n);
        alphas.push(0.0);
        alphas.extend_from_slice(free);
        Ok(residual_raw(m, &alphas, r, sigma)?[1..].to_vec())
    };
    let report = newton::damped_newton(reduced, &shifted[1..], &options.newton)?;

    let mut alphas = vec![0.0];
    alphas.extend_from_slice(&report.x);
    let full = residual_raw(m, &alphas, r, sigma)?;
    let residual_norm = newton::inf_norm(&full);
    if !report.converged || residual_norm > options.newton.tolerance {
        return Ok(SolveOutcome::NoSolution(SolverDiagnostics {
            iterations: report.iterations,
            residual_norm,
            last_alphas: alphas,
            reason: report.failure.unwrap_or_else(|| "full residual above tolerance".into()),
        }));
    }

    let cfg = PolarConfiguration { r, alphas, z_block };
    let mut record = EquilibriumRecord {
        space: *space,
        masses: masses.clone(),
        cfg,
        angular_velocity: 0.0,
        residual_norm,
        converged: true,
        iterations: report.iterations,
    };
    if record.cfg.z_is_zero() {
        let a = options.great_circle_angular_velocity.ok_or(Error::RadialBalanceUndefined)?;
        record.angular_velocity = a.abs();
        return Ok(SolveOutcome::Equilibrium(record));
    }
    let a_sq = per_body_a_squared(masses, &record.cfg, space)?;
    let consistency = spread(&a_sq);
    record.angular_velocity = (a_sq.iter().sum::<f64>() / a_sq.len() as f64).max(0.0).sqrt();
    if consistency <= options.tol_consistency {
        Ok(SolveOutcome::Equilibrium(record))
    } else {
        Ok(SolveOutcome::Unbalanced { record, consistency })
    }
}

fn reduce_angle(a: f64) -> f64 {
    let b = a.rem_euclid(TAU);
    if b >= TAU {
        0.0
    } else {
        b
    }
}

const CANONICAL_TIE: f64 = 1e-12;

fn cmp_angles(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > CANONICAL_TIE {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

/// Canonical form under rotation and relabeling.
///
/// Every body is tried as the one placed at angle zero; the remaining angles
/// are reduced to `[0, 2pi)` and bodies sorted by angle (ties by mass, then
/// by original index). The candidate with the lexicographically smallest
/// mass sequence, then angle sequence, wins; near-ties keep the earliest pivot.
pub fn canonicalize(record: &EquilibriumRecord) -> EquilibriumRecord {
    let masses = record.masses.as_slice();
    let n = record.cfg.n();
    let mut best: Option<(Vec<f64>, Vec<f64>)> = None;
    for pivot in 0..n {
        let base = record.cfg.alphas[pivot];
        let mut order: Vec<(f64, f64, usize)> = (0..n)
            .map(|i| {
                let a = if i == pivot { 0.0 } else { reduce_angle(record.cfg.alphas[i] - base) };
                (a, masses[i], i)
            })
            .collect();
        order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.cmp(&y.2)));
        let cand_m: Vec<f64> = order.iter().map(|o| o.1).collect();
        let cand_a: Vec<f64> = order.iter().map(|o| o.0).collect();
        let better = match &best {
            None => true,
            Some((bm, ba)) => {
                let by_mass = cand_m
                    .iter()
                    .zip(bm)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal);
                by_mass.then_with(|| cmp_angles(&cand_a, ba)) == Ordering::Less
            }
        };
        if better {
            best = Some((cand_m, cand_a));
        }
    }
    let (m, a) = best.unwrap_or_default();
    let mut out = record.clone();
    out.masses = MassVector(m);
    out.cfg.alphas = a;
    out
}

/// True when two canonical records describe the same equilibrium.
pub fn same_equilibrium(a: &EquilibriumRecord, b: &EquilibriumRecord, angle_tol: f64) -> bool {
    a.space == b.space
        && a.masses == b.masses
        && (a.cfg.r - b.cfg.r).abs() <= 1e-12 * a.cfg.r.max(1.0)
        && a.cfg.alphas.len() == b.cfg.alphas.len()
        && a.cfg.alphas.iter().zip(&b.cfg.alphas).all(|(x, y)| {
            let d = (x - y).abs();
            d <= angle_tol || (TAU - d) <= angle_tol
        })
}

/// Thresholds for [`certify`].
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub residual: f64,
    pub consistency: f64,
    /// Agreement between the ambient and closed forms of `A^2`.
    pub balance_forms: f64,
    pub rigidity: f64,
    pub manifold: f64,
    /// Largest step of the rigidity integration.
    pub max_step: f64,
    pub min_steps_per_period: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            residual: 1e-12,
            consistency: TOL_CONSISTENCY,
            balance_forms: 1e-12,
            rigidity: 1e-6,
            manifold: 1e-9,
            max_step: 1e-3,
            min_steps_per_period: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.threshold
    }
}

/// Independent re-checks of a record: residual, radial consistency (when
/// `Z != 0`), and rigidity of the integrated motion over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.value)
    }
}

/// Length of the rigidity run: one period `2 pi / A`, or `2 pi` when `A = 0`.
pub fn rigidity_horizon(angular_velocity: f64) -> f64 {
    if angular_velocity > 0.0 {
        TAU / angular_velocity
    } else {
        TAU
    }
}

pub fn certify(record: &EquilibriumRecord, opts: &CertifyOptions) -> Result<Certificate> {
    let space = &record.space;
    let cfg = &record.cfg;
    cfg.validate(space)?;
    let mut checks = Vec::new();

    let residual = newton::inf_norm(&criterion_residual(&record.masses, cfg, space)?);
    checks.push(Check { name: "criterion residual", value: residual, threshold: opts.residual });

    if !cfg.z_is_zero() && cfg.n() >= 2 {
        let ambient = per_body_a_squared(&record.masses, cfg, space)?;
        checks.push(Check { name: "A^2 consistency", value: spread(&ambient), threshold: opts.consistency });
        let mut forms = 0.0f64;
        for (i, a) in ambient.iter().enumerate() {
            let closed = angular_velocity_squared_closed_form(&record.masses, cfg, space, i)?;
            forms = forms.max((a - closed).abs() / closed.abs());
        }
        checks.push(Check {
            name: "A^2 ambient vs closed form",
            value: forms,
            threshold: opts.balance_forms,
        });
        let a_sq = record.angular_velocity * record.angular_velocity;
        let mean = ambient.iter().sum::<f64>() / ambient.len() as f64;
        checks.push(Check {
            name: "stored angular velocity",
            value: (a_sq - mean).abs() / mean,
            threshold: opts.consistency,
        });
    }

    let horizon = rigidity_horizon(record.angular_velocity);
    let steps = ((horizon / opts.max_step).ceil() as usize).max(opts.min_steps_per_period);
    let state0 = dynamics::initial_state_from_equilibrium(cfg, record.angular_velocity, space)?;
    let int_cfg = IntegrationConfig {
        step_size: horizon / steps as f64,
        t_end: horizon,
        projection_enabled: true,
        output_stride: (steps / 200).max(1),
    };
    let series = dynamics::simulate(&state0, &record.masses, space, &int_cfg)?;
    checks.push(Check {
        name: "rigidity drift over one period",
        value: dynamics::rigidity_drift(&series, &state0),
        threshold: opts.rigidity,
    });
    let manifold = series.iter().map(|s| s.manifold_drift(space)).fold(0.0, f64::max);
    checks.push(Check { name: "manifold drift", value: manifold, threshold: opts.manifold });
    Ok(Certificate { checks })
}

/// Angles of the regular n-gon, `2 pi i / n`.
pub fn regular_polygon(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// Closed-form `A^2` of the equal-unit-mass regular n-gon at radius `r`.
pub fn polygon_angular_velocity_squared(n: usize, r: f64, space: &SpaceSpec) -> Result<f64> {
    let cfg = PolarConfiguration::canonical(r, regular_polygon(n), space)?;
    angular_velocity_squared_closed_form(&MassVector::equal(n), &cfg, space, 0)
}

/// Sanity helper for the sphere: `r` must not exceed one.
pub fn feasible_radius(r: f64, space: &SpaceSpec) -> bool {
    r.is_finite() && r > 0.0 && (space.curvature() == Curvature::Negative || r <= 1.0)
}
