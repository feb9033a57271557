//! Equations of motion on the model spaces and a projected RK4 integrator.
//!
//! Body `i` accelerates as
//!
//! ```text
//! q_i'' = sum_{j != i} m_j (q_j - sigma (q_i.q_j) q_i) / (sigma - sigma (q_i.q_j)^2)^(3/2)
//!         - sigma (q_i'.q_i') q_i
//! ```
//!
//! with the gravitational constant set to one.

use crate::equilibria::MassVector;
use crate::error::{Error, Result, SingularityKind};
use crate::geometry::{
    self, inner, normalize_to_manifold, pairwise_euclidean_distance, tangent_project, AmbientPoint,
    PolarConfiguration, SpaceSpec, TOL_MANIFOLD,
};

/// Tolerance on `|q_i . q_i'|` when validating a state.
pub const TOL_TANGENT: f64 = 1e-9;

/// Pairs with `sigma - sigma (q_i.q_j)^2` at or below this are singular.
pub const TOL_SINGULARITY: f64 = 1e-10;

pub const DEFAULT_OUTPUT_STRIDE: usize = 100;

/// Positions and velocities of all bodies at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientState {
    pub positions: Vec<AmbientPoint>,
    pub velocities: Vec<Vec<f64>>,
    pub time: f64,
}

impl AmbientState {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Checks the manifold, tangency and non-singularity invariants.
    pub fn validate(&self, space: &SpaceSpec) -> Result<()> {
        let dim = space.ambient_dim();
        let sigma = space.sigma();
        if self.positions.len() != self.velocities.len() {
            return Err(Error::InvalidInput(format!(
                "{} positions but {} velocities",
                self.positions.len(),
                self.velocities.len()
            )));
        }
        for (i, (q, v)) in self.positions.iter().zip(&self.velocities).enumerate() {
            if q.len() != dim || v.len() != dim {
                return Err(Error::InvalidInput(format!("body {i}: expected {dim} coordinates")));
            }
            let drift = (inner(sigma, q, q) - sigma).abs();
            if !(drift <= TOL_MANIFOLD) {
                return Err(Error::InvalidConfiguration(format!(
                    "body {i} is off the manifold by {drift:e}"
                )));
            }
            let tangency = inner(sigma, q, v).abs();
            if !(tangency <= TOL_TANGENT) {
                return Err(Error::InvalidConfiguration(format!(
                    "velocity of body {i} is not tangent ({tangency:e})"
                )));
            }
        }
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                pair_separation(i, j, &self.positions[i], &self.positions[j], sigma)?;
            }
        }
        Ok(())
    }

    /// Largest `|q_i . q_i - sigma|` over all bodies.
    pub fn manifold_drift(&self, space: &SpaceSpec) -> f64 {
        let sigma = space.sigma();
        self.positions.iter().map(|q| (inner(sigma, q, q) - sigma).abs()).fold(0.0, f64::max)
    }
}

/// Returns `(q_i.q_j, sigma - sigma (q_i.q_j)^2)` or a singularity error.
fn pair_separation(i: usize, j: usize, qi: &[f64], qj: &[f64], sigma: f64) -> Result<(f64, f64)> {
    let x = inner(sigma, qi, qj);
    let s = sigma - sigma * x * x;
    if !(s > TOL_SINGULARITY) {
        let kind = if sigma * x > 0.0 { SingularityKind::Collision } else { SingularityKind::Antipodal };
        return Err(Error::Singularity { i, j, kind });
    }
    Ok((x, s))
}

/// Fixed-step integration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationConfig {
    pub step_size: f64,
    pub t_end: f64,
    pub projection_enabled: bool,
    /// Steps between emitted samples.
    pub output_stride: usize,
}

impl IntegrationConfig {
    pub fn new(step_size: f64, t_end: f64) -> Self {
        IntegrationConfig { step_size, t_end, projection_enabled: true, output_stride: DEFAULT_OUTPUT_STRIDE }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::InvalidInput(format!("step size must be positive, got {}", self.step_size)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidInput(format!("end time must be positive, got {}", self.t_end)));
        }
        if self.step_size >= self.t_end {
            return Err(Error::InvalidInput("step size must be smaller than the end time".into()));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidInput("output stride must be positive".into()));
        }
        Ok(())
    }
}

/// Gravitational part of the acceleration of every body.
fn gravitational(positions: &[AmbientPoint], masses: &[f64], sigma: f64) -> Result<Vec<Vec<f64>>> {
    let n = positions.len();
    let dim = positions.first().map_or(0, Vec::len);
    let mut acc = vec![vec![0.0; dim]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (x, s) = pair_separation(i, j, &positions[i], &positions[j], sigma)?;
            let w = s.powf(-1.5);
            let (qi, qj) = (&positions[i], &positions[j]);
            for m in 0..dim {
                acc[i][m] += masses[j] * w * (qj[m] - sigma * x * qi[m]);
                acc[j][m] += masses[i] * w * (qi[m] - sigma * x * qj[m]);
            }
        }
    }
    Ok(acc)
}

/// The force-only part of the right-hand side, without the constraint term.
pub fn gravitational_acceleration(
    state: &AmbientState,
    masses: &MassVector,
    space: &SpaceSpec,
) -> Result<Vec<Vec<f64>>> {
    check_sizes(state, masses)?;
    gravitational(&state.positions, masses.as_slice(), space.sigma())
}

/// Right-hand side of the equations of motion for every body.
pub fn acceleration(state: &AmbientState, masses: &MassVector, space: &SpaceSpec) -> Result<Vec<Vec<f64>>> {
    check_sizes(state, masses)?;
    accel_raw(&state.positions, &state.velocities, masses.as_slice(), space.sigma())
}

fn accel_raw(
    positions: &[AmbientPoint],
    velocities: &[Vec<f64>],
    masses: &[f64],
    sigma: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut acc = gravitational(positions, masses, sigma)?;
    for ((a, q), v) in acc.iter_mut().zip(positions).zip(velocities) {
        let c = sigma * inner(sigma, v, v);
        a.iter_mut().zip(q).for_each(|(a, q)| *a -= c * q);
    }
    Ok(acc)
}

fn check_sizes(state: &AmbientState, masses: &MassVector) -> Result<()> {
    if masses.len() != state.n() {
        return Err(Error::InvalidInput(format!("{} masses for {} bodies", masses.len(), state.n())));
    }
    Ok(())
}

/// Initial state of the rigidly rotating solution with angular velocity `a`.
///
/// Velocities are `a * J Q_i` in the rotation plane, where `J` is the
/// quarter-turn matrix, so `q_i' . q_i' = a^2 r^2`.
pub fn initial_state_from_equilibrium(
    cfg: &PolarConfiguration,
    angular_velocity: f64,
    space: &SpaceSpec,
) -> Result<AmbientState> {
    let positions = geometry::embed_polar(cfg, space)?;
    let velocities = positions
        .iter()
        .map(|q| {
            let mut v = vec![0.0; q.len()];
            v[0] = -angular_velocity * q[1];
            v[1] = angular_velocity * q[0];
            v
        })
        .collect();
    Ok(AmbientState { positions, velocities, time: 0.0 })
}

/// Exact state of the rigid rotation at time `t`.
pub fn rotated_state(initial: &AmbientState, angular_velocity: f64, t: f64) -> AmbientState {
    let angle = angular_velocity * t;
    AmbientState {
        positions: initial.positions.iter().map(|q| geometry::rotate_plane(angle, q)).collect(),
        velocities: initial.velocities.iter().map(|v| geometry::rotate_plane(angle, v)).collect(),
        time: initial.time + t,
    }
}

fn axpy(base: &[Vec<f64>], h: f64, dir: &[Vec<f64>]) -> Vec<Vec<f64>> {
    base.iter().zip(dir).map(|(b, d)| b.iter().zip(d).map(|(b, d)| b + h * d).collect()).collect()
}

fn rk4(
    state: &AmbientState,
    masses: &[f64],
    space: &SpaceSpec,
    h: f64,
    project: bool,
) -> Result<AmbientState> {
    let sigma = space.sigma();
    let (q0, v0) = (&state.positions, &state.velocities);

    let k1q = v0.clone();
    let k1v = accel_raw(q0, v0, masses, sigma)?;

    let q = axpy(q0, 0.5 * h, &k1q);
    let v = axpy(v0, 0.5 * h, &k1v);
    let k2v = accel_raw(&q, &v, masses, sigma)?;
    let k2q = v;

    let q = axpy(q0, 0.5 * h, &k2q);
    let v = axpy(v0, 0.5 * h, &k2v);
    let k3v = accel_raw(&q, &v, masses, sigma)?;
    let k3q = v;

    let q = axpy(q0, h, &k3q);
    let v = axpy(v0, h, &k3v);
    let k4v = accel_raw(&q, &v, masses, sigma)?;
    let k4q = v;

    let combine = |x0: &[Vec<f64>], k1: &[Vec<f64>], k2: &[Vec<f64>], k3: &[Vec<f64>], k4: &[Vec<f64>]| {
        (0..x0.len())
            .map(|b| {
                (0..x0[b].len())
                    .map(|m| x0[b][m] + h / 6.0 * (k1[b][m] + 2.0 * k2[b][m] + 2.0 * k3[b][m] + k4[b][m]))
                    .collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>()
    };
    let mut positions = combine(q0, &k1q, &k2q, &k3q, &k4q);
    let mut velocities = combine(v0, &k1v, &k2v, &k3v, &k4v);
    let time = state.time + h;

    let finite = positions.iter().chain(&velocities).all(|x| x.iter().all(|c| c.is_finite()));
    if !finite {
        return Err(Error::NumericalFailure { time });
    }

    if project {
        for (q, v) in positions.iter_mut().zip(velocities.iter_mut()) {
            normalize_to_manifold(q, space).map_err(|_| Error::NumericalFailure { time })?;
            *v = tangent_project(q, v, space);
        }
    }
    Ok(AmbientState { positions, velocities, time })
}

/// Advances `state` by one RK4 step of `cfg.step_size`.
pub fn step(
    state: &AmbientState,
    masses: &MassVector,
    space: &SpaceSpec,
    cfg: &IntegrationConfig,
) -> Result<AmbientState> {
    check_sizes(state, masses)?;
    rk4(state, masses.as_slice(), space, cfg.step_size, cfg.projection_enabled)
}

/// Integrates from `state0` to `state0.time + cfg.t_end`.
///
/// Emits the initial state, every `output_stride`-th state and the final
/// state. The last step is shortened so the run ends exactly at `t_end`.
pub fn simulate(
    state0: &AmbientState,
    masses: &MassVector,
    space: &SpaceSpec,
    cfg: &IntegrationConfig,
) -> Result<Vec<AmbientState>> {
    cfg.validate()?;
    check_sizes(state0, masses)?;
    state0.validate(space)?;

    let n_steps = (cfg.t_end / cfg.step_size - 1e-9).ceil().max(1.0) as usize;
    let t0 = state0.time;
    let mut series = vec![state0.clone()];
    let mut state = state0.clone();
    for s in 1..=n_steps {
        let h = if s == n_steps { cfg.t_end - (n_steps - 1) as f64 * cfg.step_size } else { cfg.step_size };
        state = rk4(&state, masses.as_slice(), space, h, cfg.projection_enabled)?;
        if s == n_steps {
            state.time = t0 + cfg.t_end;
        }
        if s % cfg.output_stride == 0 || s == n_steps {
            series.push(state.clone());
        }
    }
    Ok(series)
}

/// Largest change of any pairwise distance relative to `reference`.
pub fn rigidity_drift(series: &[AmbientState], reference: &AmbientState) -> f64 {
    let d0 = pairwise_euclidean_distance(&reference.positions);
    series
        .iter()
        .map(|s| {
            let d = pairwise_euclidean_distance(&s.positions);
            d.iter()
                .zip(&d0)
                .flat_map(|(row, row0)| row.iter().zip(row0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Largest coordinate difference between the positions of two states.
pub fn position_error(a: &AmbientState, b: &AmbientState) -> f64 {
    a.positions
        .iter()
        .zip(&b.positions)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
