//! JSON run configuration.
//!
//! Parsing is strict: unknown keys are rejected, and every problem found in
//! the file is reported together rather than stopping at the first one.
//!
//! ```json
//! {
//!   "sigma": 1, "k": 2,
//!   "masses": [1, 1, 1],
//!   "r": 0.5,
//!   "alphas": [0, 2.0, 4.2],
//!   "angular_velocity": "balance",
//!   "integration": { "step_size": 1e-3, "t_end": 10, "projection": true, "output_stride": 100 },
//!   "solver": { "max_iterations": 200, "tolerance": 1e-12 },
//!   "sweep": { "r_grid": [0.3, 0.5, 0.7], "starts": 20, "seed": 7 },
//!   "probe": { "kind": "min-distance" }
//! }
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::dynamics::IntegrationConfig;
use crate::equilibria::{CertifyOptions, MassVector, SolverOptions};
use crate::error::{Error, Result};
use crate::experiments::sweep::{SweepSpec, DEFAULT_MIN_SEPARATION};
use crate::geometry::{Curvature, PolarConfiguration, SpaceSpec};
use crate::newton::NewtonOptions;

pub const DEFAULT_STEP_SIZE: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_STARTS: usize = 20;
pub const DEFAULT_GRID_POINTS: usize = 100;

/// How the initial angular velocity of a simulation is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularVelocity {
    Fixed(f64),
    /// Root of the mean radial-balance `A^2` of the configuration.
    Balance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub r_grid: Vec<f64>,
    pub starts: usize,
    pub seed: u64,
    pub min_separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeFamily {
    Polygon,
    Solver,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeSettings {
    MinDistance,
    Boundedness { angular_velocity: f64, family: ProbeFamily, r_search: (f64, f64), grid_points: usize },
    ClusterBlowup { deltas: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub space: SpaceSpec,
    pub masses: MassVector,
    pub r: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub z_block: Option<Vec<f64>>,
    pub angular_velocity: Option<AngularVelocity>,
    pub integration: IntegrationConfig,
    pub solver: SolverOptions,
    pub sweep: Option<SweepSettings>,
    pub probe: Option<ProbeSettings>,
}

impl RunConfig {
    /// The polar configuration given by `r`, `alphas` and optionally `z_block`.
    pub fn polar(&self) -> Result<PolarConfiguration> {
        let (Some(r), Some(alphas)) = (self.r, self.alphas.clone()) else {
            return Err(Error::Config(vec!["this command needs both `r` and `alphas`".into()]));
        };
        if alphas.len() != self.masses.len() {
            return Err(Error::Config(vec![format!(
                "`alphas` has {} entries but `masses` has {}",
                alphas.len(),
                self.masses.len()
            )]));
        }
        let cfg = match &self.z_block {
            Some(z) => PolarConfiguration { r, alphas, z_block: z.clone() },
            None => PolarConfiguration::canonical(r, alphas, &self.space)?,
        };
        cfg.validate(&self.space)?;
        Ok(cfg)
    }

    /// Sweep parameters, with `seed` overriding the file when given.
    pub fn sweep_spec(&self, seed: Option<u64>) -> Result<SweepSpec> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config(vec!["this command needs a `sweep` section".into()]))?;
        Ok(SweepSpec {
            space: self.space,
            masses: self.masses.clone(),
            r_grid: s.r_grid.clone(),
            starts: s.starts,
            min_separation: s.min_separation,
            seed: seed.unwrap_or(s.seed),
            solver: self.solver.clone(),
            certify: CertifyOptions::default(),
        })
    }
}

struct Section<'a> {
    map: &'a Map<String, Value>,
    prefix: String,
    seen: BTreeSet<&'static str>,
}

impl<'a> Section<'a> {
    fn new(map: &'a Map<String, Value>, prefix: &str) -> Self {
        Section { map, prefix: prefix.to_string(), seen: BTreeSet::new() }
    }

    fn name(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            format!("`{key}`")
        } else {
            format!("`{}.{key}`", self.prefix)
        }
    }

    fn get<T: DeserializeOwned>(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<T> {
        self.seen.insert(key);
        let v = self.map.get(key)?;
        match serde_json::from_value(v.clone()) {
            Ok(t) => Some(t),
            Err(e) => {
                errors.push(format!("{}: {e}", self.name(key)));
                None
            }
        }
    }

    fn require<T: DeserializeOwned>(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<T> {
        if !self.map.contains_key(key) {
            self.seen.insert(key);
            errors.push(format!("{} is required", self.name(key)));
            return None;
        }
        self.get(key, errors)
    }

    fn object(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<&'a Map<String, Value>> {
        self.seen.insert(key);
        match self.map.get(key)? {
            Value::Object(m) => Some(m),
            _ => {
                errors.push(format!("{} must be an object", self.name(key)));
                None
            }
        }
    }

    fn finish(self, errors: &mut Vec<String>) {
        for key in self.map.keys() {
            if !self.seen.contains(key.as_str()) {
                errors.push(format!("unknown key {}", self.name(key)));
            }
        }
    }
}

fn positive(value: Option<f64>, what: &str, errors: &mut Vec<String>) -> Option<f64> {
    match value {
        Some(v) if v.is_finite() && v > 0.0 => Some(v),
        Some(v) => {
            errors.push(format!("`{what}` must be positive, got {v}"));
            None
        }
        None => None,
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("invalid JSON: {e}")]))?;
    let Value::Object(root) = value else {
        return Err(Error::Config(vec!["configuration must be a JSON object".into()]));
    };
    let mut errors = Vec::new();
    let mut top = Section::new(&root, "");

    let sigma: Option<i64> = top.require("sigma", &mut errors);
    let k: Option<usize> = top.require("k", &mut errors);
    let masses: Option<Vec<f64>> = top.require("masses", &mut errors);
    let r = positive(top.get("r", &mut errors), "r", &mut errors);
    let alphas: Option<Vec<f64>> = top.get("alphas", &mut errors);
    let z_block: Option<Vec<f64>> = top.get("z_block", &mut errors);
    let angular_velocity = match top.get::<Value>("angular_velocity", &mut errors) {
        None => None,
        Some(Value::String(s)) if s == "balance" => Some(AngularVelocity::Balance),
        Some(Value::Number(x)) => match x.as_f64() {
            Some(a) if a.is_finite() && a >= 0.0 => Some(AngularVelocity::Fixed(a)),
            _ => {
                errors.push(format!("`angular_velocity` must be nonnegative, got {x}"));
                None
            }
        },
        Some(other) => {
            errors.push(format!("`angular_velocity` must be a number or \"balance\", got {other}"));
            None
        }
    };

    let space = match (sigma, k) {
        (Some(s), Some(k)) => match Curvature::from_sign(s).and_then(|c| SpaceSpec::new(c, k)) {
            Ok(space) => Some(space),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        },
        _ => None,
    };
    let masses = masses.and_then(|m| match MassVector::new(m) {
        Ok(m) => Some(m),
        Err(e) => {
            errors.push(e.to_string());
            None
        }
    });
    if let (Some(a), Some(m)) = (&alphas, &masses) {
        if a.len() != m.len() {
            errors.push(format!("`alphas` has {} entries but `masses` has {}", a.len(), m.len()));
        }
    }
    if let (Some(space), Some(r)) = (&space, r) {
        if space.curvature() == Curvature::Positive && r > 1.0 {
            errors.push(format!("`r` = {r} is infeasible on the sphere (r <= 1)"));
        }
    }

    let mut integration = IntegrationConfig::new(DEFAULT_STEP_SIZE, DEFAULT_T_END);
    if let Some(obj) = top.object("integration", &mut errors) {
        let mut s = Section::new(obj, "integration");
        if let Some(h) = positive(s.get("step_size", &mut errors), "integration.step_size", &mut errors) {
            integration.step_size = h;
        }
        if let Some(t) = positive(s.get("t_end", &mut errors), "integration.t_end", &mut errors) {
            integration.t_end = t;
        }
        if let Some(p) = s.get("projection", &mut errors) {
            integration.projection_enabled = p;
        }
        if let Some(stride) = s.get::<usize>("output_stride", &mut errors) {
            if stride == 0 {
                errors.push("`integration.output_stride` must be positive".into());
            }
            integration.output_stride = stride;
        }
        s.finish(&mut errors);
    }
    if integration.step_size >= integration.t_end {
        errors.push("`integration.step_size` must be smaller than `integration.t_end`".into());
    }

    let mut solver = SolverOptions::default();
    if let Some(obj) = top.object("solver", &mut errors) {
        let mut s = Section::new(obj, "solver");
        let defaults = NewtonOptions::default();
        solver.newton = NewtonOptions {
            max_iterations: s.get("max_iterations", &mut errors).unwrap_or(defaults.max_iterations),
            tolerance: positive(s.get("tolerance", &mut errors), "solver.tolerance", &mut errors)
                .unwrap_or(defaults.tolerance),
            max_halvings: s.get("max_halvings", &mut errors).unwrap_or(defaults.max_halvings),
            fd_step: positive(s.get("fd_step", &mut errors), "solver.fd_step", &mut errors)
                .unwrap_or(defaults.fd_step),
        };
        if let Some(tc) =
            positive(s.get("tol_consistency", &mut errors), "solver.tol_consistency", &mut errors)
        {
            solver.tol_consistency = tc;
        }
        let gc: Option<f64> = s.get("great_circle_angular_velocity", &mut errors);
        if let Some(a) = gc {
            if !(a.is_finite() && a >= 0.0) {
                errors.push("`solver.great_circle_angular_velocity` must be nonnegative".into());
            }
            solver.great_circle_angular_velocity = Some(a);
        }
        s.finish(&mut errors);
    }

    let mut sweep = None;
    if let Some(obj) = top.object("sweep", &mut errors) {
        let mut s = Section::new(obj, "sweep");
        let r_grid: Option<Vec<f64>> = s.require("r_grid", &mut errors);
        let starts = s.get("starts", &mut errors).unwrap_or(DEFAULT_STARTS);
        let seed = s.get("seed", &mut errors).unwrap_or(0);
        let min_separation = s.get("min_separation", &mut errors).unwrap_or(DEFAULT_MIN_SEPARATION);
        s.finish(&mut errors);
        if let Some(grid) = r_grid {
            for r in &grid {
                let bad = !(r.is_finite() && *r > 0.0)
                    || space.is_some_and(|sp| sp.curvature() == Curvature::Positive && *r > 1.0);
                if bad {
                    errors.push(format!("`sweep.r_grid` entry {r} is not a feasible radius"));
                }
            }
            if starts == 0 {
                errors.push("`sweep.starts` must be positive".into());
            }
            if !(min_separation >= 0.0) {
                errors.push("`sweep.min_separation` must be nonnegative".into());
            }
            sweep = Some(SweepSettings { r_grid: grid, starts, seed, min_separation });
        }
    }

    let mut probe = None;
    if let Some(obj) = top.object("probe", &mut errors) {
        let mut s = Section::new(obj, "probe");
        let kind: Option<String> = s.require("kind", &mut errors);
        match kind.as_deref() {
            Some("min-distance") => probe = Some(ProbeSettings::MinDistance),
            Some("boundedness") => {
                let a = positive(
                    s.require("angular_velocity", &mut errors),
                    "probe.angular_velocity",
                    &mut errors,
                );
                let family = match s.get::<String>("family", &mut errors).as_deref() {
                    None | Some("polygon") => Some(ProbeFamily::Polygon),
                    Some("solver") => Some(ProbeFamily::Solver),
                    Some(other) => {
                        errors
                            .push(format!("`probe.family` must be \"polygon\" or \"solver\", got {other:?}"));
                        None
                    }
                };
                let r_search: Option<(f64, f64)> = s.require("r_search", &mut errors);
                if let Some((lo, hi)) = r_search {
                    if !(lo > 0.0 && hi > lo) {
                        errors.push(format!("`probe.r_search` must satisfy 0 < lo < hi, got [{lo}, {hi}]"));
                    }
                }
                let grid_points = s.get("grid_points", &mut errors).unwrap_or(DEFAULT_GRID_POINTS);
                if grid_points < 2 {
                    errors.push("`probe.grid_points` must be at least 2".into());
                }
                if let (Some(angular_velocity), Some(family), Some(r_search)) = (a, family, r_search) {
                    probe =
                        Some(ProbeSettings::Boundedness { angular_velocity, family, r_search, grid_points });
                }
            }
            Some("cluster-blowup") => {
                let deltas: Option<Vec<f64>> = s.require("deltas", &mut errors);
                if let Some(d) = &deltas {
                    if d.is_empty() || d.iter().any(|x| !(*x > 0.0)) || d.windows(2).any(|w| w[1] >= w[0]) {
                        errors.push("`probe.deltas` must be positive and strictly decreasing".into());
                    }
                }
                if let Some(deltas) = deltas {
                    probe = Some(ProbeSettings::ClusterBlowup { deltas });
                }
            }
            Some(other) => errors.push(format!(
                "`probe.kind` must be \"min-distance\", \"boundedness\" or \"cluster-blowup\", got {other:?}"
            )),
            None => {}
        }
        s.finish(&mut errors);
    }

    top.finish(&mut errors);

    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    Ok(RunConfig {
        space: space.expect("validated"),
        masses: masses.expect("validated"),
        r,
        alphas,
        z_block,
        angular_velocity,
        integration,
        solver,
        sweep,
        probe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse_config_str(r#"{"sigma": 1, "k": 2, "masses": [1, 1], "r": 0.5, "alphas": [0, 3]}"#)
            .unwrap();
        assert_eq!(cfg.space, SpaceSpec::sphere(2).unwrap());
        assert_eq!(cfg.integration, IntegrationConfig::new(DEFAULT_STEP_SIZE, DEFAULT_T_END));
        assert_eq!(cfg.solver, SolverOptions::default());
        assert!(cfg.sweep.is_none() && cfg.probe.is_none());
        assert_eq!(cfg.polar().unwrap().z_block, vec![0.75f64.sqrt()]);
    }

    #[test]
    fn bad_sigma_and_mass() {
        let err = parse_config_str(r#"{"sigma": 0, "k": 2, "masses": [1, 0]}"#).unwrap_err();
        let Error::Config(list) = err else { panic!() };
        assert_eq!(list.len(), 2, "{list:?}");
        assert!(list[0].contains("curvature") || list[1].contains("curvature"));
        assert!(list.iter().any(|e| e.contains("mass 1")));
    }

    #[test]
    fn every_violation_is_listed() {
        let text = r#"{
            "sigma": 1, "masses": [1, 1], "r": 1.5, "colour": "red",
            "integration": {"step_size": -1, "wobble": 2},
            "probe": {"kind": "boundedness"}
        }"#;
        let Error::Config(list) = parse_config_str(text).unwrap_err() else { panic!() };
        let joined = list.join("\n");
        for needle in [
            "`k` is required",
            "unknown key `colour`",
            "unknown key `integration.wobble`",
            "`integration.step_size` must be positive",
            "`probe.angular_velocity` is required",
            "`probe.r_search` is required",
        ] {
            assert!(joined.contains(needle), "missing {needle:?} in\n{joined}");
        }
        assert_eq!(Error::Config(list).exit_code(), 2);
    }

    #[test]
    fn probe_and_sweep_sections() {
        let text = r#"{
            "sigma": -1, "k": 2, "masses": [1, 1],
            "angular_velocity": "balance",
            "sweep": {"r_grid": [0.5, 2.0], "starts": 3, "seed": 9},
            "probe": {"kind": "boundedness", "angular_velocity": 0.4, "r_search": [0.1, 10], "family": "polygon"}
        }"#;
        let cfg = parse_config_str(text).unwrap();
        assert_eq!(cfg.angular_velocity, Some(AngularVelocity::Balance));
        let spec = cfg.sweep_spec(Some(77)).unwrap();
        assert_eq!(spec.seed, 77);
        assert_eq!(spec.starts, 3);
        assert!(matches!(
            cfg.probe,
            Some(ProbeSettings::Boundedness {
                grid_points: DEFAULT_GRID_POINTS,
                family: ProbeFamily::Polygon,
                ..
            })
        ));
    }

    #[test]
    fn non_object_and_bad_json() {
        assert!(matches!(parse_config_str("[1, 2]"), Err(Error::Config(_))));
        assert!(matches!(parse_config_str("{"), Err(Error::Config(_))));
    }
}
