//! The model spaces `M = { x in R^(k+1) : x_1^2 + ... + x_k^2 + sigma x_(k+1)^2 = sigma }`.
//!
//! For `sigma = +1` this is the unit sphere `S^k`; for `sigma = -1` it is the
//! upper sheet of the hyperboloid model of `H^k`. Points are stored as plain
//! coordinate vectors in the ambient `R^(k+1)`.

use crate::error::{Error, Result};

/// Tolerance on `|x . x - sigma|` when validating a point or configuration.
pub const TOL_MANIFOLD: f64 = 1e-9;

/// A trailing block whose norm is at or below this is treated as zero.
pub const TOL_ZERO_BLOCK: f64 = 1e-12;

/// Coordinates of a point in the ambient space `R^(k+1)`.
pub type AmbientPoint = Vec<f64>;

/// Sign of the Gaussian curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Curvature {
    Positive,
    Negative,
}

impl Curvature {
    pub fn from_sign(sign: i64) -> Result<Self> {
        match sign {
            1 => Ok(Curvature::Positive),
            -1 => Ok(Curvature::Negative),
            other => Err(Error::InvalidInput(format!("curvature sign must be +1 or -1, got {other}"))),
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Curvature::Positive => 1,
            Curvature::Negative => -1,
        }
    }

    pub fn value(self) -> f64 {
        self.sign() as f64
    }
}

/// Curvature sign and manifold dimension `k` (ambient dimension `k + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceSpec {
    curvature: Curvature,
    k: usize,
}

impl SpaceSpec {
    pub fn new(curvature: Curvature, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidInput(format!("manifold dimension must be at least 2, got {k}")));
        }
        Ok(SpaceSpec { curvature, k })
    }

    /// Unit sphere `S^k`.
    pub fn sphere(k: usize) -> Result<Self> {
        Self::new(Curvature::Positive, k)
    }

    /// Hyperboloid model of `H^k`.
    pub fn hyperbolic(k: usize) -> Result<Self> {
        Self::new(Curvature::Negative, k)
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    /// `sigma` as a float, `+1.0` or `-1.0`.
    pub fn sigma(&self) -> f64 {
        self.curvature.value()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ambient_dim(&self) -> usize {
        self.k + 1
    }

    fn check_dim(&self, what: &str, len: usize) -> Result<()> {
        if len != self.ambient_dim() {
            return Err(Error::InvalidInput(format!(
                "{what} has {len} coordinates, expected {}",
                self.ambient_dim()
            )));
        }
        Ok(())
    }
}

/// Shape coordinates of a rotating configuration: every body sits at
/// `(r cos a_i, r sin a_i, Z)` for a common radius `r` and a common block `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarConfiguration {
    pub r: f64,
    pub alphas: Vec<f64>,
    pub z_block: Vec<f64>,
}

impl PolarConfiguration {
    /// Builds a configuration with the canonical trailing block for `r`.
    pub fn canonical(r: f64, alphas: Vec<f64>, space: &SpaceSpec) -> Result<Self> {
        let z_block = solve_z_block(r, space)?;
        Ok(PolarConfiguration { r, alphas, z_block })
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// `Z . Z` with the curvature weight on the final entry.
    pub fn z_inner(&self, space: &SpaceSpec) -> f64 {
        weighted_block_inner(&self.z_block, space.sigma())
    }

    /// True when the shared block is (numerically) zero, i.e. the bodies
    /// lie on a great circle of the sphere.
    pub fn z_is_zero(&self) -> bool {
        self.z_block.iter().map(|z| z * z).sum::<f64>().sqrt() <= TOL_ZERO_BLOCK
    }

    pub fn validate(&self, space: &SpaceSpec) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::InvalidConfiguration(format!(
                "radius must be positive and finite, got {}",
                self.r
            )));
        }
        if space.curvature() == Curvature::Positive && self.r > 1.0 {
            return Err(Error::InfeasibleRadius { r: self.r });
        }
        if self.alphas.is_empty() {
            return Err(Error::InvalidConfiguration("no bodies".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidConfiguration(format!("non-finite angle {a}")));
        }
        if self.z_block.len() != space.k() - 1 {
            return Err(Error::InvalidConfiguration(format!(
                "trailing block has {} entries, expected {}",
                self.z_block.len(),
                space.k() - 1
            )));
        }
        let closure = self.r * self.r + self.z_inner(space) - space.sigma();
        if closure.abs() > TOL_MANIFOLD {
            return Err(Error::InvalidConfiguration(format!("r^2 + Z.Z differs from sigma by {closure:e}")));
        }
        if space.curvature() == Curvature::Negative && self.z_block[self.z_block.len() - 1] <= 0.0 {
            return Err(Error::InvalidConfiguration(
                "hyperbolic configurations must lie on the upper sheet".into(),
            ));
        }
        Ok(())
    }
}

fn weighted_block_inner(block: &[f64], sigma: f64) -> f64 {
    match block.split_last() {
        Some((last, rest)) => rest.iter().map(|z| z * z).sum::<f64>() + sigma * last * last,
        None => 0.0,
    }
}

/// The bilinear form `x_1 y_1 + ... + x_k y_k + sigma x_(k+1) y_(k+1)`.
pub fn sigma_inner(x: &[f64], y: &[f64], space: &SpaceSpec) -> Result<f64> {
    space.check_dim("first argument", x.len())?;
    space.check_dim("second argument", y.len())?;
    Ok(inner(space.sigma(), x, y))
}

/// Unchecked form of [`sigma_inner`]; both slices must have the same length.
#[inline]
pub(crate) fn inner(sigma: f64, x: &[f64], y: &[f64]) -> f64 {
    let last = x.len() - 1;
    let head: f64 = x[..last].iter().zip(&y[..last]).map(|(a, b)| a * b).sum();
    head + sigma * x[last] * y[last]
}

/// The trailing block `(0, ..., 0, z)` with `z >= 0` closing the constraint
/// `r^2 + Z.Z = sigma`.
pub fn solve_z_block(r: f64, space: &SpaceSpec) -> Result<Vec<f64>> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidInput(format!("radius must be positive and finite, got {r}")));
    }
    let z_sq = match space.curvature() {
        Curvature::Positive => {
            if r > 1.0 {
                return Err(Error::InfeasibleRadius { r });
            }
            (1.0 - r) * (1.0 + r)
        }
        Curvature::Negative => 1.0 + r * r,
    };
    let mut block = vec![0.0; space.k() - 1];
    let last = block.len() - 1;
    block[last] = z_sq.sqrt();
    Ok(block)
}

/// Positions `q_i(0) = (r cos a_i, r sin a_i, Z)` of a polar configuration.
pub fn embed_polar(cfg: &PolarConfiguration, space: &SpaceSpec) -> Result<Vec<AmbientPoint>> {
    cfg.validate(space)?;
    Ok(cfg
        .alphas
        .iter()
        .map(|&a| {
            let mut q = Vec::with_capacity(space.ambient_dim());
            q.push(cfg.r * a.cos());
            q.push(cfg.r * a.sin());
            q.extend_from_slice(&cfg.z_block);
            q
        })
        .collect())
}

/// Rotates the first two coordinates by `angle`, leaving the rest alone.
pub fn rotate_plane(angle: f64, point: &[f64]) -> AmbientPoint {
    let (s, c) = angle.sin_cos();
    let mut out = point.to_vec();
    out[0] = c * point[0] - s * point[1];
    out[1] = s * point[0] + c * point[1];
    out
}

/// Ambient Euclidean distances `|q_i - q_j|` over all `k + 1` coordinates.
pub fn pairwise_euclidean_distance(points: &[AmbientPoint]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = euclidean_distance(&points[i], &points[j]);
            d[i][j] = dist;
            d[j][i] = dist;
        }
    }
    d
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Smallest off-diagonal entry of [`pairwise_euclidean_distance`], with the pair.
pub fn min_pairwise_distance(points: &[AmbientPoint]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = euclidean_distance(&points[i], &points[j]);
            if best.is_none_or(|(_, _, b)| d < b) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

/// Removes the normal component: `v - sigma (q . v) q`.
pub fn tangent_project(point: &[f64], vector: &[f64], space: &SpaceSpec) -> Vec<f64> {
    let sigma = space.sigma();
    let c = sigma * inner(sigma, point, vector);
    vector.iter().zip(point).map(|(v, q)| v - c * q).collect()
}

/// Rescales `point` so that `point . point = sigma` exactly (up to rounding).
pub fn normalize_to_manifold(point: &mut [f64], space: &SpaceSpec) -> Result<()> {
    let sigma = space.sigma();
    let scale = sigma * inner(sigma, point, point);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "point cannot be rescaled onto the manifold (sigma * q.q = {scale})"
        )));
    }
    if space.curvature() == Curvature::Negative && point[point.len() - 1] <= 0.0 {
        return Err(Error::InvalidConfiguration("point left the upper sheet of the hyperboloid".into()));
    }
    let inv = scale.sqrt().recip();
    point.iter_mut().for_each(|x| *x *= inv);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn s2() -> SpaceSpec {
        SpaceSpec::sphere(2).unwrap()
    }

    fn h2() -> SpaceSpec {
        SpaceSpec::hyperbolic(2).unwrap()
    }

    #[test]
    fn space_rejects_low_dimension() {
        assert!(SpaceSpec::sphere(1).is_err());
        assert!(Curvature::from_sign(0).is_err());
        assert_eq!(Curvature::from_sign(-1).unwrap(), Curvature::Negative);
    }

    #[test]
    fn sigma_inner_basic_values() {
        assert_eq!(sigma_inner(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &s2()).unwrap(), 0.0);
        assert_eq!(sigma_inner(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &s2()).unwrap(), 1.0);
        assert_eq!(sigma_inner(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &h2()).unwrap(), -1.0);
    }

    #[test]
    fn sigma_inner_dimension_mismatch() {
        let err = sigma_inner(&[1.0, 0.0], &[0.0, 1.0, 0.0], &s2()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn embed_sphere_and_hyperboloid() {
        let cfg = PolarConfiguration { r: 0.6, alphas: vec![0.0], z_block: vec![0.8] };
        let q = embed_polar(&cfg, &s2()).unwrap();
        assert_eq!(q[0], vec![0.6, 0.0, 0.8]);

        let cfg = PolarConfiguration { r: 0.6, alphas: vec![0.0], z_block: vec![1.36f64.sqrt()] };
        let q = embed_polar(&cfg, &h2()).unwrap();
        assert_eq!(q[0], vec![0.6, 0.0, 1.36f64.sqrt()]);
        assert!((sigma_inner(&q[0], &q[0], &h2()).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn embed_great_circle_antipodal_pair() {
        let s3 = SpaceSpec::sphere(3).unwrap();
        let cfg = PolarConfiguration { r: 1.0, alphas: vec![0.0, PI], z_block: vec![0.0, 0.0] };
        let q = embed_polar(&cfg, &s3).unwrap();
        assert_eq!(q[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(q[1][0], -1.0);
        assert!(q[1][1].abs() < 1e-15);
        assert_eq!(&q[1][2..], &[0.0, 0.0]);
    }

    #[test]
    fn embed_rejects_bad_configurations() {
        let cfg = PolarConfiguration { r: 1.2, alphas: vec![0.0], z_block: vec![0.0] };
        assert!(matches!(embed_polar(&cfg, &s2()), Err(Error::InfeasibleRadius { .. })));

        let cfg = PolarConfiguration { r: 0.6, alphas: vec![0.0], z_block: vec![0.7] };
        assert!(matches!(embed_polar(&cfg, &s2()), Err(Error::InvalidConfiguration(_))));

        let cfg = PolarConfiguration { r: 0.6, alphas: vec![0.0], z_block: vec![-(1.36f64.sqrt())] };
        assert!(matches!(embed_polar(&cfg, &h2()), Err(Error::InvalidConfiguration(_))));
    }

    #[test]
    fn z_block_canonical_branches() {
        assert_eq!(solve_z_block(1.0, &s2()).unwrap(), vec![0.0]);
        assert!((solve_z_block(0.6, &h2()).unwrap()[0] - 1.36f64.sqrt()).abs() < 1e-15);
        let s3 = SpaceSpec::sphere(3).unwrap();
        assert_eq!(solve_z_block(0.5, &s3).unwrap(), vec![0.0, 0.75f64.sqrt()]);
        assert!(matches!(solve_z_block(1.2, &s2()), Err(Error::InfeasibleRadius { .. })));
        for r in [0.01, 0.5, 3.0, 40.0] {
            assert!(solve_z_block(r, &h2()).unwrap()[0] > 0.0);
        }
    }

    #[test]
    fn rotation_examples() {
        let p = vec![0.3, -0.2, 0.5];
        assert_eq!(rotate_plane(0.0, &p), p);
        let q = rotate_plane(PI / 2.0, &[1.0, 0.0, 0.0]);
        assert!(q[0].abs() < 1e-16 && (q[1] - 1.0).abs() < 1e-16 && q[2] == 0.0);
        let q = rotate_plane(2.0 * PI, &p);
        for (a, b) in q.iter().zip(&p) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn distance_examples() {
        let space = s2();
        let cfg = PolarConfiguration::canonical(0.5, vec![0.0, PI], &space).unwrap();
        let d = pairwise_euclidean_distance(&embed_polar(&cfg, &space).unwrap());
        assert!((d[0][1] - 1.0).abs() < 1e-15);
        assert_eq!(d[0][0], 0.0);

        let p = vec![0.1, 0.2, 0.3];
        assert_eq!(pairwise_euclidean_distance(&[p.clone(), p])[0][1], 0.0);

        // Quarter turn at r = 0.5: subtract the coordinates directly.
        let cfg = PolarConfiguration::canonical(0.5, vec![0.0, PI / 2.0], &space).unwrap();
        let q = embed_polar(&cfg, &space).unwrap();
        let direct = ((q[0][0] - q[1][0]).powi(2) + (q[0][1] - q[1][1]).powi(2)).sqrt();
        let d = pairwise_euclidean_distance(&q);
        assert!((d[0][1] - direct).abs() < 1e-15);
        assert!((d[0][1] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tangent_projection_examples() {
        let space = s2();
        let q = vec![0.0, 0.0, 1.0];
        let v = vec![0.3, -0.7, 0.0];
        assert_eq!(tangent_project(&q, &v, &space), v);
        let zero = tangent_project(&q, &q, &space);
        assert!(zero.iter().all(|x| x.abs() < 1e-16));

        let h = h2();
        let q = vec![0.6, 0.0, 1.36f64.sqrt()];
        let t = tangent_project(&q, &[0.1, 0.2, 0.3], &h);
        assert!(inner(-1.0, &q, &t).abs() < 1e-15);
    }

    #[test]
    fn normalize_restores_constraint() {
        let h = h2();
        let mut q = vec![0.6 * 1.01, 0.0, 1.36f64.sqrt() * 0.99];
        normalize_to_manifold(&mut q, &h).unwrap();
        assert!((inner(-1.0, &q, &q) + 1.0).abs() < 1e-15);

        let mut lower = vec![0.0, 0.0, -1.0];
        assert!(normalize_to_manifold(&mut lower, &h).is_err());
    }
}
