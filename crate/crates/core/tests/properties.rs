//! Randomised invariants across geometry, dynamics and the equilibrium criterion.

use std::f64::consts::TAU;

use curved_nbody::dynamics::{self, AmbientState, IntegrationConfig};
use curved_nbody::equilibria::{
    angular_velocity_squared, angular_velocity_squared_closed_form, criterion_residual, MassVector,
};
use curved_nbody::geometry::{
    embed_polar, pairwise_euclidean_distance, rotate_plane, sigma_inner, tangent_project,
};
use curved_nbody::{Curvature, PolarConfiguration, SpaceSpec};
use proptest::prelude::*;

fn space_of(positive: bool, k: usize) -> SpaceSpec {
    let curvature = if positive { Curvature::Positive } else { Curvature::Negative };
    SpaceSpec::new(curvature, k).unwrap()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A point of the manifold built from its first `k` coordinates.
fn lift(head: &[f64], space: &SpaceSpec) -> Vec<f64> {
    let h2: f64 = head.iter().map(|x| x * x).sum();
    let last = if space.sigma() > 0.0 { (1.0 - h2).max(0.0).sqrt() } else { (1.0 + h2).sqrt() };
    let mut q = head.to_vec();
    q.push(last);
    q
}

/// Random manifold point: for the sphere the head is scaled into the unit ball.
fn point(space: SpaceSpec) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, space.k()).prop_map(move |mut head| {
        if space.sigma() > 0.0 {
            let n = norm(&head).max(1.0) * 1.01;
            head.iter_mut().for_each(|x| *x /= n);
        }
        lift(&head, &space)
    })
}

/// Angles with every pair at least `gap` apart on the circle.
fn separated(n: usize, gap: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..TAU, n).prop_filter("bodies too close", move |a| {
        a.iter().enumerate().all(|(i, x)| {
            a[i + 1..].iter().all(|y| {
                let d = (x - y).rem_euclid(TAU);
                d.min(TAU - d) >= gap
            })
        })
    })
}

fn radius(positive: bool) -> impl Strategy<Value = f64> {
    if positive {
        (0.2..0.9f64).boxed()
    } else {
        (0.2..2.5f64).boxed()
    }
}

fn polar_case(n: usize) -> impl Strategy<Value = (SpaceSpec, PolarConfiguration, MassVector)> {
    polar_case_with(n, 0.3)
}

fn polar_case_with(n: usize, gap: f64) -> impl Strategy<Value = (SpaceSpec, PolarConfiguration, MassVector)> {
    any::<bool>().prop_flat_map(move |positive| {
        (radius(positive), separated(n, gap), prop::collection::vec(0.5..2.0f64, n)).prop_map(
            move |(r, alphas, masses)| {
                let space = space_of(positive, 2);
                let cfg = PolarConfiguration::canonical(r, alphas, &space).unwrap();
                (space, cfg, MassVector::new(masses).unwrap())
            },
        )
    })
}

/// Well-separated polar configuration with small random tangent velocities.
fn moving_state(n: usize) -> impl Strategy<Value = (SpaceSpec, AmbientState, MassVector)> {
    (polar_case_with(n, 1.0), prop::collection::vec(prop::collection::vec(-0.3..0.3f64, 3), n)).prop_map(
        |((space, cfg, masses), raw)| {
            let positions = embed_polar(&cfg, &space).unwrap();
            let velocities = positions.iter().zip(&raw).map(|(q, v)| tangent_project(q, v, &space)).collect();
            (space, AmbientState { positions, velocities, time: 0.0 }, masses)
        },
    )
}

fn point_and_vector() -> impl Strategy<Value = (SpaceSpec, Vec<f64>, Vec<f64>)> {
    (any::<bool>(), 2usize..5).prop_flat_map(|(positive, k)| {
        let space = space_of(positive, k);
        (Just(space), point(space), prop::collection::vec(-3.0..3.0f64, k + 1))
    })
}

/// Integrates, discarding runs that come near a collision, where the
/// fixed step cannot resolve the motion.
fn run_clear(
    state: &AmbientState,
    masses: &MassVector,
    space: &SpaceSpec,
    cfg: &IntegrationConfig,
) -> Option<Vec<AmbientState>> {
    let series = dynamics::simulate(state, masses, space, cfg).ok()?;
    let closest = series
        .iter()
        .filter_map(|s| curved_nbody::geometry::min_pairwise_distance(&s.positions))
        .fold(f64::INFINITY, |m, (_, _, d)| m.min(d));
    (closest > 0.2).then_some(series)
}

fn max_gap(a: &AmbientState, b: &AmbientState) -> f64 {
    dynamics::position_error(a, b)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, max_global_rejects: 8192, ..ProptestConfig::default() })]

    #[test]
    fn projected_vectors_are_tangent((space, q, v) in point_and_vector()) {
        let t = tangent_project(&q, &v, &space);
        let scale = norm(&v) * norm(&q).powi(2);
        prop_assert!(sigma_inner(&q, &t, &space).unwrap().abs() <= 1e-13 * scale.max(1e-300));
    }

    #[test]
    fn embedded_points_lie_on_the_manifold((space, cfg, _m) in polar_case(4)) {
        for q in embed_polar(&cfg, &space).unwrap() {
            prop_assert!((sigma_inner(&q, &q, &space).unwrap() - space.sigma()).abs() <= 1e-12);
        }
    }

    #[test]
    fn rotation_preserves_the_form((space, cfg, _m) in polar_case(3), c in -10.0..10.0f64) {
        let q = embed_polar(&cfg, &space).unwrap();
        let before = sigma_inner(&q[0], &q[1], &space).unwrap();
        let after = sigma_inner(&rotate_plane(c, &q[0]), &rotate_plane(c, &q[1]), &space).unwrap();
        prop_assert!((before - after).abs() <= 1e-13 * before.abs().max(1.0));
    }

    #[test]
    fn chord_lengths_follow_the_angle_gap((space, cfg, _m) in polar_case(4)) {
        let d = pairwise_euclidean_distance(&embed_polar(&cfg, &space).unwrap());
        for (i, row) in d.iter().enumerate() {
            prop_assert_eq!(row[i], 0.0);
            for (j, dij) in row.iter().enumerate() {
                prop_assert_eq!(*dij, d[j][i]);
                let expected = 2.0 * cfg.r * cfg.r * (1.0 - (cfg.alphas[i] - cfg.alphas[j]).cos());
                prop_assert!((dij * dij - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn hyperbolic_blocks_are_never_zero(r in 1e-3..50.0f64, k in 2usize..5) {
        let space = space_of(false, k);
        let cfg = PolarConfiguration::canonical(r, vec![0.0], &space).unwrap();
        prop_assert!(*cfg.z_block.last().unwrap() > 0.0);
        prop_assert!(!cfg.z_is_zero());
    }

    #[test]
    fn gravity_is_tangent((space, state, masses) in moving_state(4)) {
        let acc = dynamics::gravitational_acceleration(&state, &masses, &space).unwrap();
        for (q, a) in state.positions.iter().zip(&acc) {
            let along = sigma_inner(q, a, &space).unwrap();
            prop_assert!(along.abs() <= 1e-12 * norm(a) * norm(q));
        }
    }

    #[test]
    fn projection_keeps_samples_on_the_manifold((space, state, masses) in moving_state(3), steps in 2usize..400) {
        let cfg = IntegrationConfig { step_size: 1e-2, t_end: 1e-2 * steps as f64, projection_enabled: true, output_stride: 7 };
        let series = dynamics::simulate(&state, &masses, &space, &cfg);
        prop_assume!(!matches!(
            series,
            Err(curved_nbody::Error::Singularity { .. } | curved_nbody::Error::NumericalFailure { .. })
        ));
        let series = series.unwrap();
        // After renormalisation the residual is rounding in a sum of squares,
        // so it is measured against the squared coordinate size.
        for q in series.iter().flat_map(|s| &s.positions) {
            let drift = (sigma_inner(q, q, &space).unwrap() - space.sigma()).abs();
            prop_assert!(drift <= 1e-12 * norm(q).powi(2).max(1.0));
        }
    }

    #[test]
    fn integration_is_time_reversible((space, state, masses) in moving_state(3)) {
        let cfg = IntegrationConfig { step_size: 1e-3, t_end: 1.0, projection_enabled: true, output_stride: 5 };
        let forward = run_clear(&state, &masses, &space, &cfg);
        prop_assume!(forward.is_some());
        let forward = forward.unwrap();
        let mut back = forward.last().unwrap().clone();
        back.velocities.iter_mut().flatten().for_each(|v| *v = -*v);
        let returned = run_clear(&back, &masses, &space, &cfg);
        prop_assume!(returned.is_some());
        let returned = returned.unwrap();
        prop_assert!(max_gap(returned.last().unwrap(), &state) <= 1e-6);
    }

    #[test]
    fn integration_commutes_with_rotation((space, state, masses) in moving_state(3), c in -3.0..3.0f64) {
        let cfg = IntegrationConfig { step_size: 1e-2, t_end: 0.5, projection_enabled: true, output_stride: 1 };
        let rotate = |s: &AmbientState| AmbientState {
            positions: s.positions.iter().map(|q| rotate_plane(c, q)).collect(),
            velocities: s.velocities.iter().map(|v| rotate_plane(c, v)).collect(),
            time: s.time,
        };
        let plain = run_clear(&state, &masses, &space, &cfg);
        prop_assume!(plain.is_some());
        let a = rotate(plain.unwrap().last().unwrap());
        let b = dynamics::simulate(&rotate(&state), &masses, &space, &cfg).unwrap();
        prop_assert!(max_gap(&a, b.last().unwrap()) <= 1e-10);
    }

    #[test]
    fn residual_is_gauge_invariant_and_balanced((space, cfg, masses) in polar_case(5), c in -TAU..TAU) {
        let f = criterion_residual(&masses, &cfg, &space).unwrap();
        let shifted = PolarConfiguration { alphas: cfg.alphas.iter().map(|a| a + c).collect(), ..cfg.clone() };
        let g = criterion_residual(&masses, &shifted, &space).unwrap();
        let scale: f64 = masses.as_slice().iter().zip(&f).map(|(m, x)| (m * x).abs()).sum::<f64>().max(1.0);
        for (a, b) in f.iter().zip(&g) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
        let weighted: f64 = masses.as_slice().iter().zip(&f).map(|(m, x)| m * x).sum();
        prop_assert!(weighted.abs() <= 1e-12 * scale);
    }

    #[test]
    fn radial_balance_forms_agree((space, cfg, masses) in polar_case(4)) {
        for i in 0..4 {
            let ambient = angular_velocity_squared(&masses, &cfg, &space, i).unwrap();
            let closed = angular_velocity_squared_closed_form(&masses, &cfg, &space, i).unwrap();
            prop_assert!((ambient - closed).abs() <= 1e-12 * closed.abs());
        }
    }
}
