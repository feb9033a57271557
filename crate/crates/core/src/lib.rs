//! Relative equilibria of the gravitational n-body problem on the unit sphere
//! and the hyperbolic plane (and their higher-dimensional analogues).
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: the model spaces, their bilinear form and polar embeddings;
//! - [`dynamics`]: equations of motion and a projected RK4 integrator;
//! - [`equilibria`]: the tangential criterion, the angular-velocity balance,
//!   a damped Newton solver and canonical forms;
//! - [`experiments`]: sweeps, minimum-distance and boundedness probes, and
//!   JSONL catalogs;
//! - [`config`] and [`cli`]: the JSON run configuration and the commands
//!   behind the `curved-nbody` binary.

// `!(x > tol)` is used deliberately throughout so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod newton;

pub use dynamics::{AmbientState, IntegrationConfig};
pub use equilibria::{EquilibriumRecord, MassVector, SolveOutcome, SolverOptions};
pub use error::{Error, Result};
pub use geometry::{Curvature, PolarConfiguration, SpaceSpec};
