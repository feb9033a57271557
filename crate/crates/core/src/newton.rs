//! Damped Newton iteration with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the infinity norm of the residual.
    pub tolerance: f64,
    /// Step halvings tried per iteration before giving up.
    pub max_halvings: usize,
    /// Relative finite-difference step; the absolute step is `fd_step * max(1, |x|)`.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iterations: 200, tolerance: 1e-12, max_halvings: 30, fd_step: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Why the iteration stopped, when it did not converge.
    pub failure: Option<String>,
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn jacobian<F>(f: &F, x: &[f64], fx: &[f64], rel_step: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let (rows, cols) = (fx.len(), x.len());
    let mut jac = DMatrix::zeros(rows, cols);
    let mut probe = x.to_vec();
    for c in 0..cols {
        let h = rel_step * x[c].abs().max(1.0);
        probe[c] = x[c] + h;
        let plus = f(&probe).ok();
        probe[c] = x[c] - h;
        let minus = f(&probe).ok();
        probe[c] = x[c];
        let column: Vec<f64> = match (plus, minus) {
            (Some(p), Some(m)) => p.iter().zip(&m).map(|(p, m)| (p - m) / (2.0 * h)).collect(),
            (Some(p), None) => p.iter().zip(fx).map(|(p, f0)| (p - f0) / h).collect(),
            (None, Some(m)) => fx.iter().zip(&m).map(|(f0, m)| (f0 - m) / h).collect(),
            (None, None) => vec![0.0; rows],
        };
        for (r, v) in column.into_iter().enumerate() {
            jac[(r, c)] = v;
        }
    }
    jac
}

/// Solves `f(x) = 0` from `x0`.
///
/// Each iteration takes the Newton direction from a least-squares solve of
/// the finite-difference Jacobian and halves the step until the Euclidean
/// norm of the residual decreases. Points where `f` errors are treated as
/// rejected steps.
pub fn damped_newton<F>(f: F, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    for iteration in 0..opts.max_iterations {
        if inf_norm(&fx) <= opts.tolerance {
            return Ok(NewtonReport {
                x,
                residual: fx,
                iterations: iteration,
                converged: true,
                failure: None,
            });
        }
        let jac = jacobian(&f, &x, &fx, opts.fd_step);
        let rhs = DVector::from_iterator(fx.len(), fx.iter().map(|v| -v));
        let direction = match jac.svd(true, true).solve(&rhs, 1e-14) {
            Ok(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => {
                return Ok(NewtonReport {
                    x,
                    residual: fx,
                    iterations: iteration,
                    converged: false,
                    failure: Some("linear solve failed".into()),
                })
            }
        };

        let current = two_norm(&fx);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(direction.iter()).map(|(x, d)| x + lambda * d).collect();
            if let Ok(ft) = f(&trial) {
                if ft.iter().all(|v| v.is_finite()) && two_norm(&ft) < current {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xn, fxn)) => {
                x = xn;
                fx = fxn;
            }
            None => {
                let converged = inf_norm(&fx) <= opts.tolerance;
                return Ok(NewtonReport {
                    x,
                    residual: fx,
                    iterations: iteration + 1,
                    converged,
                    failure: (!converged).then(|| "damping underflow".to_string()),
                });
            }
        }
    }
    let converged = inf_norm(&fx) <= opts.tolerance;
    Ok(NewtonReport {
        x,
        residual: fx,
        iterations: opts.max_iterations,
        converged,
        failure: (!converged).then(|| "iteration limit reached".to_string()),
    })
}
