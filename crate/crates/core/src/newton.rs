//! Incremental-iterative Newton-Raphson baseline.
//!
//! Walks the load parameter over uniform increments, converging the
//! residual at each level before moving on. Serves as the reference the
//! Taylor continuation is compared against, both for path accuracy and
//! for the number of linear solves consumed.

use crate::anm::{solve_linear, ContinuationProblem, LinearSolverHandle};
use crate::densela::{self, Vector};
use crate::error::{Error, Result};
use crate::qsim::Sampler;

#[derive(Clone, Copy, Debug)]
pub struct NewtonSettings {
    /// Residual norm accepted as converged.
    pub eps_r: f64,
    pub max_iter: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings { eps_r: 1e-8, max_iter: 30 }
    }
}

/// Converges the residual at a fixed load level; returns the solution and
/// the number of iterations (each one a linear solve).
pub fn nr_solve_at(
    problem: &dyn ContinuationProblem,
    u_guess: &[f64],
    lambda: f64,
    settings: &NewtonSettings,
    solver: &LinearSolverHandle,
    sampler: &mut Sampler,
) -> Result<(Vector, usize)> {
    let mut u = u_guess.to_vec();
    let mut r = problem.residual(&u, lambda)?;
    if densela::norm(&r) < settings.eps_r {
        return Ok((u, 0));
    }
    for iter in 1..=settings.max_iter {
        let k = problem.jacobian(&u, lambda)?;
        let du = solve_linear(solver, &k, &r, sampler)?;
        densela::axpy(&mut u, -1.0, &du);
        r = problem.residual(&u, lambda)?;
        if densela::norm(&r) < settings.eps_r {
            return Ok((u, iter));
        }
    }
    Err(Error::NoConvergence {
        iterations: settings.max_iter,
        residual: densela::norm(&r),
    })
}

#[derive(Clone, Debug)]
pub struct NewtonReport {
    /// Converged `(lambda, u)` states, starting at the initial one.
    pub path: Vec<(f64, Vector)>,
    /// Newton iterations spent at each stored point.
    pub iteration_counts: Vec<usize>,
    pub increments: usize,
    /// One linear solve per Newton iteration.
    pub linear_solves: u64,
    pub circuit_executions: u64,
    pub converged: bool,
    /// Load level where the iteration gave out, when not converged.
    pub failed_at: Option<f64>,
}

impl NewtonReport {
    pub fn trace(&self, component: usize) -> Vec<(f64, f64)> {
        self.path.iter().map(|(l, u)| (*l, u[component])).collect()
    }
}

/// Uniform-increment continuation from `lambda_start` to `lambda_end`,
/// warm-starting each level from the previous solution.
pub fn nr_continue(
    problem: &dyn ContinuationProblem,
    u_start: &[f64],
    lambda_start: f64,
    lambda_end: f64,
    increments: usize,
    settings: &NewtonSettings,
    solver: &LinearSolverHandle,
    sampler: &mut Sampler,
) -> NewtonReport {
    let exec_start = sampler.executions();
    let mut path = vec![(lambda_start, u_start.to_vec())];
    let mut iteration_counts = vec![0usize];
    let mut u = u_start.to_vec();
    let mut solves = 0u64;
    for i in 1..=increments {
        let t = i as f64 / increments as f64;
        let lambda = lambda_start + t * (lambda_end - lambda_start);
        match nr_solve_at(problem, &u, lambda, settings, solver, sampler) {
            Ok((u_new, iters)) => {
                solves += iters as u64;
                u = u_new;
                path.push((lambda, u.clone()));
                iteration_counts.push(iters);
            }
            Err(_) => {
                return NewtonReport {
                    path,
                    iteration_counts,
                    increments,
                    linear_solves: solves,
                    circuit_executions: sampler.executions() - exec_start,
                    converged: false,
                    failed_at: Some(lambda),
                };
            }
        }
    }
    NewtonReport {
        path,
        iteration_counts,
        increments,
        linear_solves: solves,
        circuit_executions: sampler.executions() - exec_start,
        converged: true,
        failed_at: None,
    }
}

/// Linear interpolation of a `(lambda, value)` trace onto a lambda grid.
pub fn resample_trace(trace: &[(f64, f64)], grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if trace.len() < 2 {
        return Err(Error::InvalidConfig("trace needs at least two points".into()));
    }
    let mut out = Vec::with_capacity(grid.len());
    for &l in grid {
        let span = 1e-9 * (1.0 + l.abs());
        let lo = trace.first().unwrap().0;
        let hi = trace.last().unwrap().0;
        if l < lo.min(hi) - span || l > lo.max(hi) + span {
            return Err(Error::OutOfDomain(l));
        }
        // trace lambdas are monotone along the sampled branch
        let mut j = 1;
        while j < trace.len() - 1 && (trace[j].0 - l) * (trace[0].0 - l) > 0.0 {
            j += 1;
        }
        let (l0, w0) = trace[j - 1];
        let (l1, w1) = trace[j];
        let w = if (l1 - l0).abs() < span {
            0.5 * (w0 + w1)
        } else {
            w0 + (w1 - w0) * (l - l0) / (l1 - l0)
        };
        out.push((l, w));
    }
    Ok(out)
}
