//! Quantum asymptotic numerical method (qANM).
//!
//! A nonlinear path-following solver that linearizes a parameterized
//! residual `R(u, lambda) = 0` through truncated Taylor series and solves
//! the resulting sequence of linear systems either directly or with
//! emulated quantum linear solvers (VQLS and the quantum Jacobi method).

pub mod anm;
pub mod densela;
pub mod error;
pub mod newton;
pub mod problems;
pub mod qjacobi;
pub mod qsim;
pub mod vqls;
pub mod vqmi;

pub use anm::{
    ContinuationSettings, LinearSolverHandle, QuadraticProblem, SolutionPath, StopRule,
    TaylorSeries,
};
pub use densela::{Matrix, Vector};
pub use error::Error;
pub use qsim::{QuantumState, Sampler, ShotMode, ShotModel};
