//! Asymptotic numerical method: high-order Taylor continuation.
//!
//! Each step expands the solution of `R(u, lambda) = 0` in a path
//! parameter `a` around the current point, solving one linear system per
//! series order with a pluggable linear solver. The series validity range
//! gives an adaptive step length, so a handful of steps can cover paths
//! that force small increments on incremental-iterative schemes.

use crate::densela::{self, LuFactors, Matrix, Vector};
use crate::error::{Error, Result};
use crate::qjacobi;
use crate::qsim::Sampler;
use crate::vqls;

/// A problem the continuation engine can expand: a residual and, at any
/// regular point, a quadratic-recast Taylor expansion.
pub trait ContinuationProblem {
    fn dim(&self) -> usize;
    fn residual(&self, u: &[f64], lambda: f64) -> Result<Vector>;
    /// Jacobian of the residual with respect to `u`, at any state.
    fn jacobian(&self, u: &[f64], lambda: f64) -> Result<Matrix>;
    fn expansion(&self, u0: &[f64], lambda0: f64) -> Result<Box<dyn Expansion + '_>>;
}

/// Order-by-order expansion state at a fixed point of the path.
///
/// `tangent` and `load` define the first-order system; `f_nl(p)` collects
/// the quadratic convolution of previously accepted orders. Accepted
/// orders are recorded with `push_order` so later convolutions see them.
pub trait Expansion {
    fn tangent(&self) -> &Matrix;
    fn load(&self) -> &Vector;
    fn f_nl(&self, p: usize) -> Result<Vector>;
    fn push_order(&mut self, u_p: Vector, lambda_p: f64) -> Result<()>;
}

/// Residual in fully quadratic form:
/// `R(u, lambda) = C + L u + Q(u, u) + lambda G + lambda B u`.
pub struct QuadraticProblem {
    c: Vector,
    l: Matrix,
    q: Box<dyn Fn(&[f64], &[f64]) -> Vector + Send + Sync>,
    g: Vector,
    b: Matrix,
    dim: usize,
}

impl QuadraticProblem {
    /// `q` must be bilinear and symmetric in its arguments.
    pub fn new(
        c: Vector,
        l: Matrix,
        q: Box<dyn Fn(&[f64], &[f64]) -> Vector + Send + Sync>,
        g: Vector,
        b: Matrix,
    ) -> Result<Self> {
        let dim = c.len();
        if !l.is_square() || l.rows() != dim || g.len() != dim || !b.is_square() || b.rows() != dim
        {
            return Err(Error::DimensionMismatch(
                "quadratic problem operators disagree on dimension".into(),
            ));
        }
        Ok(QuadraticProblem { c, l, q, g, b, dim })
    }

    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Vector {
        (self.q)(x, y)
    }

    /// Jacobian with respect to `u`: `L + 2 Q(u0, .) + lambda0 B`.
    pub fn tangent_at(&self, u0: &[f64], lambda0: f64) -> Matrix {
        let d = self.dim;
        let mut kt = self.l.add(&self.b.scaled(lambda0));
        let mut e = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            let col = (self.q)(u0, &e);
            for i in 0..d {
                kt[(i, j)] += 2.0 * col[i];
            }
            e[j] = 0.0;
        }
        kt
    }
}

impl ContinuationProblem for QuadraticProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn residual(&self, u: &[f64], lambda: f64) -> Result<Vector> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "residual: state length {} for dimension {}",
                u.len(),
                self.dim
            )));
        }
        let mut r = self.c.clone();
        densela::axpy(&mut r, 1.0, &self.l.matvec(u));
        densela::axpy(&mut r, 1.0, &(self.q)(u, u));
        densela::axpy(&mut r, lambda, &self.g);
        densela::axpy(&mut r, lambda, &self.b.matvec(u));
        Ok(r)
    }

    fn jacobian(&self, u: &[f64], lambda: f64) -> Result<Matrix> {
        Ok(self.tangent_at(u, lambda))
    }

    fn expansion(&self, u0: &[f64], lambda0: f64) -> Result<Box<dyn Expansion + '_>> {
        let tangent = self.tangent_at(u0, lambda0);
        let mut load = self.g.clone();
        densela::axpy(&mut load, 1.0, &self.b.matvec(u0));
        let load = densela::scaled(&load, -1.0);
        Ok(Box::new(QuadraticExpansion {
            problem: self,
            tangent,
            load,
            u: Vec::new(),
            lambda: Vec::new(),
        }))
    }
}

struct QuadraticExpansion<'p> {
    problem: &'p QuadraticProblem,
    tangent: Matrix,
    load: Vector,
    u: Vec<Vector>,
    lambda: Vec<f64>,
}

impl Expansion for QuadraticExpansion<'_> {
    fn tangent(&self) -> &Matrix {
        &self.tangent
    }

    fn load(&self) -> &Vector {
        &self.load
    }

    fn f_nl(&self, p: usize) -> Result<Vector> {
        if p < 2 || self.u.len() < p - 1 {
            return Err(Error::InvalidConfig(format!(
                "f_nl({p}) with {} accepted orders",
                self.u.len()
            )));
        }
        let mut f = vec![0.0; self.problem.dim];
        for i in 1..p {
            let qi = self.problem.bilinear(&self.u[i - 1], &self.u[p - i - 1]);
            densela::axpy(&mut f, 1.0, &qi);
            densela::axpy(
                &mut f,
                self.lambda[i - 1],
                &self.problem.b.matvec(&self.u[p - i - 1]),
            );
        }
        Ok(f)
    }

    fn push_order(&mut self, u_p: Vector, lambda_p: f64) -> Result<()> {
        self.u.push(u_p);
        self.lambda.push(lambda_p);
        Ok(())
    }
}

/// Static condensation of a quadratic problem onto a subset of unknowns.
///
/// The continuation series runs on the primary block while auxiliary
/// unknowns are eliminated through the Schur complement at each order and
/// reconstructed afterwards. Linear solves then act on the smaller
/// condensed tangent, which is what the quantum solvers see.
pub struct CondensedProblem {
    full: QuadraticProblem,
    primary: Vec<usize>,
    aux: Vec<usize>,
    aux_init: Vector,
}

impl CondensedProblem {
    pub fn new(
        full: QuadraticProblem,
        primary: Vec<usize>,
        aux: Vec<usize>,
        aux_init: Vector,
    ) -> Result<Self> {
        let d = full.dim;
        let mut seen = vec![false; d];
        for &i in primary.iter().chain(&aux) {
            if i >= d || seen[i] {
                return Err(Error::InvalidConfig(format!(
                    "condensation index {i} repeated or out of range"
                )));
            }
            seen[i] = true;
        }
        if primary.len() + aux.len() != d || aux_init.len() != aux.len() {
            return Err(Error::InvalidConfig(
                "condensation blocks must partition the unknowns".into(),
            ));
        }
        Ok(CondensedProblem { full, primary, aux, aux_init })
    }

    pub fn full_problem(&self) -> &QuadraticProblem {
        &self.full
    }

    fn assemble(&self, q: &[f64], s: &[f64]) -> Vector {
        let mut u = vec![0.0; self.full.dim];
        for (i, &gi) in self.primary.iter().enumerate() {
            u[gi] = q[i];
        }
        for (j, &gj) in self.aux.iter().enumerate() {
            u[gj] = s[j];
        }
        u
    }

    /// Newton solve of the auxiliary block for fixed primary unknowns.
    pub fn solve_aux(&self, q: &[f64], lambda: f64, s_start: &[f64]) -> Result<Vector> {
        let mut s = s_start.to_vec();
        for _ in 0..50 {
            let u = self.assemble(q, &s);
            let r = self.full.residual(&u, lambda)?;
            let g = subvec(&r, &self.aux);
            if densela::norm(&g) <= 1e-11 * (1.0 + densela::norm(&s)) {
                return Ok(s);
            }
            let kt = self.full.tangent_at(&u, lambda);
            let kss = submatrix(&kt, &self.aux, &self.aux);
            let ds = densela::lu_solve(&kss, &g).map_err(|_| Error::AuxSolveFailed)?;
            densela::axpy(&mut s, -1.0, &ds);
        }
        Err(Error::AuxSolveFailed)
    }

    /// Expands the full state at a condensed point.
    pub fn full_state(&self, q: &[f64], lambda: f64) -> Result<Vector> {
        let s = self.solve_aux(q, lambda, &self.aux_init)?;
        Ok(self.assemble(q, &s))
    }
}

impl ContinuationProblem for CondensedProblem {
    fn dim(&self) -> usize {
        self.primary.len()
    }

    fn residual(&self, q: &[f64], lambda: f64) -> Result<Vector> {
        let s = self.solve_aux(q, lambda, &self.aux_init)?;
        let u = self.assemble(q, &s);
        let r = self.full.residual(&u, lambda)?;
        Ok(subvec(&r, &self.primary))
    }

    fn jacobian(&self, q: &[f64], lambda: f64) -> Result<Matrix> {
        let s = self.solve_aux(q, lambda, &self.aux_init)?;
        let u = self.assemble(q, &s);
        let kt = self.full.tangent_at(&u, lambda);
        let kqq = submatrix(&kt, &self.primary, &self.primary);
        let kqs = submatrix(&kt, &self.primary, &self.aux);
        let ksq = submatrix(&kt, &self.aux, &self.primary);
        let kss = submatrix(&kt, &self.aux, &self.aux);
        let kss_lu = densela::lu_factor(&kss)?;
        let nq = self.primary.len();
        let mut j = kqq;
        for col in 0..nq {
            let rhs: Vector = (0..self.aux.len()).map(|i| ksq[(i, col)]).collect();
            let y = kss_lu.solve(&rhs)?;
            let z = kqs.matvec(&y);
            for row in 0..nq {
                j[(row, col)] -= z[row];
            }
        }
        Ok(j)
    }

    fn expansion(&self, q0: &[f64], lambda0: f64) -> Result<Box<dyn Expansion + '_>> {
        let s0 = self.solve_aux(q0, lambda0, &self.aux_init)?;
        let u0 = self.assemble(q0, &s0);
        let kt = self.full.tangent_at(&u0, lambda0);
        let kqq = submatrix(&kt, &self.primary, &self.primary);
        let kqs = submatrix(&kt, &self.primary, &self.aux);
        let ksq = submatrix(&kt, &self.aux, &self.primary);
        let kss = submatrix(&kt, &self.aux, &self.aux);
        let kss_lu = densela::lu_factor(&kss)?;

        // condensed tangent: Kqq - Kqs Kss^-1 Ksq
        let nq = self.primary.len();
        let mut tangent = kqq;
        for j in 0..nq {
            let col: Vector = (0..self.aux.len()).map(|i| ksq[(i, j)]).collect();
            let y = kss_lu.solve(&col)?;
            let z = kqs.matvec(&y);
            for i in 0..nq {
                tangent[(i, j)] -= z[i];
            }
        }

        let mut load_full = self.full.g.clone();
        densela::axpy(&mut load_full, 1.0, &self.full.b.matvec(&u0));
        let load_full = densela::scaled(&load_full, -1.0);
        let load_q = subvec(&load_full, &self.primary);
        let load_s = subvec(&load_full, &self.aux);
        let y = kss_lu.solve(&load_s)?;
        let load = densela::sub(&load_q, &kqs.matvec(&y));

        Ok(Box::new(CondensedExpansion {
            problem: self,
            tangent,
            load,
            load_s,
            kqs,
            ksq,
            kss_lu,
            u_full: Vec::new(),
            lambda: Vec::new(),
            pending_fnl_s: std::cell::RefCell::new(None),
        }))
    }
}

struct CondensedExpansion<'p> {
    problem: &'p CondensedProblem,
    tangent: Matrix,
    load: Vector,
    /// Auxiliary rows of the full first-order load.
    load_s: Vector,
    kqs: Matrix,
    ksq: Matrix,
    kss_lu: LuFactors,
    u_full: Vec<Vector>,
    lambda: Vec<f64>,
    pending_fnl_s: std::cell::RefCell<Option<Vector>>,
}

impl CondensedExpansion<'_> {
    fn full_f_nl(&self, p: usize) -> Result<Vector> {
        if p < 2 || self.u_full.len() < p - 1 {
            return Err(Error::InvalidConfig(format!(
                "f_nl({p}) with {} accepted orders",
                self.u_full.len()
            )));
        }
        let full = &self.problem.full;
        let mut f = vec![0.0; full.dim];
        for i in 1..p {
            let qi = full.bilinear(&self.u_full[i - 1], &self.u_full[p - i - 1]);
            densela::axpy(&mut f, 1.0, &qi);
            densela::axpy(
                &mut f,
                self.lambda[i - 1],
                &full.b.matvec(&self.u_full[p - i - 1]),
            );
        }
        Ok(f)
    }
}

impl Expansion for CondensedExpansion<'_> {
    fn tangent(&self) -> &Matrix {
        &self.tangent
    }

    fn load(&self) -> &Vector {
        &self.load
    }

    fn f_nl(&self, p: usize) -> Result<Vector> {
        let f = self.full_f_nl(p)?;
        let f_q = subvec(&f, &self.problem.primary);
        let f_s = subvec(&f, &self.problem.aux);
        let y = self.kss_lu.solve(&f_s)?;
        // push_order for this p will need the auxiliary rows again
        *self.pending_fnl_s.borrow_mut() = Some(f_s);
        Ok(densela::sub(&f_q, &self.kqs.matvec(&y)))
    }

    fn push_order(&mut self, q_p: Vector, lambda_p: f64) -> Result<()> {
        let fnl_s = self
            .pending_fnl_s
            .borrow_mut()
            .take()
            .unwrap_or_else(|| vec![0.0; self.problem.aux.len()]);
        // s_p = Kss^-1 (lambda_p F_s - Fnl_s - Ksq q_p)
        let mut rhs = densela::scaled(&self.load_s, lambda_p);
        densela::axpy(&mut rhs, -1.0, &fnl_s);
        densela::axpy(&mut rhs, -1.0, &self.ksq.matvec(&q_p));
        let s_p = self.kss_lu.solve(&rhs)?;
        self.u_full.push(self.problem.assemble(&q_p, &s_p));
        self.lambda.push(lambda_p);
        Ok(())
    }
}

fn submatrix(m: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(rows.len(), cols.len());
    for (i, &gi) in rows.iter().enumerate() {
        for (j, &gj) in cols.iter().enumerate() {
            out[(i, j)] = m[(gi, gj)];
        }
    }
    out
}

fn subvec(v: &[f64], idx: &[usize]) -> Vector {
    idx.iter().map(|&i| v[i]).collect()
}

/// Truncated series `u(a) = u0 + sum a^p u_p`, `lambda(a) = lambda0 + sum
/// a^p lambda_p`, valid for `a` in `[0, a_max]`.
#[derive(Clone, Debug)]
pub struct TaylorSeries {
    pub u0: Vector,
    pub lambda0: f64,
    /// `u[p - 1]` holds the order-`p` term.
    pub u: Vec<Vector>,
    pub lambda: Vec<f64>,
    pub a_max: f64,
}

impl TaylorSeries {
    pub fn order(&self) -> usize {
        self.u.len()
    }

    pub fn eval(&self, a: f64) -> (Vector, f64) {
        let d = self.u0.len();
        let mut acc_u = vec![0.0; d];
        let mut acc_l = 0.0;
        for p in (0..self.u.len()).rev() {
            for i in 0..d {
                acc_u[i] = acc_u[i] * a + self.u[p][i];
            }
            acc_l = acc_l * a + self.lambda[p];
        }
        let mut u = self.u0.clone();
        densela::axpy(&mut u, a, &acc_u);
        (u, self.lambda0 + a * acc_l)
    }

    /// First-order terms `(u1, lambda1)`.
    pub fn path_tangent(&self) -> (&[f64], f64) {
        (&self.u[0], self.lambda[0])
    }
}

#[derive(Clone, Copy, Debug)]
pub struct JacobiSettings {
    pub omega: f64,
    pub eps_j: f64,
    pub max_iter: usize,
}

impl Default for JacobiSettings {
    fn default() -> Self {
        JacobiSettings { omega: 2.0 / 3.0, eps_j: 1e-4, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VqlsSettings {
    pub layers: usize,
    pub max_evals: usize,
    pub cost_tol: f64,
    pub simplex_step: f64,
    pub seed: u64,
}

impl Default for VqlsSettings {
    fn default() -> Self {
        VqlsSettings {
            layers: 2,
            max_evals: 500,
            cost_tol: 1e-6,
            simplex_step: 0.8,
            seed: 0,
        }
    }
}

/// Backend used for the per-order linear solves.
#[derive(Clone, Copy, Debug)]
pub enum LinearSolverHandle {
    Direct,
    ClassicalJacobi(JacobiSettings),
    QJacobi(JacobiSettings),
    Vqls(VqlsSettings),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveStats {
    pub linear_solves: u64,
}

// The Jacobi divergence flag is only a warning: under shot noise the Tol
// sequence jitters around the sampling floor and can tick upward several
// times in a row on a perfectly convergent system. A genuinely divergent
// iterate blows up or trips the step residual gate downstream.
fn jacobi_iterate_check(rep: &qjacobi::QJacobiReport) -> Result<Vector> {
    if rep.solution.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence {
            iterations: rep.iterations,
            residual: rep.tol_history.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok(rep.solution.clone())
}

/// One-off linear solve through a solver handle.
pub fn solve_linear(
    handle: &LinearSolverHandle,
    k: &Matrix,
    f: &[f64],
    sampler: &mut Sampler,
) -> Result<Vector> {
    let mut lu = None;
    let mut stats = SolveStats::default();
    solve_linear_cached(handle, k, f, &mut lu, sampler, &mut stats)
}

fn solve_linear_cached(
    handle: &LinearSolverHandle,
    k: &Matrix,
    f: &[f64],
    lu: &mut Option<LuFactors>,
    sampler: &mut Sampler,
    stats: &mut SolveStats,
) -> Result<Vector> {
    stats.linear_solves += 1;
    match handle {
        LinearSolverHandle::Direct => {
            if lu.is_none() {
                *lu = Some(densela::lu_factor(k)?);
            }
            lu.as_ref().unwrap().solve(f)
        }
        LinearSolverHandle::ClassicalJacobi(js) => {
            let rep = qjacobi::classical_jacobi_solve(k, f, None, js.omega, js.eps_j, js.max_iter)?;
            jacobi_iterate_check(&rep)
        }
        LinearSolverHandle::QJacobi(js) => {
            let rep = qjacobi::solve(k, f, None, js.omega, js.eps_j, js.max_iter, sampler)?;
            jacobi_iterate_check(&rep)
        }
        LinearSolverHandle::Vqls(vs) => {
            if k.rows() == 1 {
                if k[(0, 0)] == 0.0 {
                    return Err(Error::ZeroDiagonal(0));
                }
                return Ok(vec![f[0] / k[(0, 0)]]);
            }
            let padded = k.rows().next_power_of_two();
            let config = vqls::AnsatzConfig {
                n_qubits: padded.trailing_zeros() as usize,
                layers: vs.layers,
            };
            let opts = vqls::OptimizerSettings {
                max_evals: vs.max_evals,
                cost_tol: vs.cost_tol,
                simplex_step: vs.simplex_step,
                seed: vs.seed.wrapping_add(stats.linear_solves),
            };
            let rep = vqls::solve(k, f, &config, &opts, sampler)?;
            Ok(rep.solution)
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ContinuationSettings {
    /// Truncation order N; N linear solves per step.
    pub order: usize,
    /// Requested series accuracy, sets the step length.
    pub eps_d: f64,
    /// Relative residual accepted at a step start.
    pub residual_gate: f64,
    /// Path points sampled per step.
    pub samples_per_step: usize,
    pub max_steps: usize,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        ContinuationSettings {
            order: 20,
            eps_d: 1e-4,
            residual_gate: 1e-6,
            samples_per_step: 100,
            max_steps: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum StopRule {
    /// Stop exactly at this load level.
    LambdaTarget(f64),
    /// Take a fixed number of full-length steps.
    Steps(usize),
}

/// Step length from the ratio of first to last series term:
/// `(eps_d |u1| / |uN|)^(1/(N-1))`.
pub fn a_max_estimate(eps_d: f64, norm_u1: f64, norm_un: f64, order: usize, norm_u0: f64) -> f64 {
    if norm_u1 <= 0.0 {
        return 0.0;
    }
    if norm_un < 1e-14 * norm_u1 {
        // series terminated early; the expansion is (near) exact
        return 10.0 * (1.0 + norm_u0) / norm_u1;
    }
    (eps_d * norm_u1 / norm_un).powf(1.0 / (order as f64 - 1.0))
}

/// Computes one Taylor step at `(u0, lambda0)`.
pub fn expand(
    problem: &dyn ContinuationProblem,
    u0: &[f64],
    lambda0: f64,
    settings: &ContinuationSettings,
    prev_tangent: Option<(&[f64], f64)>,
    solver: &LinearSolverHandle,
    sampler: &mut Sampler,
    stats: &mut SolveStats,
) -> Result<TaylorSeries> {
    if settings.order < 2 {
        return Err(Error::InvalidConfig("series order must be at least 2".into()));
    }
    let mut exp = problem.expansion(u0, lambda0)?;
    let load_norm = densela::norm(exp.load());
    let kt = exp.tangent().clone();
    let r = problem.residual(u0, lambda0)?;
    let rnorm = densela::norm(&r);
    // a step starts from the previous series endpoint, which carries the
    // accepted displacement truncation error of roughly eps_d; the residual
    // sees it amplified by the stiffness scale
    let scale = kt.max_abs() * (1.0 + densela::norm(u0)) + load_norm;
    let gate = settings.residual_gate.max(10.0 * settings.eps_d) * scale;
    if rnorm > gate {
        return Err(Error::StepResidualGate { residual: rnorm, gate });
    }
    let mut lu = None;
    let u_hat = solve_linear_cached(solver, &kt, exp.load(), &mut lu, sampler, stats)?;
    let denom = densela::dot(&u_hat, &u_hat) + 1.0;
    let mut lambda1 = 1.0 / denom.sqrt();
    if let Some((u1_prev, l1_prev)) = prev_tangent {
        let m = lambda1 * densela::dot(&u_hat, u1_prev) + lambda1 * l1_prev;
        if m < 0.0 {
            lambda1 = -lambda1;
        }
    }
    let u1 = densela::scaled(&u_hat, lambda1);
    exp.push_order(u1.clone(), lambda1)?;
    let mut u_terms = vec![u1];
    let mut lambda_terms = vec![lambda1];

    for p in 2..=settings.order {
        let fnl = exp.f_nl(p)?;
        let rhs = densela::scaled(&fnl, -1.0);
        let u_tilde = solve_linear_cached(solver, &kt, &rhs, &mut lu, sampler, stats)?;
        let lambda_p = -densela::dot(&u_terms[0], &u_tilde) / (lambda1 * denom);
        let mut u_p = densela::scaled(&u_hat, lambda_p);
        densela::axpy(&mut u_p, 1.0, &u_tilde);
        exp.push_order(u_p.clone(), lambda_p)?;
        u_terms.push(u_p);
        lambda_terms.push(lambda_p);
    }

    let norm_u1 = densela::norm(&u_terms[0]);
    // symmetry can zero out individual high orders; judge the range by the
    // highest order that actually contributes
    let mut last = 0usize;
    for (p, u_p) in u_terms.iter().enumerate() {
        if densela::norm(u_p) >= 1e-14 * norm_u1 {
            last = p;
        }
    }
    let a_max = if last == 0 {
        a_max_estimate(settings.eps_d, norm_u1, 0.0, settings.order, densela::norm(u0))
    } else {
        a_max_estimate(
            settings.eps_d,
            norm_u1,
            densela::norm(&u_terms[last]),
            last + 1,
            densela::norm(u0),
        )
    };

    Ok(TaylorSeries {
        u0: u0.to_vec(),
        lambda0,
        u: u_terms,
        lambda: lambda_terms,
        a_max,
    })
}

#[derive(Clone, Debug)]
pub struct SolutionPath {
    /// Sampled `(lambda, u)` points, starting at the initial state.
    pub points: Vec<(f64, Vector)>,
    pub steps: usize,
    pub step_lengths: Vec<f64>,
    pub series: Vec<TaylorSeries>,
    pub linear_solves: u64,
    pub circuit_executions: u64,
}

impl SolutionPath {
    /// Extracts one component as a `(lambda, value)` trace.
    pub fn trace(&self, component: usize) -> Vec<(f64, f64)> {
        self.points.iter().map(|(l, u)| (*l, u[component])).collect()
    }

    pub fn end(&self) -> &(f64, Vector) {
        self.points.last().unwrap()
    }
}

/// Continuation failure carrying whatever part of the path was completed.
#[derive(Debug)]
pub struct ContinuationFailure {
    pub error: Error,
    pub partial: SolutionPath,
}

pub fn continue_path(
    problem: &dyn ContinuationProblem,
    u_start: &[f64],
    lambda_start: f64,
    settings: &ContinuationSettings,
    stop: StopRule,
    solver: &LinearSolverHandle,
    sampler: &mut Sampler,
) -> std::result::Result<SolutionPath, Box<ContinuationFailure>> {
    let mut stats = SolveStats::default();
    let exec_start = sampler.executions();
    let mut path = SolutionPath {
        points: vec![(lambda_start, u_start.to_vec())],
        steps: 0,
        step_lengths: Vec::new(),
        series: Vec::new(),
        linear_solves: 0,
        circuit_executions: 0,
    };
    let mut u0 = u_start.to_vec();
    let mut lambda0 = lambda_start;
    let mut prev: Option<(Vector, f64)> = None;

    let max_steps = match stop {
        StopRule::Steps(n) => n,
        StopRule::LambdaTarget(_) => settings.max_steps,
    };

    let fail = |error, mut path: SolutionPath, stats: SolveStats, execs| {
        path.linear_solves = stats.linear_solves;
        path.circuit_executions = execs;
        Box::new(ContinuationFailure { error, partial: path })
    };

    for _ in 0..max_steps {
        let series = match expand(
            problem,
            &u0,
            lambda0,
            settings,
            prev.as_ref().map(|(u, l)| (u.as_slice(), *l)),
            solver,
            sampler,
            &mut stats,
        ) {
            Ok(s) => s,
            Err(e) => return Err(fail(e, path, stats, sampler.executions() - exec_start)),
        };

        let mut a_end = series.a_max;
        let mut finished = false;
        if let StopRule::LambdaTarget(target) = stop {
            let l_far = series.eval(series.a_max).1;
            if (lambda0 - target) * (l_far - target) <= 0.0 && lambda0 != target {
                // the series crosses the target; bisect for the crossing
                let (mut lo, mut hi) = (0.0f64, series.a_max);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let lm = series.eval(mid).1;
                    if (lambda0 - target) * (lm - target) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                a_end = hi;
                finished = true;
            }
        }

        let s = settings.samples_per_step.max(1);
        for i in 1..=s {
            let a = a_end * i as f64 / s as f64;
            let (u, l) = series.eval(a);
            path.points.push((l, u));
        }
        let (l_end, u_end) = path.points.last().clone().unwrap().clone();
        prev = Some((series.u[0].clone(), series.lambda[0]));
        path.step_lengths.push(a_end);
        path.series.push(series);
        path.steps += 1;
        u0 = u_end;
        lambda0 = l_end;
        if finished {
            path.linear_solves = stats.linear_solves;
            path.circuit_executions = sampler.executions() - exec_start;
            return Ok(path);
        }
    }

    match stop {
        StopRule::Steps(_) => {
            path.linear_solves = stats.linear_solves;
            path.circuit_executions = sampler.executions() - exec_start;
            Ok(path)
        }
        StopRule::LambdaTarget(target) => {
            let gap = (lambda0 - target).abs();
            Err(fail(
                Error::NoConvergence { iterations: max_steps, residual: gap },
                path,
                stats,
                sampler.executions() - exec_start,
            ))
        }
    }
}
