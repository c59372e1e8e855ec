//! Benchmark problems: a two-degree-of-freedom spring pendulum and a
//! geometrically nonlinear beam discretized with mixed finite elements.

use crate::anm::{CondensedProblem, QuadraticProblem};
use crate::densela::{self, Matrix, Vector};
use crate::error::{Error, Result};

pub const SPRING_STIFFNESS: f64 = 10.0;
pub const SPRING_REST_LENGTH: f64 = 1.0;
pub const SPRING_WEIGHT: f64 = 1.0;

/// Hanging spring with a point mass, loaded sideways by `lambda`.
///
/// Unknowns `(w1, w2, l)`: the horizontal and vertical components of the
/// mass position and the spring length, tied by `l^2 = w1^2 + w2^2`. The
/// length unknown turns the trigonometric equilibrium equations into
/// quadratic ones.
pub fn spring_mass_problem() -> QuadraticProblem {
    let ks = SPRING_STIFFNESS;
    let l = Matrix::from_rows(&[
        vec![-ks * SPRING_REST_LENGTH, 0.0, 0.0],
        vec![0.0, -ks * SPRING_REST_LENGTH, -SPRING_WEIGHT],
        vec![0.0, 0.0, 0.0],
    ]);
    let mut b = Matrix::zeros(3, 3);
    b[(0, 2)] = -1.0;
    QuadraticProblem::new(
        vec![0.0; 3],
        l,
        Box::new(move |x: &[f64], y: &[f64]| {
            vec![
                0.5 * ks * (x[0] * y[2] + x[2] * y[0]),
                0.5 * ks * (x[1] * y[2] + x[2] * y[1]),
                x[2] * y[2] - x[0] * y[0] - x[1] * y[1],
            ]
        }),
        vec![0.0; 3],
        b,
    )
    .expect("fixed dimensions")
}

/// Spring pendulum condensed onto the position unknowns; the length is
/// eliminated, leaving a two-dimensional tangent for the linear solvers.
pub fn spring_mass_condensed() -> CondensedProblem {
    let l_start = spring_mass_analytic(0.0)[2];
    CondensedProblem::new(spring_mass_problem(), vec![0, 1], vec![2], vec![l_start])
        .expect("fixed partition")
}

/// Closed-form equilibrium `(w1, w2, l)` at load `lambda`.
pub fn spring_mass_analytic(lambda: f64) -> Vector {
    let mg = SPRING_WEIGHT;
    let f = (lambda * lambda + mg * mg).sqrt();
    let l = SPRING_REST_LENGTH + f / SPRING_STIFFNESS;
    vec![l * lambda / f, l * mg / f, l]
}

/// Unloaded equilibrium, the continuation start point.
pub fn spring_mass_start() -> (Vector, f64) {
    (spring_mass_analytic(0.0), 0.0)
}

pub const BEAM_LENGTH: f64 = 30.0;
pub const BEAM_WIDTH: f64 = 1.0;
pub const BEAM_HEIGHT: f64 = 1.0;
pub const BEAM_YOUNGS: f64 = 3.0e5;

#[derive(Clone, Copy, Debug)]
pub enum BeamLoad {
    /// Uniform transverse pressure on a clamped-clamped beam, modeled on
    /// the symmetric half span.
    Flection { pressure: f64 },
    /// Axial end force on a pinned-pinned beam, with a small transverse
    /// trigger at midspan to break the symmetry of the straight state.
    Buckling { f0: f64, trigger: f64 },
}

struct MembranePoint {
    /// Gauss weight including the element Jacobian.
    weight: f64,
    /// Position along the modeled span.
    x: f64,
    /// Axial strain row `u'` over the free unknowns.
    g_l: Vector,
    /// Slope row `w'`.
    g_w1: Vector,
    /// Curvature row `w''`.
    g_w2: Vector,
}

/// Bernoulli beam with von Karman axial strain `u' + (w')^2 / 2`, linear
/// axial and Hermite cubic transverse interpolation. The axial force at
/// each membrane Gauss point is kept as an auxiliary unknown so the
/// residual is quadratic in the full unknown set.
pub struct BeamModel {
    pub load: BeamLoad,
    pub span: f64,
    pub ea: f64,
    pub ei: f64,
    pub youngs: f64,
    elements: usize,
    /// Global node-component unknown to free index, `None` when fixed.
    free: Vec<Option<usize>>,
    n_free: usize,
    k_bend: Matrix,
    f_ext: Vector,
    gauss: Vec<MembranePoint>,
}

impl BeamModel {
    /// Half of a clamped-clamped beam under uniform pressure.
    pub fn flection() -> Self {
        Self::custom(BeamLoad::Flection { pressure: 100.0 }, 5).expect("valid config")
    }

    /// Pinned-pinned beam under axial compression.
    pub fn buckling() -> Self {
        Self::custom(BeamLoad::Buckling { f0: 1.0, trigger: 1e-7 }, 10).expect("valid config")
    }

    pub fn custom(load: BeamLoad, elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidConfig("beam needs at least one element".into()));
        }
        if matches!(load, BeamLoad::Buckling { .. }) && elements % 2 != 0 {
            return Err(Error::InvalidConfig(
                "buckling trigger sits on the middle node; use an even element count".into(),
            ));
        }
        let span = match load {
            BeamLoad::Flection { .. } => BEAM_LENGTH / 2.0,
            BeamLoad::Buckling { .. } => BEAM_LENGTH,
        };
        let ea = BEAM_YOUNGS * BEAM_WIDTH * BEAM_HEIGHT;
        let ei = BEAM_YOUNGS * BEAM_WIDTH * BEAM_HEIGHT.powi(3) / 12.0;
        let h = span / elements as f64;
        let nodes = elements + 1;

        let mut fixed = vec![false; 3 * nodes];
        match load {
            BeamLoad::Flection { .. } => {
                // clamped end, symmetry plane at midspan
                fixed[0] = true;
                fixed[1] = true;
                fixed[2] = true;
                fixed[3 * (nodes - 1)] = true;
                fixed[3 * (nodes - 1) + 2] = true;
            }
            BeamLoad::Buckling { .. } => {
                fixed[0] = true;
                fixed[1] = true;
                fixed[3 * (nodes - 1) + 1] = true;
            }
        }
        let mut free = vec![None; 3 * nodes];
        let mut n_free = 0;
        for (g, fx) in fixed.iter().enumerate() {
            if !fx {
                free[g] = Some(n_free);
                n_free += 1;
            }
        }

        let mut k_bend = Matrix::zeros(n_free, n_free);
        let mut f_ext = vec![0.0; n_free];
        let mut gauss = Vec::with_capacity(2 * elements);

        // 3-point rule for bending, mapped to [0, 1]
        let r = (0.6f64).sqrt();
        let bend_rule = [
            (0.5 * (1.0 - r), 5.0 / 18.0),
            (0.5, 4.0 / 9.0),
            (0.5 * (1.0 + r), 5.0 / 18.0),
        ];
        // 2-point rule for the membrane terms
        let s3 = 1.0 / 3.0f64.sqrt();
        let memb_rule = [(0.5 * (1.0 - s3), 0.5), (0.5 * (1.0 + s3), 0.5)];

        for e in 0..elements {
            let dofs: [usize; 6] = [
                3 * e,
                3 * e + 1,
                3 * e + 2,
                3 * (e + 1),
                3 * (e + 1) + 1,
                3 * (e + 1) + 2,
            ];
            for (xi, w) in bend_rule {
                let bb = hermite_dd(xi, h);
                let wj = w * h;
                for a in 0..6 {
                    let Some(i) = free[dofs[a]] else { continue };
                    for b in 0..6 {
                        let Some(j) = free[dofs[b]] else { continue };
                        k_bend[(i, j)] += ei * wj * bb[a] * bb[b];
                    }
                }
            }
            for (xi, w) in memb_rule {
                let mut g_l = vec![0.0; n_free];
                let mut g_w1 = vec![0.0; n_free];
                let mut g_w2 = vec![0.0; n_free];
                let rows = [axial_d(h), hermite_d(xi, h), hermite_dd(xi, h)];
                let outs = [&mut g_l, &mut g_w1, &mut g_w2];
                for (row, out) in rows.iter().zip(outs) {
                    for a in 0..6 {
                        if let Some(i) = free[dofs[a]] {
                            out[i] = row[a];
                        }
                    }
                }
                gauss.push(MembranePoint {
                    weight: w * h,
                    x: (e as f64 + xi) * h,
                    g_l,
                    g_w1,
                    g_w2,
                });
            }
            if let BeamLoad::Flection { pressure } = load {
                // consistent nodal load for a uniform line load
                let fe = [
                    0.0,
                    pressure * h / 2.0,
                    pressure * h * h / 12.0,
                    0.0,
                    pressure * h / 2.0,
                    -pressure * h * h / 12.0,
                ];
                for a in 0..6 {
                    if let Some(i) = free[dofs[a]] {
                        f_ext[i] += fe[a];
                    }
                }
            }
        }
        if let BeamLoad::Buckling { f0, trigger } = load {
            let end_u = free[3 * (nodes - 1)].expect("end axial unknown is free");
            f_ext[end_u] = -f0;
            let mid_w = free[3 * (elements / 2) + 1].expect("midspan deflection is free");
            f_ext[mid_w] = f0 * trigger;
        }

        Ok(BeamModel {
            load,
            span,
            ea,
            ei,
            youngs: BEAM_YOUNGS,
            elements,
            free,
            n_free,
            k_bend,
            f_ext,
            gauss,
        })
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn free_dof(&self, node: usize, comp: usize) -> Option<usize> {
        self.free[3 * node + comp]
    }

    /// Free index of the midspan deflection: the last node for the half
    /// model, the middle node for the full one.
    pub fn midspan_w(&self) -> usize {
        let node = match self.load {
            BeamLoad::Flection { .. } => self.elements,
            BeamLoad::Buckling { .. } => self.elements / 2,
        };
        self.free_dof(node, 1).expect("midspan deflection is free")
    }

    /// Quadratic continuation problem condensed onto the displacement
    /// unknowns; the Gauss-point axial forces are the auxiliary block.
    pub fn problem(&self) -> CondensedProblem {
        let nq = self.n_free;
        let ns = self.gauss.len();
        let dim = nq + ns;

        let mut l = Matrix::zeros(dim, dim);
        for i in 0..nq {
            for j in 0..nq {
                l[(i, j)] = self.k_bend[(i, j)];
            }
        }
        for (g, pt) in self.gauss.iter().enumerate() {
            for i in 0..nq {
                l[(i, nq + g)] += pt.weight * pt.g_l[i];
                l[(nq + g, i)] = -self.ea * pt.g_l[i];
            }
            l[(nq + g, nq + g)] = 1.0;
        }

        let mut g_vec = vec![0.0; dim];
        for i in 0..nq {
            g_vec[i] = -self.f_ext[i];
        }

        let points: Vec<(f64, Vector)> = self
            .gauss
            .iter()
            .map(|p| (p.weight, p.g_w1.clone()))
            .collect();
        let ea = self.ea;
        let q = Box::new(move |x: &[f64], y: &[f64]| {
            let mut out = vec![0.0; dim];
            for (g, (w, g_w1)) in points.iter().enumerate() {
                let tx = densela::dot(g_w1, &x[..nq]);
                let ty = densela::dot(g_w1, &y[..nq]);
                let coupling = 0.5 * (tx * y[nq + g] + ty * x[nq + g]);
                for i in 0..nq {
                    out[i] += w * coupling * g_w1[i];
                }
                out[nq + g] = -0.5 * ea * tx * ty;
            }
            out
        });

        let full = QuadraticProblem::new(vec![0.0; dim], l, q, g_vec, Matrix::zeros(dim, dim))
            .expect("consistent dimensions");
        CondensedProblem::new(
            full,
            (0..nq).collect(),
            (nq..dim).collect(),
            vec![0.0; ns],
        )
        .expect("consistent partition")
    }

    /// Axial stress at the membrane Gauss points for fiber offset `z`
    /// from the neutral axis: `sigma = E (u' + (w')^2 / 2 - z w'')`.
    pub fn stress_field(&self, q_free: &[f64], z: f64) -> Vec<(f64, f64)> {
        self.gauss
            .iter()
            .map(|p| {
                let el = densela::dot(&p.g_l, q_free);
                let th = densela::dot(&p.g_w1, q_free);
                let ka = densela::dot(&p.g_w2, q_free);
                (p.x, self.youngs * (el + 0.5 * th * th - z * ka))
            })
            .collect()
    }
}

/// `du'/dq` over the element unknowns `(u1, w1, t1, u2, w2, t2)`.
fn axial_d(h: f64) -> [f64; 6] {
    [-1.0 / h, 0.0, 0.0, 1.0 / h, 0.0, 0.0]
}

/// `dw'/dq` from the Hermite shape functions at local coordinate `xi`.
fn hermite_d(xi: f64, h: f64) -> [f64; 6] {
    [
        0.0,
        (-6.0 * xi + 6.0 * xi * xi) / h,
        1.0 - 4.0 * xi + 3.0 * xi * xi,
        0.0,
        (6.0 * xi - 6.0 * xi * xi) / h,
        -2.0 * xi + 3.0 * xi * xi,
    ]
}

/// `dw''/dq` at local coordinate `xi`.
fn hermite_dd(xi: f64, h: f64) -> [f64; 6] {
    [
        0.0,
        (-6.0 + 12.0 * xi) / (h * h),
        (-4.0 + 6.0 * xi) / h,
        0.0,
        (6.0 - 12.0 * xi) / (h * h),
        (-2.0 + 6.0 * xi) / h,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anm::ContinuationProblem;
    use crate::newton::{nr_solve_at, NewtonSettings};
    use crate::qsim::{Sampler, ShotModel};

    fn nr_direct(
        p: &dyn crate::anm::ContinuationProblem,
        u0: &[f64],
        lambda: f64,
        settings: &NewtonSettings,
    ) -> Vec<f64> {
        let mut s = Sampler::new(ShotModel::exact());
        nr_solve_at(p, u0, lambda, settings, &crate::anm::LinearSolverHandle::Direct, &mut s)
            .unwrap()
            .0
    }

    #[test]
    fn spring_residual_examples() {
        let p = spring_mass_problem();
        let (u0, l0) = spring_mass_start();
        let r = p.residual(&u0, l0).unwrap();
        assert!(densela::norm(&r) < 1e-14);

        // unstretched vertical spring: only the weight is unbalanced
        let r = p.residual(&[0.0, 1.0, 1.0], 0.0).unwrap();
        assert!((r[0] - 0.0).abs() < 1e-14);
        assert!((r[1] + 1.0).abs() < 1e-14);
        assert!((r[2] - 0.0).abs() < 1e-14);
    }

    #[test]
    fn spring_analytic_satisfies_residual() {
        let p = spring_mass_problem();
        for i in 0..=50 {
            let lambda = 0.1 * i as f64;
            let u = spring_mass_analytic(lambda);
            let r = p.residual(&u, lambda).unwrap();
            assert!(densela::norm(&r) < 1e-12, "lambda {lambda}");
        }
        let u = spring_mass_analytic(1.0);
        assert!((u[0] - 0.8071067811865476).abs() < 1e-12);
        assert!((u[1] - 0.8071067811865476).abs() < 1e-12);
    }

    #[test]
    fn condensed_spring_matches_full() {
        let cond = spring_mass_condensed();
        for lambda in [0.0, 0.4, 1.0] {
            let u = spring_mass_analytic(lambda);
            let r = cond.residual(&u[..2], lambda).unwrap();
            assert!(densela::norm(&r) < 1e-10, "lambda {lambda}");
            let full = cond.full_state(&u[..2], lambda).unwrap();
            assert!((full[2] - u[2]).abs() < 1e-10);
        }
    }

    #[test]
    fn condensed_spring_tangent_is_jacobi_friendly() {
        let cond = spring_mass_condensed();
        let (u0, l0) = spring_mass_start();
        let kt = cond.jacobian(&u0[..2], l0).unwrap();
        // diag(1, 11): strictly diagonally dominant, unlike the full
        // three-variable tangent
        assert!((kt[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((kt[(1, 1)] - 11.0).abs() < 1e-12);
        assert!(kt[(0, 1)].abs() < 1e-12);
        assert!(kt[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn beam_sizes() {
        let flection = BeamModel::flection();
        assert_eq!(flection.n_free(), 13);
        let buckling = BeamModel::buckling();
        assert_eq!(buckling.n_free(), 30);
        assert_eq!(flection.problem().dim(), 13);
        assert_eq!(buckling.problem().dim(), 30);
    }

    #[test]
    fn bending_stiffness_is_symmetric() {
        let m = BeamModel::flection();
        for i in 0..m.n_free {
            assert!(m.k_bend[(i, i)] >= 0.0);
            for j in 0..m.n_free {
                assert!((m.k_bend[(i, j)] - m.k_bend[(j, i)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn beam_tangent_matches_finite_differences() {
        let m = BeamModel::custom(BeamLoad::Flection { pressure: 100.0 }, 2).unwrap();
        let cond = m.problem();
        let full = cond.full_problem();
        let dim = m.n_free() + 2 * 2;
        let u: Vector = (0..dim).map(|i| 0.01 * (i as f64 - 4.0)).collect();
        let kt = full.tangent_at(&u, 0.3);
        let h = 1e-6;
        for j in 0..dim {
            let mut up = u.clone();
            up[j] += h;
            let mut um = u.clone();
            um[j] -= h;
            let rp = full.residual(&up, 0.3).unwrap();
            let rm = full.residual(&um, 0.3).unwrap();
            for i in 0..dim {
                let fd = (rp[i] - rm[i]) / (2.0 * h);
                assert!(
                    (kt[(i, j)] - fd).abs() < 1e-3 * (1.0 + fd.abs()),
                    "entry ({i},{j}): {} vs {}",
                    kt[(i, j)],
                    fd
                );
            }
        }
    }

    #[test]
    fn flection_linear_deflection() {
        // clamped-clamped beam: w_mid = q L^4 / (384 EI); Hermite elements
        // with a consistent load are nodally exact in the linear regime
        let m = BeamModel::flection();
        let p = m.problem();
        let lambda = 1e-4;
        let q = nr_direct(
            &p,
            &vec![0.0; m.n_free()],
            lambda,
            &NewtonSettings { eps_r: 1e-12, max_iter: 30 },
        );
        let w_mid = q[m.midspan_w()];
        let q_line = lambda * 100.0;
        let expect = q_line * BEAM_LENGTH.powi(4) / (384.0 * m.ei);
        assert!((expect - 8.4375e-4).abs() < 1e-12);
        assert!(
            (w_mid - expect).abs() < 1e-3 * expect,
            "w_mid {w_mid}, expected {expect}"
        );
    }

    #[test]
    fn flection_stress_matches_beam_theory() {
        // linear regime: sigma = -E z w'' with w'' = M / EI,
        // M(x) = q (6 L x - 6 x^2 - L^2) / 12 on the clamped-clamped beam
        let m = BeamModel::custom(BeamLoad::Flection { pressure: 100.0 }, 10).unwrap();
        let p = m.problem();
        let lambda = 1e-4;
        let q = nr_direct(
            &p,
            &vec![0.0; m.n_free()],
            lambda,
            &NewtonSettings { eps_r: 1e-12, max_iter: 30 },
        );
        let q_line = lambda * 100.0;
        let z = -BEAM_HEIGHT / 2.0;
        let field = m.stress_field(&q, z);
        let sigma_max = field.iter().map(|(_, s)| s.abs()).fold(0.0, f64::max);
        for (x, sigma) in field {
            let curvature = q_line * (6.0 * x * x - 6.0 * BEAM_LENGTH * x + BEAM_LENGTH.powi(2))
                / (12.0 * m.ei);
            let expect = -m.youngs * z * curvature;
            assert!(
                (sigma - expect).abs() < 0.03 * sigma_max,
                "x {x}: {sigma} vs {expect}"
            );
        }
    }

    #[test]
    fn buckling_precritical_axial_state() {
        let m = BeamModel::custom(BeamLoad::Buckling { f0: 1.0, trigger: 0.0 }, 10).unwrap();
        let p = m.problem();
        let lambda = 50.0;
        let q = nr_direct(
            &p,
            &vec![0.0; m.n_free()],
            lambda,
            &NewtonSettings { eps_r: 1e-9, max_iter: 30 },
        );
        // uniform compression: end shortening F L / EA, no deflection
        let u_end = q[m.free_dof(10, 0).unwrap()];
        let expect = -lambda * BEAM_LENGTH / m.ea;
        assert!((u_end - expect).abs() < 1e-9 * expect.abs());
        for node in 1..10 {
            assert!(q[m.free_dof(node, 1).unwrap()].abs() < 1e-12);
        }
    }

    #[test]
    fn buckling_critical_load() {
        // Euler load pi^2 EI / L^2 = 274.16 for the pinned-pinned beam;
        // the tangent determinant changes sign across it
        let m = BeamModel::custom(BeamLoad::Buckling { f0: 1.0, trigger: 0.0 }, 10).unwrap();
        let p = m.problem();
        // None when the tangent is numerically singular, meaning the
        // bisection landed on the critical point itself
        let det_sign = |lambda: f64| -> Option<f64> {
            let q = nr_direct(
                &p,
                &vec![0.0; m.n_free()],
                lambda,
                &NewtonSettings { eps_r: 1e-9, max_iter: 30 },
            );
            let kt = p.jacobian(&q, lambda).unwrap();
            densela::lu_factor(&kt).ok().map(|f| f.det_sign())
        };
        let (mut lo, mut hi) = (250.0, 290.0);
        let s_lo = det_sign(lo).unwrap();
        assert!(s_lo > 0.0);
        assert!(det_sign(hi).unwrap() < 0.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            match det_sign(mid) {
                None => {
                    lo = mid;
                    hi = mid;
                    break;
                }
                Some(s) if s == s_lo => lo = mid,
                Some(_) => hi = mid,
            }
        }
        let critical = 0.5 * (lo + hi);
        let euler = std::f64::consts::PI.powi(2) * m.ei / BEAM_LENGTH.powi(2);
        assert!((euler - 274.155677).abs() < 1e-3);
        assert!(
            (critical - euler).abs() < 0.01 * euler,
            "critical load {critical} vs Euler {euler}"
        );
    }

    #[test]
    fn flection_converges_under_refinement() {
        let lambda = 0.5;
        let mut mids = Vec::new();
        for elements in [10usize, 20] {
            let m = BeamModel::custom(BeamLoad::Flection { pressure: 100.0 }, elements).unwrap();
            let p = m.problem();
            // walk up in load so Newton stays in the basin
            let mut q = vec![0.0; m.n_free()];
            for step in 1..=5 {
                let l = lambda * step as f64 / 5.0;
                q = nr_direct(&p, &q, l, &NewtonSettings { eps_r: 1e-8, max_iter: 50 });
            }
            mids.push(q[m.midspan_w()]);
        }
        let rel = (mids[1] - mids[0]).abs() / mids[1].abs();
        assert!(rel < 0.01, "midspan deflections {mids:?}");
    }
}
