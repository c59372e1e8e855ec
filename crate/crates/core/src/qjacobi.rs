//! Quantum Jacobi linear solver.
//!
//! Weighted Jacobi iteration whose matrix-vector products are recovered
//! row by row from emulated Hadamard-test inner products:
//! `(M u)_i = |m_i| |u| (2 P0 - 1)`.

use crate::densela::{self, Matrix, Vector};
use crate::error::{Error, Result};
use crate::qsim::{self, Sampler};

/// Preprocessed Jacobi splitting: `M = -A^{-1} T`, `c = A^{-1} F`.
pub struct JacobiDecomposition {
    pub m: Matrix,
    pub c: Vector,
    pub row_norms: Vec<f64>,
    /// Unit-norm rows of `M`, zero-padded to a power of two for encoding.
    pub normalized_rows: Vec<Vector>,
    pub omega: f64,
}

#[derive(Clone, Debug)]
pub struct QJacobiReport {
    pub solution: Vector,
    pub iterations: usize,
    pub tol_history: Vec<f64>,
    pub circuit_executions: u64,
    pub converged: bool,
    /// Tol grew for five consecutive iterations.
    pub diverged: bool,
}

pub fn decompose(k: &Matrix, f: &[f64], omega: f64) -> Result<JacobiDecomposition> {
    if !k.is_square() || k.rows() != f.len() {
        return Err(Error::DimensionMismatch(format!(
            "jacobi decompose: {}x{} matrix, rhs length {}",
            k.rows(),
            k.cols(),
            f.len()
        )));
    }
    let d = k.rows();
    let padded = d.next_power_of_two();
    let mut m = Matrix::zeros(d, d);
    let mut c = vec![0.0; d];
    let mut row_norms = vec![0.0; d];
    let mut normalized_rows = Vec::with_capacity(d);
    for i in 0..d {
        let diag = k[(i, i)];
        if diag == 0.0 {
            return Err(Error::ZeroDiagonal(i));
        }
        for j in 0..d {
            if j != i {
                m[(i, j)] = -k[(i, j)] / diag;
            }
        }
        c[i] = f[i] / diag;
        let rn = densela::norm(m.row(i));
        row_norms[i] = rn;
        let mut unit = vec![0.0; padded];
        if rn > 0.0 {
            for j in 0..d {
                unit[j] = m[(i, j)] / rn;
            }
        }
        normalized_rows.push(unit);
    }
    Ok(JacobiDecomposition {
        m,
        c,
        row_norms,
        normalized_rows,
        omega,
    })
}

/// Solves `K u = F` with the quantum Jacobi iteration, estimating each row
/// inner product through the sampler's shot model.
pub fn solve(
    k: &Matrix,
    f: &[f64],
    u0: Option<&[f64]>,
    omega: f64,
    eps_j: f64,
    max_iter: usize,
    sampler: &mut Sampler,
) -> Result<QJacobiReport> {
    run(k, f, u0, omega, eps_j, max_iter, Some(sampler))
}

/// Classical weighted Jacobi baseline: exact matrix-vector products, no
/// circuit executions.
pub fn classical_jacobi_solve(
    k: &Matrix,
    f: &[f64],
    u0: Option<&[f64]>,
    omega: f64,
    eps_j: f64,
    max_iter: usize,
) -> Result<QJacobiReport> {
    run(k, f, u0, omega, eps_j, max_iter, None)
}

fn run(
    k: &Matrix,
    f: &[f64],
    u0: Option<&[f64]>,
    omega: f64,
    eps_j: f64,
    max_iter: usize,
    mut sampler: Option<&mut Sampler>,
) -> Result<QJacobiReport> {
    assert!(max_iter >= 1, "max_iter must be at least 1");
    let dec = decompose(k, f, omega)?;
    let d = k.rows();
    let padded = d.next_power_of_two();
    let exec_start = sampler.as_ref().map_or(0, |s| s.executions());

    // default initial guess: one classical preprocessing step
    let mut u: Vector = match u0 {
        Some(v) => v.to_vec(),
        None => dec.c.clone(),
    };
    let mut tol_history = Vec::new();
    let mut converged = false;
    let mut diverged = false;
    let mut growth_streak = 0usize;
    let mut iterations = 0usize;

    for _ in 0..max_iter {
        let unorm = densela::norm(&u);
        let mut mu = vec![0.0; d];
        if unorm > 0.0 {
            let mut u_unit = vec![0.0; padded];
            for j in 0..d {
                u_unit[j] = u[j] / unorm;
            }
            for i in 0..d {
                if dec.row_norms[i] == 0.0 {
                    continue; // zero row forces a zero product, no circuit
                }
                let inner = match sampler.as_deref_mut() {
                    Some(s) => {
                        let p0 = qsim::hadamard_test_p0(&dec.normalized_rows[i], &u_unit)?;
                        2.0 * s.sample(p0)? - 1.0
                    }
                    None => densela::dot(&dec.normalized_rows[i][..d], &u_unit[..d]),
                };
                mu[i] = dec.row_norms[i] * unorm * inner;
            }
        }
        let mut next = vec![0.0; d];
        for i in 0..d {
            next[i] = (1.0 - omega) * u[i] + omega * (mu[i] + dec.c[i]);
        }
        iterations += 1;
        let diff = densela::norm(&densela::sub(&next, &u));
        // Tol falls back to the absolute difference if the previous iterate
        // is zero
        let tol = if unorm > 0.0 { diff / unorm } else { diff };
        if let Some(&prev) = tol_history.last() {
            if tol > prev {
                growth_streak += 1;
                if growth_streak >= 5 {
                    diverged = true;
                }
            } else {
                growth_streak = 0;
            }
        }
        tol_history.push(tol);
        u = next;
        if tol < eps_j {
            converged = true;
            break;
        }
    }

    Ok(QJacobiReport {
        solution: u,
        iterations,
        tol_history,
        circuit_executions: sampler.as_ref().map_or(0, |s| s.executions()) - exec_start,
        converged,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::ShotModel;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn bench_k() -> Matrix {
        Matrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]])
    }

    #[test]
    fn decompose_bench_system() {
        let dec = decompose(&bench_k(), &[1.0, 0.0], 2.0 / 3.0).unwrap();
        assert_eq!(dec.m[(0, 1)], 0.5);
        assert_eq!(dec.m[(1, 0)], 0.5);
        assert_eq!(dec.m[(0, 0)], 0.0);
        assert_eq!(dec.c, vec![0.5, 0.0]);
        assert!((dec.row_norms[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decompose_diagonal_matrix() {
        let k = Matrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 2.0]]);
        let dec = decompose(&k, &[2.0, 1.0], 1.0).unwrap();
        assert_eq!(dec.m.max_abs(), 0.0);
        assert_eq!(dec.c, vec![0.5, 0.5]);
    }

    #[test]
    fn decompose_rejects_zero_diagonal() {
        let k = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(
            decompose(&k, &[1.0, 0.0], 1.0),
            Err(Error::ZeroDiagonal(0))
        ));
    }

    #[test]
    fn exact_mode_matches_reference_solution() {
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = solve(&bench_k(), &[1.0, 0.0], None, 2.0 / 3.0, 1e-12, 500, &mut sampler).unwrap();
        assert!(rep.converged);
        assert!((rep.solution[0] - 2.0 / 3.0).abs() < 1e-10);
        assert!((rep.solution[1] - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn exact_mode_equals_classical_iterates() {
        // with exact sampling the quantum path reproduces classical weighted
        // Jacobi at every iteration
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2usize, 3, 5, 8, 16] {
            let mut k = Matrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    k[(i, j)] = rng.gen_range(-1.0..1.0);
                }
                k[(i, i)] = d as f64 + rng.gen_range(0.0..1.0);
            }
            let f: Vector = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for it in [1usize, 3, 7, 20] {
                let mut sampler = Sampler::new(ShotModel::exact());
                let q = solve(&k, &f, None, 2.0 / 3.0, 0.0, it, &mut sampler).unwrap();
                let c = classical_jacobi_solve(&k, &f, None, 2.0 / 3.0, 0.0, it).unwrap();
                for (a, b) in q.solution.iter().zip(&c.solution) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn classical_diagonal_system_converges_in_one_iteration() {
        // the default start u0 = c is already the solution of a diagonal
        // system, so the first relative difference is zero
        let k = Matrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 2.0]]);
        let rep = classical_jacobi_solve(&k, &[2.0, 1.0], None, 1.0, 1e-12, 50).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert_eq!(rep.solution, vec![0.5, 0.5]);
    }

    #[test]
    fn growing_tolerance_raises_divergence_flag() {
        // iteration matrix with eigenvalues 0.5 and -0.999: starting near
        // the fast mode, Tol climbs monotonically from 0.5 toward 2 as the
        // slow oscillating mode takes over, tripping the streak detector
        let mu = 0.5998;
        let k = Matrix::from_rows(&[vec![1.0, mu], vec![mu, 1.0]]);
        let omega = 1.2495;
        let u0 = [1.001, -0.999];
        let rep =
            classical_jacobi_solve(&k, &[0.0, 0.0], Some(&u0), omega, 1e-12, 200).unwrap();
        assert!(rep.diverged);
        assert!(!rep.converged);
        // the flag is a warning, not a stop condition: the iteration still
        // runs to the max count
        assert_eq!(rep.iterations, 200);
    }

    #[test]
    fn zero_norm_iterate_skips_circuits() {
        // u0 = 0 and F = 0 keeps every iterate at zero with no executions
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = solve(&bench_k(), &[0.0, 0.0], Some(&[0.0, 0.0]), 2.0 / 3.0, 1e-12, 3, &mut sampler)
            .unwrap();
        assert_eq!(rep.circuit_executions, 0);
        assert_eq!(rep.solution, vec![0.0, 0.0]);
    }

    #[test]
    fn circuit_accounting_counts_nonzero_rows() {
        // both rows of the benchmark system are nonzero: 2 executions per iteration
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = solve(&bench_k(), &[1.0, 0.0], None, 2.0 / 3.0, 0.0, 4, &mut sampler).unwrap();
        assert_eq!(rep.circuit_executions, 8);

        // a diagonal system has zero-norm rows everywhere: no circuits at all
        let k = Matrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 2.0]]);
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = solve(&k, &[2.0, 1.0], Some(&[1.0, 1.0]), 1.0, 0.0, 3, &mut sampler).unwrap();
        assert_eq!(rep.circuit_executions, 0);
    }

    #[test]
    fn accuracy_improves_with_shots() {
        let u_ref = [2.0 / 3.0, 1.0 / 3.0];
        let mean_acc = |shots: u64| -> f64 {
            let mut total = 0.0;
            for rep in 0..30 {
                let mut sampler = Sampler::new(ShotModel::normal(shots, 1000 + rep));
                let r = solve(&bench_k(), &[1.0, 0.0], None, 2.0 / 3.0, 1e-4, 200, &mut sampler)
                    .unwrap();
                total += crate::densela::accuracy(&r.solution, &u_ref).unwrap();
            }
            total / 30.0
        };
        let accs: Vec<f64> = [100u64, 10_000, 1_000_000, 100_000_000]
            .iter()
            .map(|&s| mean_acc(s))
            .collect();
        for w in accs.windows(2) {
            assert!(w[1] > w[0], "accuracies not increasing: {accs:?}");
        }
    }

    #[test]
    fn odd_dimension_pads_for_encoding() {
        let k = Matrix::from_rows(&[
            vec![4.0, -1.0, 0.0],
            vec![-1.0, 4.0, -1.0],
            vec![0.0, -1.0, 4.0],
        ]);
        let f = [1.0, 2.0, 3.0];
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = solve(&k, &f, None, 2.0 / 3.0, 1e-12, 500, &mut sampler).unwrap();
        let direct = crate::densela::lu_solve(&k, &f).unwrap();
        for (a, b) in rep.solution.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
