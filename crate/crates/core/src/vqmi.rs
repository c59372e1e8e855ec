//! Variational quantum matrix inversion.
//!
//! Recasts `K X = I` as one extended linear system `(I (x) K) vec(X) =
//! vec(I)` and hands it to the variational solver, then fixes each column
//! scale by a least-squares fit against the corresponding identity column.

use crate::densela::{self, Matrix, Vector};
use crate::error::{Error, Result};
use crate::qsim::Sampler;
use crate::vqls::{self, AnsatzConfig, OptimizerSettings, VqlsReport};

/// Extended operator `I (x) K` and right-hand side `vec(I)` with columns
/// stacked in order.
pub fn build_extended(k: &Matrix) -> Result<(Matrix, Vector)> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "matrix inversion needs a square matrix, got {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    let d = k.rows();
    let ke = Matrix::identity(d).kron(k);
    let mut ie = vec![0.0; d * d];
    for j in 0..d {
        ie[j * d + j] = 1.0;
    }
    Ok((ke, ie))
}

#[derive(Clone, Debug)]
pub struct VqmiReport {
    pub inverse: Matrix,
    pub column_scales: Vec<f64>,
    pub solver: VqlsReport,
}

pub fn invert(
    k: &Matrix,
    config: &AnsatzConfig,
    opts: &OptimizerSettings,
    sampler: &mut Sampler,
) -> Result<VqmiReport> {
    let d = k.rows();
    let (ke, ie) = build_extended(k)?;
    let solver = vqls::solve(&ke, &ie, config, opts, sampler)?;

    let mut inverse = Matrix::zeros(d, d);
    let mut column_scales = Vec::with_capacity(d);
    for j in 0..d {
        let x_j = &solver.solution[j * d..(j + 1) * d];
        let kx = k.matvec(x_j);
        let denom = densela::dot(&kx, &kx);
        if denom < 1e-280 {
            return Err(Error::ZeroCostDenominator);
        }
        // least-squares scale against the identity column: minimizes
        // |s K x_j - e_j|
        let s = kx[j] / denom;
        column_scales.push(s);
        for i in 0..d {
            inverse[(i, j)] = s * x_j[i];
        }
    }
    Ok(VqmiReport { inverse, column_scales, solver })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::ShotModel;

    fn bench_k() -> Matrix {
        Matrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]])
    }

    #[test]
    fn extended_system_examples() {
        let (ke, ie) = build_extended(&bench_k()).unwrap();
        assert_eq!(ke.rows(), 4);
        assert_eq!(ie, vec![1.0, 0.0, 0.0, 1.0]);
        // block diagonal with two copies of K
        let expect = Matrix::from_rows(&[
            vec![2.0, -1.0, 0.0, 0.0],
            vec![-1.0, 2.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0, -1.0],
            vec![0.0, 0.0, -1.0, 2.0],
        ]);
        assert!(ke.sub(&expect).max_abs() == 0.0);

        let (ki, _) = build_extended(&Matrix::identity(2)).unwrap();
        assert!(ki.sub(&Matrix::identity(4)).max_abs() == 0.0);
    }

    #[test]
    fn extended_spectrum_duplicates_k() {
        // eigenvalues of K are 1 and 3; the extended operator repeats each
        // one, checked through the characteristic polynomial at both points
        let (ke, _) = build_extended(&bench_k()).unwrap();
        for ev in [1.0, 3.0] {
            let shifted = ke.sub(&Matrix::identity(4).scaled(ev));
            assert!(densela::lu_factor(&shifted).is_err());
        }
    }

    #[test]
    fn inverts_identity() {
        let cfg = AnsatzConfig { n_qubits: 2, layers: 2 };
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = invert(
            &Matrix::identity(2),
            &cfg,
            &OptimizerSettings { seed: 2, ..Default::default() },
            &mut sampler,
        )
        .unwrap();
        assert!(rep.inverse.sub(&Matrix::identity(2)).max_abs() < 1e-2);
    }

    #[test]
    fn inverts_bench_matrix() {
        let cfg = AnsatzConfig { n_qubits: 2, layers: 2 };
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = invert(
            &bench_k(),
            &cfg,
            &OptimizerSettings { max_evals: 2000, seed: 4, ..Default::default() },
            &mut sampler,
        )
        .unwrap();
        // K^-1 = [[2, 1], [1, 2]] / 3
        let exact = Matrix::from_rows(&[vec![2.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 2.0 / 3.0]]);
        let err = rep.inverse.sub(&exact).max_abs() / exact.max_abs();
        assert!(err < 0.05, "relative error {err}");
        // the product lands near the identity
        let prod = bench_k().matmul(&rep.inverse);
        assert!(prod.sub(&Matrix::identity(2)).max_abs() < 0.1);
    }
}
