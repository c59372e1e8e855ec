//! Variational quantum linear solver.
//!
//! Hardware-efficient Ry/CNOT ansatz, local cost with a Householder
//! encoding of the right-hand side, a derivative-free simplex optimizer,
//! and least-squares scale recovery.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::densela::{self, Matrix, Vector};
use crate::error::{Error, Result};
use crate::qsim::{Gate, QuantumState, Sampler};

/// Linear combination of Pauli words reconstructing a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct PauliDecomposition {
    /// `(coefficient, word)` with the leftmost character acting on the
    /// highest qubit.
    pub terms: Vec<(f64, String)>,
}

const PAULIS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Projects `K` onto the n-fold Pauli basis: `c_P = trace(P K) / 2^n`.
pub fn pauli_decompose(k: &Matrix) -> Result<PauliDecomposition> {
    let d = k.rows();
    if !k.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "pauli_decompose needs a square matrix, got {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    if !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(d));
    }
    let n_qubits = d.trailing_zeros() as usize;
    let mut terms = Vec::new();
    for word_id in 0..4usize.pow(n_qubits as u32) {
        let word: Vec<char> = (0..n_qubits)
            .rev()
            .map(|q| PAULIS[(word_id >> (2 * q)) & 3])
            .collect();
        let mut trace_re = 0.0;
        let mut trace_im = 0.0;
        for col in 0..d {
            let (row, phase_re, phase_im) = pauli_column(&word, col);
            let v = k[(row, col)];
            trace_re += phase_re * v;
            trace_im += phase_im * v;
        }
        let c = trace_re / d as f64;
        // odd-Y words pick up an imaginary trace and vanish for symmetric K
        if c.abs() > 1e-12 && trace_im.abs() < 1e-9 {
            terms.push((c, word.into_iter().collect()));
        }
    }
    Ok(PauliDecomposition { terms })
}

/// Action of the Pauli word on basis state `col`: returns the target row
/// and the (real, imaginary) phase.
fn pauli_column(word: &[char], col: usize) -> (usize, f64, f64) {
    let n = word.len();
    let mut row = col;
    let mut re = 1.0f64;
    let mut im = 0.0f64;
    for (pos, &p) in word.iter().enumerate() {
        let q = n - 1 - pos; // leftmost char acts on the highest qubit
        let bit = (col >> q) & 1;
        match p {
            'I' => {}
            'X' => row ^= 1 << q,
            'Y' => {
                row ^= 1 << q;
                // Y|0> = i|1>, Y|1> = -i|0>
                let sign = if bit == 0 { 1.0 } else { -1.0 };
                let (nre, nim) = (-sign * im, sign * re);
                re = nre;
                im = nim;
            }
            'Z' => {
                if bit == 1 {
                    re = -re;
                    im = -im;
                }
            }
            _ => unreachable!(),
        }
    }
    (row, re, im)
}

impl PauliDecomposition {
    /// Rebuilds the matrix from the stored terms.
    pub fn reconstruct(&self, dim: usize) -> Matrix {
        let n_qubits = dim.trailing_zeros() as usize;
        let mut m = Matrix::zeros(dim, dim);
        for (c, word) in &self.terms {
            let chars: Vec<char> = word.chars().collect();
            assert_eq!(chars.len(), n_qubits);
            for col in 0..dim {
                let (row, re, _im) = pauli_column(&chars, col);
                m[(row, col)] += c * re;
            }
        }
        m
    }
}

/// Layered hardware-efficient ansatz: an Ry layer, then per layer a CNOT
/// entangler chain followed by another Ry layer.
#[derive(Clone, Copy, Debug)]
pub struct AnsatzConfig {
    pub n_qubits: usize,
    pub layers: usize,
}

impl AnsatzConfig {
    pub fn parameter_count(&self) -> usize {
        self.n_qubits * (self.layers + 1)
    }
}

pub fn ansatz_state(config: &AnsatzConfig, theta: &[f64]) -> Result<QuantumState> {
    if theta.len() != config.parameter_count() {
        return Err(Error::ParameterCount {
            got: theta.len(),
            want: config.parameter_count(),
        });
    }
    let n = config.n_qubits;
    let mut state = QuantumState::zero(n);
    let mut next = 0usize;
    for q in 0..n {
        state.apply_gate_mut(Gate::Ry { qubit: q, angle: theta[next] })?;
        next += 1;
    }
    for _ in 0..config.layers {
        for q in 0..n.saturating_sub(1) {
            state.apply_gate_mut(Gate::Cnot { control: q, target: q + 1 })?;
        }
        for q in 0..n {
            state.apply_gate_mut(Gate::Ry { qubit: q, angle: theta[next] })?;
            next += 1;
        }
    }
    Ok(state)
}

/// Householder reflection with `U |0> = |F>`; real, orthogonal, symmetric.
pub fn encoding_unitary(f_norm: &[f64]) -> Matrix {
    let d = f_norm.len();
    let mut v: Vector = f_norm.to_vec();
    v[0] -= 1.0; // e0 - f, negated; the sign cancels in v v^T
    let vtv = densela::dot(&v, &v);
    let mut u = Matrix::identity(d);
    if vtv > 1e-28 {
        for i in 0..d {
            for j in 0..d {
                u[(i, j)] -= 2.0 * v[i] * v[j] / vtv;
            }
        }
    }
    u
}

/// Precomputed operators for cost evaluation.
pub struct CostContext {
    k: Matrix,
    u_encode: Matrix,
    n_qubits: usize,
}

impl CostContext {
    pub fn new(k: &Matrix, f: &[f64]) -> Result<Self> {
        let nf = densela::norm(f);
        if nf == 0.0 {
            return Err(Error::ZeroVector);
        }
        let d = k.rows();
        if !d.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(d));
        }
        if d != f.len() {
            return Err(Error::DimensionMismatch(format!(
                "cost: {}x{} matrix, rhs length {}",
                k.rows(),
                k.cols(),
                f.len()
            )));
        }
        let f_norm = densela::scaled(f, 1.0 / nf);
        Ok(CostContext {
            k: k.clone(),
            u_encode: encoding_unitary(&f_norm),
            n_qubits: d.trailing_zeros() as usize,
        })
    }

    /// Local VQLS cost `C(theta) = <u|H_L|u> / <u|K'K|u>`, in [0, 1].
    pub fn cost(&self, config: &AnsatzConfig, theta: &[f64]) -> Result<f64> {
        let state = ansatz_state(config, theta)?;
        let u = state.real_amplitudes();
        let v = self.k.matvec(&u);
        let denom = densela::dot(&v, &v);
        if denom < 1e-280 {
            return Err(Error::ZeroCostDenominator);
        }
        let w = self.u_encode.matvec(&v); // symmetric: U^T = U
        let mut proj = 0.0;
        for q in 0..self.n_qubits {
            let bit = 1usize << q;
            proj += w
                .iter()
                .enumerate()
                .filter(|(i, _)| i & bit == 0)
                .map(|(_, x)| x * x)
                .sum::<f64>();
        }
        let c = 1.0 - proj / (self.n_qubits as f64 * denom);
        Ok(c.clamp(0.0, 1.0))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizerSettings {
    pub max_evals: usize,
    pub cost_tol: f64,
    pub seed: u64,
    pub simplex_step: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            max_evals: 500,
            cost_tol: 1e-6,
            seed: 0,
            simplex_step: 0.8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VqlsReport {
    /// Rescaled solution in the original (unpadded) dimension.
    pub solution: Vector,
    pub theta_opt: Vector,
    pub cost_history: Vec<f64>,
    pub circuit_executions: u64,
    pub scale: f64,
    pub converged: bool,
}

/// Pads a system to the next power of two with identity rows and a zero
/// right-hand side.
pub fn pad_system(k: &Matrix, f: &[f64]) -> (Matrix, Vector) {
    let d = k.rows();
    let p = d.next_power_of_two();
    if p == d {
        return (k.clone(), f.to_vec());
    }
    let mut kp = Matrix::identity(p);
    for i in 0..d {
        for j in 0..d {
            kp[(i, j)] = k[(i, j)];
        }
    }
    let mut fp = vec![0.0; p];
    fp[..d].copy_from_slice(f);
    (kp, fp)
}

pub fn solve(
    k: &Matrix,
    f: &[f64],
    config: &AnsatzConfig,
    opts: &OptimizerSettings,
    sampler: &mut Sampler,
) -> Result<VqlsReport> {
    solve_observed(k, f, config, opts, sampler, &mut |_, _, _| {})
}

/// As `solve`, invoking `observer(eval_index, theta, cost)` after every cost
/// evaluation.
pub fn solve_observed(
    k: &Matrix,
    f: &[f64],
    config: &AnsatzConfig,
    opts: &OptimizerSettings,
    sampler: &mut Sampler,
    observer: &mut dyn FnMut(usize, &[f64], f64),
) -> Result<VqlsReport> {
    let (kp, fp) = pad_system(k, f);
    if kp.rows() != 1 << config.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "ansatz on {} qubits for a padded dimension of {}",
            config.n_qubits,
            kp.rows()
        )));
    }
    let ctx = CostContext::new(&kp, &fp)?;
    let exec_start = sampler.executions();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n_params = config.parameter_count();

    let best_cost = std::cell::Cell::new(f64::INFINITY);
    let mut history = Vec::new();
    let mut best_theta: Option<Vector> = None;
    let mut err: Option<Error> = None;

    {
        let best_cost = &best_cost;
        let mut objective = |theta: &[f64]| -> f64 {
            match ctx.cost(config, theta).and_then(|c| sampler.sample(c)) {
                Ok(c) => {
                    history.push(c);
                    observer(history.len() - 1, theta, c);
                    if c < best_cost.get() {
                        best_cost.set(c);
                        best_theta = Some(theta.to_vec());
                    }
                    c
                }
                Err(e) => {
                    if err.is_none() {
                        err = Some(e);
                    }
                    f64::INFINITY
                }
            }
        };

        // restart the simplex from a fresh random point until the budget is
        // spent or the cost target is reached
        let mut evals_used = 0usize;
        while evals_used < opts.max_evals && best_cost.get() > opts.cost_tol {
            let x0: Vector = (0..n_params)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            let budget = opts.max_evals - evals_used;
            let used = nelder_mead(
                &mut objective,
                &x0,
                opts.simplex_step,
                budget,
                opts.cost_tol,
            );
            evals_used += used;
        }
    }

    if let Some(e) = err {
        return Err(e);
    }
    let theta = best_theta.expect("at least one cost evaluation");
    let state = ansatz_state(config, &theta)?;
    let u = state.real_amplitudes();
    let ku = kp.matvec(&u);
    // signed least-squares fit; the ansatz state carries a sign ambiguity
    let scale = densela::dot(&ku, &fp) / densela::dot(&ku, &ku);
    let solution = densela::scaled(&u[..k.rows()], scale);

    Ok(VqlsReport {
        solution,
        theta_opt: theta,
        cost_history: history,
        circuit_executions: sampler.executions() - exec_start,
        scale,
        converged: best_cost.get() <= opts.cost_tol,
    })
}

/// One Nelder-Mead run; returns the number of evaluations consumed.
fn nelder_mead(
    objective: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    f_tol: f64,
) -> usize {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        objective(x)
    };

    let mut simplex: Vec<(Vector, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..n {
        if evals >= max_evals {
            return evals;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= f_tol {
            break;
        }
        let spread = simplex[n].1 - simplex[0].1;
        let size: f64 = (0..n)
            .map(|i| (simplex[n].0[i] - simplex[0].0[i]).abs())
            .fold(0.0, f64::max);
        if spread < 1e-12 && size < 1e-8 {
            break; // collapsed; caller may restart
        }

        let centroid: Vector = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vector = (0..n)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        let fr = eval(&reflect, &mut evals);

        if fr < simplex[0].1 {
            // try expansion
            if evals >= max_evals {
                simplex[n] = (reflect, fr);
                break;
            }
            let expand: Vector = (0..n)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let fe = eval(&expand, &mut evals);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            if evals >= max_evals {
                break;
            }
            let contract: Vector = (0..n)
                .map(|i| centroid[i] + 0.5 * (worst.0[i] - centroid[i]))
                .collect();
            let fc = eval(&contract, &mut evals);
            if fc < worst.1 {
                simplex[n] = (contract, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    if evals >= max_evals {
                        return evals;
                    }
                    for i in 0..n {
                        v.0[i] = best[i] + 0.5 * (v.0[i] - best[i]);
                    }
                    v.1 = eval(&v.0, &mut evals);
                }
            }
        }
    }
    evals
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::ShotModel;
    use rand_chacha::ChaCha8Rng;

    fn bench_k() -> Matrix {
        Matrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]])
    }

    #[test]
    fn pauli_decompose_examples() {
        let dec = pauli_decompose(&bench_k()).unwrap();
        let mut terms = dec.terms.clone();
        terms.sort_by(|a, b| a.1.cmp(&b.1));
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0].1, "I");
        assert!((terms[0].0 - 2.0).abs() < 1e-14);
        assert_eq!(terms[1].1, "X");
        assert!((terms[1].0 + 1.0).abs() < 1e-14);

        let dec = pauli_decompose(&Matrix::identity(4)).unwrap();
        assert_eq!(dec.terms.len(), 1);
        assert_eq!(dec.terms[0].1, "II");
        assert!((dec.terms[0].0 - 1.0).abs() < 1e-14);

        let z = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let dec = pauli_decompose(&z).unwrap();
        assert_eq!(dec.terms.len(), 1);
        assert_eq!(dec.terms[0].1, "Z");
    }

    #[test]
    fn pauli_reconstruction_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in [2usize, 4, 8] {
            for _ in 0..5 {
                let mut k = Matrix::zeros(d, d);
                for i in 0..d {
                    for j in 0..=i {
                        let v = rng.gen_range(-2.0..2.0);
                        k[(i, j)] = v;
                        k[(j, i)] = v;
                    }
                }
                let rec = pauli_decompose(&k).unwrap().reconstruct(d);
                assert!(rec.sub(&k).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ansatz_examples() {
        let cfg = AnsatzConfig { n_qubits: 3, layers: 2 };
        let zeros = vec![0.0; cfg.parameter_count()];
        let s = ansatz_state(&cfg, &zeros).unwrap();
        let a = s.real_amplitudes();
        assert!((a[0] - 1.0).abs() < 1e-14);
        assert!(a[1..].iter().all(|x| x.abs() < 1e-14));

        let cfg = AnsatzConfig { n_qubits: 1, layers: 0 };
        let s = ansatz_state(&cfg, &[std::f64::consts::FRAC_PI_2]).unwrap();
        let a = s.real_amplitudes();
        let c = (std::f64::consts::FRAC_PI_4).cos();
        assert!((a[0] - c).abs() < 1e-14 && (a[1] - c).abs() < 1e-14);

        let cfg = AnsatzConfig { n_qubits: 2, layers: 1 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let theta: Vec<f64> = (0..cfg.parameter_count()).map(|_| rng.gen_range(0.0..6.28)).collect();
        let s = ansatz_state(&cfg, &theta).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);

        assert!(matches!(
            ansatz_state(&cfg, &[0.0]),
            Err(Error::ParameterCount { .. })
        ));
    }

    #[test]
    fn encoding_unitary_maps_zero_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [2usize, 4, 8] {
            let f: Vector = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = densela::scaled(&f, 1.0 / densela::norm(&f));
            let u = encoding_unitary(&f);
            // orthogonal
            let id = u.matmul(&u.transpose());
            assert!(id.sub(&Matrix::identity(d)).max_abs() < 1e-12);
            // first column is f
            let mut e0 = vec![0.0; d];
            e0[0] = 1.0;
            let col = u.matvec(&e0);
            for (a, b) in col.iter().zip(&f) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cost_examples() {
        // K = I, F = e0, theta = 0: the ansatz state is already |F>
        let cfg = AnsatzConfig { n_qubits: 2, layers: 1 };
        let ctx = CostContext::new(&Matrix::identity(4), &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let c = ctx.cost(&cfg, &vec![0.0; cfg.parameter_count()]).unwrap();
        assert!(c < 1e-14);

        // planted solution: pick theta, set F = K u(theta); the cost vanishes
        let cfg = AnsatzConfig { n_qubits: 1, layers: 0 };
        let theta = [1.1];
        let u = ansatz_state(&cfg, &theta).unwrap().real_amplitudes();
        let f = bench_k().matvec(&u);
        let ctx = CostContext::new(&bench_k(), &f).unwrap();
        assert!(ctx.cost(&cfg, &theta).unwrap() < 1e-12);
    }

    #[test]
    fn cost_is_bounded() {
        let cfg = AnsatzConfig { n_qubits: 1, layers: 0 };
        let ctx = CostContext::new(&bench_k(), &[1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let theta = [rng.gen_range(0.0..std::f64::consts::TAU)];
            let c = ctx.cost(&cfg, &theta).unwrap();
            assert!((0.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn cost_zero_implies_proportional_solution() {
        let cfg = AnsatzConfig { n_qubits: 1, layers: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let theta = [rng.gen_range(0.0..std::f64::consts::TAU)];
            let u = ansatz_state(&cfg, &theta).unwrap().real_amplitudes();
            let f = bench_k().matvec(&u);
            if densela::norm(&f) < 1e-6 {
                continue;
            }
            let ctx = CostContext::new(&bench_k(), &f).unwrap();
            let c = ctx.cost(&cfg, &theta).unwrap();
            assert!(c < 1e-10);
            let ku = bench_k().matvec(&u);
            let cos = densela::dot(&ku, &f) / (densela::norm(&ku) * densela::norm(&f));
            assert!(cos > 1.0 - 1e-8);
        }
    }

    #[test]
    fn solve_identity_recovers_rhs() {
        let cfg = AnsatzConfig { n_qubits: 2, layers: 1 };
        let f = [0.4, -0.2, 0.1, 0.7];
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = solve(
            &Matrix::identity(4),
            &f,
            &cfg,
            &OptimizerSettings { seed: 5, ..Default::default() },
            &mut sampler,
        )
        .unwrap();
        for (a, b) in rep.solution.iter().zip(&f) {
            assert!((a - b).abs() < 1e-3, "{:?}", rep.solution);
        }
        // scale recovers the physical magnitude
        let s = ansatz_state(&cfg, &rep.theta_opt).unwrap().real_amplitudes();
        assert!((rep.scale.abs() - densela::norm(&f)).abs() < 1e-3 * densela::norm(&f) + 1e-6);
        assert!((densela::norm(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_is_least_squares_optimal() {
        let cfg = AnsatzConfig { n_qubits: 1, layers: 0 };
        let f = [1.0, 0.4];
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = solve(
            &bench_k(),
            &f,
            &cfg,
            &OptimizerSettings { max_evals: 40, cost_tol: 1e-12, seed: 3, ..Default::default() },
            &mut sampler,
        )
        .unwrap();
        let u = ansatz_state(&cfg, &rep.theta_opt).unwrap().real_amplitudes();
        let misfit = |s: f64| {
            let r = densela::sub(&f, &densela::scaled(&bench_k().matvec(&u), s));
            densela::norm(&r)
        };
        let r0 = misfit(rep.scale);
        if r0 > 1e-12 {
            assert!(misfit(rep.scale * 1.01) > r0);
            assert!(misfit(rep.scale * 0.99) > r0);
        }
    }

    #[test]
    fn exact_mode_solve_is_deterministic() {
        let cfg = AnsatzConfig { n_qubits: 1, layers: 0 };
        let run = || {
            let mut sampler = Sampler::new(ShotModel::exact());
            solve(
                &bench_k(),
                &[1.0, 0.0],
                &cfg,
                &OptimizerSettings { seed: 11, ..Default::default() },
                &mut sampler,
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.cost_history, b.cost_history);
        assert_eq!(a.circuit_executions, b.circuit_executions);
    }

    #[test]
    fn execution_counter_charges_one_per_evaluation() {
        let cfg = AnsatzConfig { n_qubits: 1, layers: 0 };
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = solve(
            &bench_k(),
            &[1.0, 0.0],
            &cfg,
            &OptimizerSettings { seed: 1, ..Default::default() },
            &mut sampler,
        )
        .unwrap();
        assert_eq!(rep.circuit_executions as usize, rep.cost_history.len());
    }

    #[test]
    fn padded_solve_strips_padding() {
        // 3x3 system padded to 4; the padded component must not leak out
        let k = Matrix::from_rows(&[
            vec![3.0, -1.0, 0.0],
            vec![-1.0, 3.0, -1.0],
            vec![0.0, -1.0, 3.0],
        ]);
        let f = [1.0, 0.5, -0.2];
        let cfg = AnsatzConfig { n_qubits: 2, layers: 2 };
        let mut sampler = Sampler::new(ShotModel::exact());
        let rep = solve(
            &k,
            &f,
            &cfg,
            &OptimizerSettings { max_evals: 2000, cost_tol: 1e-10, seed: 7, ..Default::default() },
            &mut sampler,
        )
        .unwrap();
        assert_eq!(rep.solution.len(), 3);
        let direct = densela::lu_solve(&k, &f).unwrap();
        let acc = densela::accuracy(&rep.solution, &direct).unwrap();
        assert!(acc > 99.0, "accuracy {acc}, solution {:?}", rep.solution);
    }
}
