//! Dense statevector circuit emulator.
//!
//! Qubit `q` corresponds to bit `q` of the amplitude index, so the highest
//! qubit is the most significant bit. The Hadamard-test helper places the
//! ancilla on the highest qubit.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Normal};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

/// Emulated quantum register: complex amplitudes of length `2^n_qubits`.
#[derive(Clone, Debug)]
pub struct QuantumState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Circuit gates used by the ansatz and Hadamard-test circuits.
#[derive(Clone, Copy, Debug)]
pub enum Gate {
    Ry { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    H { qubit: usize },
}

impl QuantumState {
    /// `|0...0>` on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        QuantumState { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                n_qubits
            )));
        }
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitNorm(n.sqrt()));
        }
        Ok(QuantumState { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Real parts of the amplitudes (circuits built from Ry/CNOT/H keep the
    /// state real).
    pub fn real_amplitudes(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.re).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns a new state with the gate applied.
    pub fn apply_gate(&self, gate: Gate) -> Result<QuantumState> {
        let mut next = self.clone();
        next.apply_gate_mut(gate)?;
        Ok(next)
    }

    pub fn apply_gate_mut(&mut self, gate: Gate) -> Result<()> {
        let check = |q: usize| -> Result<()> {
            if q >= self.n_qubits {
                Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                })
            } else {
                Ok(())
            }
        };
        match gate {
            Gate::Ry { qubit, angle } => {
                check(qubit)?;
                let (s, c) = (angle / 2.0).sin_cos();
                self.for_pairs(qubit, |a0, a1| (c * a0 - s * a1, s * a0 + c * a1));
            }
            Gate::H { qubit } => {
                check(qubit)?;
                let inv = std::f64::consts::FRAC_1_SQRT_2;
                self.for_pairs(qubit, |a0, a1| (inv * (a0 + a1), inv * (a0 - a1)));
            }
            Gate::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::QubitOutOfRange {
                        index: target,
                        n_qubits: self.n_qubits,
                    });
                }
                let (cb, tb) = (1usize << control, 1usize << target);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
        }
        Ok(())
    }

    fn for_pairs(&mut self, qubit: usize, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) {
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                let (b0, b1) = f(a0, a1);
                self.amps[i] = b0;
                self.amps[i | bit] = b1;
            }
        }
    }

    /// Probability of measuring `qubit` in |0>.
    pub fn prob_zero(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        let bit = 1usize << qubit;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

/// Encodes `v / |v|` into `ceil(log2(len))` qubits, zero-padded.
pub fn amplitude_encode(v: &[f64]) -> Result<QuantumState> {
    let n = crate::densela::norm(v);
    if n == 0.0 || v.is_empty() {
        return Err(Error::ZeroVector);
    }
    let n_qubits = v.len().next_power_of_two().trailing_zeros() as usize;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    for (a, x) in amps.iter_mut().zip(v) {
        *a = Complex64::new(x / n, 0.0);
    }
    Ok(QuantumState { n_qubits, amps })
}

/// Exact ancilla-|0> probability of the modified Hadamard test applied to
/// `(|0>|m> + |1>|u>)/sqrt(2)`, equal to `1/2 + <m|u>/2`.
pub fn hadamard_test_p0(m_norm: &[f64], u_norm: &[f64]) -> Result<f64> {
    let d = m_norm.len();
    if d != u_norm.len() {
        return Err(Error::DimensionMismatch(format!(
            "hadamard test vectors of lengths {} and {}",
            d,
            u_norm.len()
        )));
    }
    if !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(d));
    }
    for v in [m_norm, u_norm] {
        let n = crate::densela::norm(v);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotUnitNorm(n));
        }
    }
    let n_qubits = d.trailing_zeros() as usize + 1;
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = Vec::with_capacity(2 * d);
    amps.extend(m_norm.iter().map(|x| Complex64::new(x * inv, 0.0)));
    amps.extend(u_norm.iter().map(|x| Complex64::new(x * inv, 0.0)));
    let mut state = QuantumState { n_qubits, amps };
    state.apply_gate_mut(Gate::H { qubit: n_qubits - 1 })?;
    state.prob_zero(n_qubits - 1)
}

/// How measurement probabilities are estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShotMode {
    /// No sampling; the exact probability is returned.
    Exact,
    /// `n0 / n_s` with `n0 ~ Binomial(n_s, p)`.
    Binomial,
    /// Normal approximation `N(p, p(1-p)/n_s)`, clamped to [0, 1].
    Normal,
}

#[derive(Clone, Copy, Debug)]
pub struct ShotModel {
    pub mode: ShotMode,
    pub shots: u64,
    pub seed: u64,
}

impl ShotModel {
    pub fn exact() -> Self {
        ShotModel {
            mode: ShotMode::Exact,
            shots: 1,
            seed: 0,
        }
    }

    pub fn binomial(shots: u64, seed: u64) -> Self {
        ShotModel {
            mode: ShotMode::Binomial,
            shots,
            seed,
        }
    }

    pub fn normal(shots: u64, seed: u64) -> Self {
        ShotModel {
            mode: ShotMode::Normal,
            shots,
            seed,
        }
    }
}

/// Counts circuit executions: one increment per estimated probability,
/// each standing for `n_s` shots.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExecutionCounter(u64);

impl ExecutionCounter {
    pub fn count(&self) -> u64 {
        self.0
    }

    pub fn increment(&mut self) {
        self.0 += 1;
    }
}

/// Shot-noise sampler with its own RNG stream and execution counter.
pub struct Sampler {
    model: ShotModel,
    rng: ChaCha8Rng,
    counter: ExecutionCounter,
}

impl Sampler {
    pub fn new(model: ShotModel) -> Self {
        assert!(model.shots >= 1, "shot count must be at least 1");
        Sampler {
            model,
            rng: ChaCha8Rng::seed_from_u64(model.seed),
            counter: ExecutionCounter::default(),
        }
    }

    pub fn model(&self) -> ShotModel {
        self.model
    }

    pub fn executions(&self) -> u64 {
        self.counter.count()
    }

    /// Estimates `p_exact` under the shot model; every call counts as one
    /// circuit execution.
    pub fn sample(&mut self, p_exact: f64) -> Result<f64> {
        // tolerate floating-point overshoot from upstream state algebra
        if !p_exact.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&p_exact) {
            return Err(Error::InvalidProbability(p_exact));
        }
        let p_exact = p_exact.clamp(0.0, 1.0);
        self.counter.increment();
        let p = match self.model.mode {
            ShotMode::Exact => p_exact,
            ShotMode::Binomial => {
                let bin = Binomial::new(self.model.shots, p_exact)
                    .map_err(|_| Error::InvalidProbability(p_exact))?;
                bin.sample(&mut self.rng) as f64 / self.model.shots as f64
            }
            ShotMode::Normal => {
                let sigma = (p_exact * (1.0 - p_exact) / self.model.shots as f64).sqrt();
                if sigma == 0.0 {
                    p_exact
                } else {
                    let n = Normal::new(p_exact, sigma)
                        .map_err(|_| Error::InvalidProbability(p_exact))?;
                    n.sample(&mut self.rng).clamp(0.0, 1.0)
                }
            }
        };
        Ok(p)
    }
}
