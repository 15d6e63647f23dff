//! The N-ion electronic register.
//!
//! Basis state `|k⟩` labels the electronic configuration whose binary code is
//! `k = Σ S_i 2^(i-1)`: ion 1 is the least significant bit. The register is the
//! "meter" of the protocol: it is put into the Fourier basis, shifted by the
//! coupling, Fourier transformed back and read out.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::protocol::ReadoutDistribution;

/// Largest register the crate will allocate a state vector for.
pub const MAX_QUBITS: usize = 24;

const NORM_TOLERANCE: f64 = 1e-12;

/// Number of basis states `K + 1 = 2^N`.
pub fn dimension(n_qubits: usize) -> usize {
    1usize << n_qubits
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(invalid("register needs at least one qubit"));
    }
    if n_qubits > MAX_QUBITS {
        return Err(invalid(format!(
            "{n_qubits} qubits exceeds the supported maximum of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Encodes an ordered list of ion states (ion 1 first) into the register label `k`.
pub fn encode_bits(bits: &[u8]) -> Result<usize> {
    check_qubits(bits.len())?;
    bits.iter()
        .enumerate()
        .try_fold(0usize, |k, (i, &b)| match b {
            0 => Ok(k),
            1 => Ok(k | (1 << i)),
            other => Err(invalid(format!(
                "ion {} has non-binary state {other}",
                i + 1
            ))),
        })
}

/// Inverse of [`encode_bits`].
pub fn decode_bits(k: usize, n_qubits: usize) -> Result<Vec<u8>> {
    check_qubits(n_qubits)?;
    if k >= dimension(n_qubits) {
        return Err(invalid(format!(
            "label {k} out of range for a {n_qubits}-qubit register"
        )));
    }
    Ok((0..n_qubits).map(|i| ((k >> i) & 1) as u8).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `|l⟩ → (K+1)^{-1/2} Σ_k exp(+2πi kl/(K+1)) |k⟩`, producing the Fourier basis state `|l̄⟩`.
    Forward,
    /// Adjoint of [`Direction::Forward`].
    Inverse,
}

/// Unit-norm state vector of the electronic register.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl RegisterState {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != dimension(n_qubits) {
            return Err(invalid(format!(
                "expected {} amplitudes for {n_qubits} qubits, got {}",
                dimension(n_qubits),
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!(
                "register state has norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|k⟩`.
    pub fn basis(n_qubits: usize, k: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = dimension(n_qubits);
        if k >= dim {
            return Err(invalid(format!(
                "label {k} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Basis-state occupation probabilities `|⟨k|ψ⟩|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// State after a π/2 pulse on every ion: the uniform superposition `|0̄⟩`.
pub fn prepare_fourier_zero(n_qubits: usize) -> Result<RegisterState> {
    check_qubits(n_qubits)?;
    let dim = dimension(n_qubits);
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    Ok(RegisterState {
        n_qubits,
        amplitudes: vec![amp; dim],
    })
}

/// Register Fourier transform, unitary with prefactor `1/√(K+1)`.
pub fn qft(state: &RegisterState, direction: Direction) -> RegisterState {
    let mut amplitudes = state.amplitudes.clone();
    qft_in_place(&mut amplitudes, direction);
    RegisterState {
        n_qubits: state.n_qubits,
        amplitudes,
    }
}

/// Applies the register Fourier transform to a raw (not necessarily normalized)
/// amplitude vector whose length is the register dimension.
pub fn qft_in_place(amplitudes: &mut [Complex64], direction: Direction) {
    let mut planner = FftPlanner::new();
    qft_with_planner(&mut planner, amplitudes, direction);
}

pub(crate) fn qft_with_planner(
    planner: &mut FftPlanner<f64>,
    amplitudes: &mut [Complex64],
    direction: Direction,
) {
    let len = amplitudes.len();
    // rustfft's inverse transform carries the +i sign of the forward QFT.
    let fft = match direction {
        Direction::Forward => planner.plan_fft_inverse(len),
        Direction::Inverse => planner.plan_fft_forward(len),
    };
    fft.process(amplitudes);
    let scale = 1.0 / (len as f64).sqrt();
    for a in amplitudes.iter_mut() {
        *a *= scale;
    }
}

/// Multiplies amplitude `k` by `exp(i·phase_per_k·k)`, the action of `exp(iθΥ̂)`.
pub fn apply_upsilon_phase(state: &RegisterState, phase_per_k: f64) -> RegisterState {
    let amplitudes = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(k, a)| a * Complex64::from_polar(1.0, phase_per_k * k as f64))
        .collect();
    RegisterState {
        n_qubits: state.n_qubits,
        amplitudes,
    }
}

/// Draws `n_shots` projective readouts of the register from `dist`.
pub fn sample_readout(dist: &ReadoutDistribution, seed: u64, n_shots: usize) -> Result<Vec<usize>> {
    if n_shots == 0 {
        return Err(invalid("number of shots must be positive"));
    }
    // Truncated series may carry tiny negative ripples; they are never drawn.
    let weights = WeightedIndex::new(dist.probs().iter().map(|p| p.max(0.0)))
        .map_err(|e| invalid(format!("readout distribution cannot be sampled: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_shots).map(|_| weights.sample(&mut rng)).collect())
}

/// Fraction of shots landing on each label `0..dimension`.
pub fn histogram(shots: &[usize], dimension: usize) -> Vec<f64> {
    let mut counts = vec![0usize; dimension];
    for &l in shots {
        counts[l] += 1;
    }
    let total = shots.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}

/// `exp(2πi·j/dim)` for `j = 0..dim`, used to evaluate Fourier phases by exact index arithmetic.
pub(crate) fn roots_of_unity(dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / dim as f64))
        .collect()
}
