//! Analytic readout statistics of the register-as-meter protocol.
//!
//! For a mode with position characteristic function `χ`, result `l` of the
//! register readout occurs with probability
//!
//! ```text
//! P(l) = √(2π)/(K+1)² Σ_{k,k'} e^{−2πi(k−k')l/(K+1)} χ(r(k−k'))
//!      = √(2π)/(K+1)² Σ_{m=−K}^{K} (K+1−|m|) e^{−2πiml/(K+1)} χ(rm)
//! ```
//!
//! The second (Toeplitz-collapsed) form is folded onto `m mod (K+1)` and
//! evaluated for every `l` with a single FFT.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::register::{self, MAX_QUBITS};

/// Tolerance used when none is given.
pub const DEFAULT_EPSILON: f64 = 0.01;
/// Variance above which the readout distribution is essentially flat.
pub const MAX_RESOLVABLE_VARIANCE: f64 = 10.0;
/// Offset in `N_min ≈ 8.14 − ½ log₂ Δ`, fitted for a tolerance of 0.01.
pub const NMIN_OFFSET: f64 = 8.14;
/// Fraction of `√N/η` the position spread may reach before warning.
pub const LAMB_DICKE_MARGIN: f64 = 0.1;

const CHI_TOLERANCE: f64 = 1e-8;
const IMAG_TOLERANCE: f64 = 1e-10;
const SUM_TOLERANCE: f64 = 1e-10;
const NEGATIVE_TOLERANCE: f64 = 1e-12;

fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n_qubits: usize,
    /// Coupling strength in `U = exp(i r x̂ Υ̂)`.
    pub r: f64,
    pub epsilon: f64,
    /// Quadrature angle; the coupling measures `x̂ cos θ + 2p̂ sin θ`.
    pub theta: f64,
    /// Lamb-Dicke parameter of the centre-of-mass mode, if known.
    pub eta: Option<f64>,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            r: 1.0,
            epsilon: DEFAULT_EPSILON,
            theta: 0.0,
            eta: None,
            seed: 0,
        }
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_qubits(self.n_qubits)?;
        check_coupling(self.r)?;
        check_epsilon(self.epsilon)?;
        if !self.theta.is_finite() {
            return Err(invalid("quadrature angle must be finite"));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(invalid(format!(
                    "Lamb-Dicke parameter must be positive, got {eta}"
                )));
            }
        }
        Ok(())
    }

    /// `K = 2^N − 1`.
    pub fn max_label(&self) -> usize {
        register::dimension(self.n_qubits) - 1
    }
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(invalid(format!(
            "number of qubits must be between 1 and {MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

fn check_coupling(r: f64) -> Result<()> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid(format!(
            "coupling r must be non-negative and finite, got {r}"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!(
            "tolerance must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

fn check_variance(variance: f64) -> Result<()> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(invalid(format!(
            "variance must be positive, got {variance}"
        )));
    }
    Ok(())
}

/// Probabilities `P(l)` of the register readout, `l = 0..=K`.
///
/// Entries are non-negative except for distributions produced by a truncated
/// series (see [`readout_distribution_gaussian`]), whose entries may fall
/// below zero by at most the truncation error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutDistribution {
    probs: Vec<f64>,
}

impl ReadoutDistribution {
    /// Validates a probability vector over a register; entries down to
    /// `−1e-12` are clamped to zero.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 || !probs.len().is_power_of_two() {
            return Err(invalid(format!(
                "readout distribution length {} is not a register dimension",
                probs.len()
            )));
        }
        let mut probs = probs;
        for (l, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -NEGATIVE_TOLERANCE {
                return Err(invalid(format!("P({l}) = {p} is not a probability")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { probs })
    }

    /// Like [`ReadoutDistribution::new`], but entries down to `−allowance`
    /// are kept as they are. Used for truncated series.
    fn with_negative_allowance(probs: Vec<f64>, allowance: f64) -> Result<Self> {
        let floor = allowance + NEGATIVE_TOLERANCE;
        if let Some((l, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < -floor)
        {
            return Err(invalid(format!(
                "P({l}) = {p} is below the truncation bound"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { probs })
    }

    /// Divides by the total before validating.
    fn renormalized(mut probs: Vec<f64>) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// False only for truncated series that ripple below zero.
    pub fn is_nonnegative(&self) -> bool {
        self.probs.iter().all(|&p| p >= 0.0)
    }

    pub fn n_qubits(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn max_abs_difference(&self, other: &ReadoutDistribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Readout distribution for an arbitrary characteristic function `chi`.
pub fn readout_distribution<F>(chi: F, n_qubits: usize, r: f64) -> Result<ReadoutDistribution>
where
    F: Fn(f64) -> Complex64,
{
    check_qubits(n_qubits)?;
    check_coupling(r)?;
    let dim = register::dimension(n_qubits);

    let chi0 = chi(0.0);
    if (chi0 - Complex64::new(inv_sqrt_2pi(), 0.0)).norm() > CHI_TOLERANCE {
        return Err(invalid(format!(
            "characteristic function has χ(0) = {chi0}, expected 1/√(2π)"
        )));
    }

    // folded[j] = Σ_{m ≡ j (mod K+1)} (K+1−|m|) χ(rm)
    let mut folded = vec![Complex64::new(0.0, 0.0); dim];
    folded[0] = chi0 * dim as f64;
    for j in 1..dim {
        let ahead = chi(r * j as f64);
        let behind = chi(-r * j as f64);
        if (behind - ahead.conj()).norm() > CHI_TOLERANCE {
            return Err(invalid(format!(
                "characteristic function is not Hermitian at k = {}",
                r * j as f64
            )));
        }
        let wrapped = chi(-r * (dim - j) as f64);
        folded[j] = ahead * (dim - j) as f64 + wrapped * j as f64;
    }

    FftPlanner::new().plan_fft_forward(dim).process(&mut folded);

    let scale = (2.0 * PI).sqrt() / (dim * dim) as f64;
    let mut probs = Vec::with_capacity(dim);
    for (l, v) in folded.iter().enumerate() {
        let v = v * scale;
        if v.im.abs() > IMAG_TOLERANCE {
            return Err(invalid(format!("P({l}) has imaginary residue {}", v.im)));
        }
        probs.push(v.re);
    }
    ReadoutDistribution::renormalized(probs)
}

/// Characteristic function of a Gaussian position distribution.
pub fn gaussian_characteristic(variance: f64, mean: f64) -> impl Fn(f64) -> Complex64 {
    move |k| Complex64::from_polar((-k * k * variance / 2.0).exp() * inv_sqrt_2pi(), k * mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// Keep every `m ≤ K`.
    Exact,
    /// Drop `m` beyond [`truncation_order`] for this tolerance.
    Tolerance(f64),
}

/// Readout distribution of a zero-mean minimum-uncertainty Gaussian with
/// position variance `variance` (at `r = 1`):
///
/// `P(l) = 1/(K+1) · [1 + 2/(K+1) Σ_{m=1}^{m_max} (K+1−m) cos(2πml/(K+1)) e^{−m²Δ/2}]`.
pub fn readout_distribution_gaussian(
    variance: f64,
    n_qubits: usize,
    truncation: Truncation,
) -> Result<ReadoutDistribution> {
    check_variance(variance)?;
    check_qubits(n_qubits)?;
    let dim = register::dimension(n_qubits);
    let max_label = dim - 1;
    let m_max = match truncation {
        Truncation::Exact => max_label,
        Truncation::Tolerance(eps) => truncation_order(variance, eps)?.min(max_label),
    };

    let weights: Vec<(usize, f64)> = (1..=m_max)
        .map(|m| {
            (
                m,
                (dim - m) as f64 * (-((m * m) as f64) * variance / 2.0).exp(),
            )
        })
        .take_while(|&(_, w)| w > 0.0)
        .collect();
    let cosines: Vec<f64> = register::roots_of_unity(dim).iter().map(|z| z.re).collect();

    let inv_dim = 1.0 / dim as f64;
    let probs: Vec<f64> = (0..dim)
        .map(|l| {
            let sum: f64 = weights
                .iter()
                .map(|&(m, w)| w * cosines[(m * l) % dim])
                .sum();
            inv_dim * (1.0 + 2.0 * inv_dim * sum)
        })
        .collect();

    if m_max == max_label {
        return ReadoutDistribution::new(probs);
    }
    // A truncated cosine series ripples by up to the dropped tail and may dip
    // below zero; those entries are kept signed so moments stay unbiased.
    let tail: f64 = (m_max + 1..=max_label)
        .map(|m| (dim - m) as f64 * (-((m * m) as f64) * variance / 2.0).exp())
        .sum::<f64>()
        * 2.0
        * inv_dim
        * inv_dim;
    ReadoutDistribution::with_negative_allowance(probs, tail)
}

/// Smallest `m` with `e^{−m²Δ/2} ≤ ε`: `⌈√(2 ln(1/ε)/Δ)⌉`.
pub fn truncation_order(variance: f64, epsilon: f64) -> Result<usize> {
    check_variance(variance)?;
    check_epsilon(epsilon)?;
    let exact = (2.0 * (1.0 / epsilon).ln() / variance).sqrt();
    // Absorb rounding in ln/sqrt when the bound lands on an integer.
    Ok(((exact - 1e-9).ceil() as usize).max(1))
}

/// Readout results as points on the position axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedDistribution {
    points: Vec<MappedPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappedPoint {
    pub l: usize,
    pub x: f64,
    pub prob: f64,
}

impl MappedDistribution {
    pub fn points(&self) -> &[MappedPoint] {
        &self.points
    }

    pub fn total(&self) -> f64 {
        self.points.iter().map(|p| p.prob).sum()
    }

    /// Largest `|P(x) − P(−x)|` over points whose mirror image is also present.
    pub fn asymmetry(&self) -> f64 {
        let scale = self
            .points
            .windows(2)
            .map(|w| w[1].x - w[0].x)
            .fold(f64::INFINITY, f64::min);
        let mut worst: f64 = 0.0;
        for p in &self.points {
            let mirror = self
                .points
                .binary_search_by(|q| q.x.partial_cmp(&-p.x).expect("finite positions"))
                .ok()
                .or_else(|| {
                    self.points
                        .iter()
                        .position(|q| (q.x + p.x).abs() < 1e-9 * scale)
                });
            if let Some(i) = mirror {
                worst = worst.max((self.points[i].prob - p.prob).abs());
            }
        }
        worst
    }
}

/// Maps `l` to `x = 2πl/(r·2^N)`, reflecting `l > K/2` onto `l − (K+1)` so
/// the result is centred on zero. Output is sorted by `x`.
pub fn reflect_and_map(dist: &ReadoutDistribution) -> MappedDistribution {
    map_to_position(dist, 1.0, true)
}

pub fn map_to_position(dist: &ReadoutDistribution, r: f64, reflect: bool) -> MappedDistribution {
    let dim = dist.len();
    let step = 2.0 * PI / (r * dim as f64);
    let mut points: Vec<MappedPoint> = dist
        .probs()
        .iter()
        .enumerate()
        .map(|(l, &prob)| {
            // l > K/2  ⇔  2l > K
            let signed = if reflect && 2 * l > dim - 1 {
                l as f64 - dim as f64
            } else {
                l as f64
            };
            MappedPoint {
                l,
                x: signed * step,
                prob,
            }
        })
        .collect();
    points.sort_by(|a, b| a.x.partial_cmp(&b.x).expect("finite positions"));
    MappedDistribution { points }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

pub fn estimate_moments(mapped: &MappedDistribution) -> Moments {
    let mean: f64 = mapped.points.iter().map(|p| p.prob * p.x).sum();
    let second: f64 = mapped.points.iter().map(|p| p.prob * p.x * p.x).sum();
    Moments {
        mean,
        variance: second - mean * mean,
    }
}

/// Estimated variance of the reflected readout for each register size in `n_range`.
pub fn variance_scan(
    variance: f64,
    n_range: std::ops::RangeInclusive<usize>,
    truncation: Truncation,
) -> Result<Vec<(usize, f64)>> {
    if n_range.is_empty() {
        return Err(invalid("empty range of register sizes"));
    }
    n_range
        .map(|n| {
            let dist = readout_distribution_gaussian(variance, n, truncation)?;
            Ok((n, estimate_moments(&reflect_and_map(&dist)).variance))
        })
        .collect()
}

/// Register size needed to resolve a Gaussian of variance `variance` at tolerance 0.01.
pub fn n_min(variance: f64) -> Result<usize> {
    check_variance(variance)?;
    Ok(((NMIN_OFFSET - 0.5 * variance.log2()).round() as i64).max(1) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LambDicke {
    Pass { ratio: f64 },
    Warning { ratio: f64 },
}

impl LambDicke {
    pub fn is_pass(&self) -> bool {
        matches!(self, LambDicke::Pass { .. })
    }

    /// `√Δ · η / √N`.
    pub fn ratio(&self) -> f64 {
        match *self {
            LambDicke::Pass { ratio } | LambDicke::Warning { ratio } => ratio,
        }
    }
}

/// Checks `√Δ ≤ margin · √N/η`.
pub fn lamb_dicke_check(
    variance: f64,
    n_qubits: usize,
    eta: f64,
    margin: f64,
) -> Result<LambDicke> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(invalid(format!(
            "variance must be non-negative, got {variance}"
        )));
    }
    check_qubits(n_qubits)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid(format!(
            "Lamb-Dicke parameter must be positive, got {eta}"
        )));
    }
    if !(margin > 0.0) {
        return Err(invalid("Lamb-Dicke margin must be positive"));
    }
    let ratio = variance.sqrt() * eta / (n_qubits as f64).sqrt();
    Ok(if ratio <= margin {
        LambDicke::Pass { ratio }
    } else {
        LambDicke::Warning { ratio }
    })
}

pub fn upper_variance_limit() -> f64 {
    MAX_RESOLVABLE_VARIANCE
}

/// Whether the readout for this variance is expected to be essentially flat.
pub fn is_flat_regime(variance: f64) -> bool {
    variance >= upper_variance_limit()
}
