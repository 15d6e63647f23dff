//! The vibrational (centre-of-mass) mode as a sampled momentum wavefunction.
//!
//! Quadrature conventions: `x̂ = a + a†` (vacuum variance 1) and `p̂` with
//! `[x̂, p̂] = i`, so that `exp(i r x̂)|p⟩ = |p + r⟩`. A minimum-uncertainty state
//! with position variance `Δ` then has momentum variance `1/(4Δ)`.
//!
//! The momentum grid `p_j = p_min + j·dp` has a conjugate position grid
//! `x_m = (m − n/2)·dx` with `dx = 2π/(n·dp)`; the two representations are
//! related by a unitary discrete Fourier transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Axis, Error, Result};

const NORM_TOLERANCE: f64 = 1e-10;
/// Number of standard deviations a grid must hold on each side of a Gaussian.
pub const SUPPORT_SIGMAS: f64 = 8.0;
/// Grid points per standard deviation (in both representations).
pub const POINTS_PER_SIGMA: f64 = 8.0;
/// Probability mass treated as negligible when locating the support of a state.
const TAIL_MASS: f64 = 1e-14;
/// Mass allowed near the grid edges after a rotation.
const EDGE_MASS: f64 = 1e-8;
pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    p_min: f64,
    dp: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(p_min: f64, dp: f64, n_points: usize) -> Result<Self> {
        if !(dp > 0.0 && dp.is_finite()) {
            return Err(invalid(format!("grid spacing must be positive, got {dp}")));
        }
        if !p_min.is_finite() {
            return Err(invalid("grid origin must be finite"));
        }
        if n_points < MIN_GRID_POINTS {
            return Err(invalid(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self {
            p_min,
            dp,
            n_points,
        })
    }

    /// Sizes a grid for a Gaussian that will be displaced in momentum by every
    /// multiple of `shift_step` between 0 and `max_shift`.
    ///
    /// The spacing is an exact divisor of `shift_step` so that those shifts are
    /// index shifts. With `rotatable` set, widths and resolution also cover any
    /// phase-space rotation of the state (including the intermediate shears
    /// used by [`ModeState::rotate_quadrature`]).
    pub fn for_gaussian(
        spec: &GaussianSpec,
        shift_step: f64,
        max_shift: f64,
        rotatable: bool,
    ) -> Result<Self> {
        let sigma_p = spec.momentum_std();
        let sigma_x = spec.position_std();
        let (sp_fine, sx_fine, sp_wide, sx_wide, mean_p, mean_x) = if rotatable {
            let sp_wide = sigma_p + sigma_x / 2.0;
            let mp = spec.mean_p.abs() + spec.mean_x.abs() / 2.0;
            (
                sigma_p.min(sigma_x / 2.0),
                sigma_x.min(2.0 * sigma_p),
                sp_wide,
                sigma_x + 2.0 * sp_wide,
                mp,
                spec.mean_x.abs() + 2.0 * mp,
            )
        } else {
            (
                sigma_p,
                sigma_x,
                sigma_p,
                sigma_x,
                spec.mean_p,
                spec.mean_x.abs(),
            )
        };

        // Position half-period π/dp must hold the position support.
        let mut dp = (sp_fine / POINTS_PER_SIGMA).min(PI / (mean_x + SUPPORT_SIGMAS * sx_wide));
        if shift_step > 0.0 {
            dp = shift_step / (shift_step / dp).ceil();
        }

        let (lo, hi) = if rotatable {
            (
                -mean_p - SUPPORT_SIGMAS * sp_wide,
                mean_p + SUPPORT_SIGMAS * sp_wide,
            )
        } else {
            (
                mean_p - SUPPORT_SIGMAS * sp_wide,
                mean_p + SUPPORT_SIGMAS * sp_wide,
            )
        };
        let (lo, hi) = (lo + max_shift.min(0.0), hi + max_shift.max(0.0));
        let for_span = ((hi - lo) / dp).ceil() as usize + 1;
        let for_resolution = (2.0 * PI * POINTS_PER_SIGMA / (dp * sx_fine)).ceil() as usize;
        let n_points = for_span
            .max(for_resolution)
            .max(MIN_GRID_POINTS)
            .next_power_of_two();
        // Align the origin to the shift lattice so grid points sit on multiples of dp.
        let p_min = (lo / dp).floor() * dp;
        Self::new(p_min, dp, n_points)
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp
    }

    pub fn p_max(&self) -> f64 {
        self.p(self.n_points - 1)
    }

    /// Conjugate position spacing `2π/(n·dp)`.
    pub fn dx(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.dp)
    }

    pub fn x(&self, m: usize) -> f64 {
        (m as f64 - (self.n_points / 2) as f64) * self.dx()
    }

    pub fn x_min(&self) -> f64 {
        self.x(0)
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n_points - 1)
    }

    /// Momentum samples → position samples, unitary with respect to the
    /// `dp`/`dx` weighted inner products.
    pub(crate) fn to_position(
        &self,
        planner: &mut FftPlanner<f64>,
        psi_p: &[Complex64],
    ) -> Vec<Complex64> {
        let n = self.n_points;
        let mut buf: Vec<Complex64> = psi_p
            .iter()
            .enumerate()
            .map(|(j, a)| if j % 2 == 0 { *a } else { -a })
            .collect();
        planner.plan_fft_inverse(n).process(&mut buf);
        let scale = self.dp / (2.0 * PI).sqrt();
        for (m, b) in buf.iter_mut().enumerate() {
            *b *= Complex64::from_polar(scale, self.p_min * self.x(m));
        }
        buf
    }

    pub(crate) fn to_momentum(
        &self,
        planner: &mut FftPlanner<f64>,
        psi_x: &[Complex64],
    ) -> Vec<Complex64> {
        let n = self.n_points;
        let mut buf: Vec<Complex64> = psi_x
            .iter()
            .enumerate()
            .map(|(m, a)| a * Complex64::from_polar(1.0, -self.p_min * self.x(m)))
            .collect();
        planner.plan_fft_forward(n).process(&mut buf);
        let scale = self.dx() / (2.0 * PI).sqrt();
        for (j, b) in buf.iter_mut().enumerate() {
            *b *= if j % 2 == 0 { scale } else { -scale };
        }
        buf
    }

    fn momentum_coverage(&self, required_min: f64, required_max: f64) -> Error {
        Error::DomainCoverage {
            axis: Axis::Momentum,
            required_min,
            required_max,
            grid_min: self.p_min,
            grid_max: self.p_max(),
        }
    }
}

/// Minimum-uncertainty Gaussian with position variance `variance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub variance: f64,
    pub mean_x: f64,
    pub mean_p: f64,
}

impl GaussianSpec {
    pub fn new(variance: f64, mean_x: f64, mean_p: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(invalid(format!(
                "variance must be positive, got {variance}"
            )));
        }
        if !(mean_x.is_finite() && mean_p.is_finite()) {
            return Err(invalid("Gaussian means must be finite"));
        }
        Ok(Self {
            variance,
            mean_x,
            mean_p,
        })
    }

    pub fn centered(variance: f64) -> Result<Self> {
        Self::new(variance, 0.0, 0.0)
    }

    pub fn position_std(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn momentum_std(&self) -> f64 {
        0.5 / self.variance.sqrt()
    }
}

/// Normalized momentum-space wavefunction on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    grid: Grid,
    psi_p: Vec<Complex64>,
}

pub fn gaussian_state(spec: &GaussianSpec, grid: &Grid) -> Result<ModeState> {
    let sigma_p = spec.momentum_std();
    let sigma_x = spec.position_std();
    let (need_lo, need_hi) = (
        spec.mean_p - SUPPORT_SIGMAS * sigma_p,
        spec.mean_p + SUPPORT_SIGMAS * sigma_p,
    );
    if need_lo < grid.p_min() || need_hi > grid.p_max() {
        return Err(grid.momentum_coverage(need_lo, need_hi));
    }
    let (x_lo, x_hi) = (
        spec.mean_x - SUPPORT_SIGMAS * sigma_x,
        spec.mean_x + SUPPORT_SIGMAS * sigma_x,
    );
    if x_lo < grid.x_min() || x_hi > grid.x_max() {
        return Err(Error::DomainCoverage {
            axis: Axis::Position,
            required_min: x_lo,
            required_max: x_hi,
            grid_min: grid.x_min(),
            grid_max: grid.x_max(),
        });
    }
    let amp = (2.0 * PI * sigma_p * sigma_p).powf(-0.25);
    let psi_p = (0..grid.n_points())
        .map(|j| {
            let p = grid.p(j);
            let d = p - spec.mean_p;
            Complex64::from_polar(
                amp * (-d * d / (4.0 * sigma_p * sigma_p)).exp(),
                -p * spec.mean_x,
            )
        })
        .collect();
    Ok(ModeState { grid: *grid, psi_p })
}

impl ModeState {
    pub fn new(grid: Grid, psi_p: Vec<Complex64>) -> Result<Self> {
        if psi_p.len() != grid.n_points() {
            return Err(invalid(format!(
                "wavefunction has {} samples, grid has {}",
                psi_p.len(),
                grid.n_points()
            )));
        }
        let norm = weighted_norm_sqr(&psi_p, grid.dp());
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!("mode state has norm {norm}, expected 1")));
        }
        Ok(Self { grid, psi_p })
    }

    /// Normalizes `psi_p`; fails on a vanishing vector.
    pub fn normalized(grid: Grid, mut psi_p: Vec<Complex64>) -> Result<Self> {
        let norm = weighted_norm_sqr(&psi_p, grid.dp()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("cannot normalize a zero wavefunction"));
        }
        psi_p.iter_mut().for_each(|a| *a /= norm);
        Self::new(grid, psi_p)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi_p(&self) -> &[Complex64] {
        &self.psi_p
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.psi_p
    }

    pub fn norm_sqr(&self) -> f64 {
        weighted_norm_sqr(&self.psi_p, self.grid.dp())
    }

    pub fn momentum_density(&self) -> Vec<f64> {
        self.psi_p.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_momentum(&self) -> f64 {
        let dp = self.grid.dp();
        self.psi_p
            .iter()
            .enumerate()
            .map(|(j, a)| self.grid.p(j) * a.norm_sqr() * dp)
            .sum()
    }

    pub fn momentum_variance(&self) -> f64 {
        let mean = self.mean_momentum();
        let dp = self.grid.dp();
        self.psi_p
            .iter()
            .enumerate()
            .map(|(j, a)| (self.grid.p(j) - mean).powi(2) * a.norm_sqr() * dp)
            .sum()
    }

    /// Wavefunction on the conjugate position grid.
    pub fn position_amplitudes(&self) -> Vec<Complex64> {
        self.grid.to_position(&mut FftPlanner::new(), &self.psi_p)
    }

    pub fn position_distribution(&self) -> PositionDistribution {
        let density = self
            .position_amplitudes()
            .iter()
            .map(|a| a.norm_sqr())
            .collect();
        PositionDistribution {
            x_min: self.grid.x_min(),
            dx: self.grid.dx(),
            density,
        }
    }

    /// `χ(k) = (2π)^{-1/2} ∫ e^{ikx} P(x) dx`, by quadrature on the position grid.
    /// Use [`PositionDistribution::characteristic`] to evaluate many `k`.
    pub fn characteristic_function(&self, k: f64) -> Complex64 {
        self.position_distribution().characteristic(k)
    }

    /// `(2π)^{-1/2} ∫ φ*(p) φ(p − lag·dp) dp`, i.e. `χ(lag·dp)` evaluated
    /// directly from momentum samples without passing through position space.
    pub fn momentum_autocorrelation(&self, lag: isize) -> Complex64 {
        let n = self.psi_p.len() as isize;
        let sum: Complex64 = (0..n)
            .filter_map(|j| {
                let src = j - lag;
                (0..n)
                    .contains(&src)
                    .then(|| self.psi_p[j as usize].conj() * self.psi_p[src as usize])
            })
            .sum();
        sum * self.grid.dp() / (2.0 * PI).sqrt()
    }

    /// Inner product `∫ φ₁*(p) φ₂(p) dp`; both states must share a grid.
    pub fn overlap(&self, other: &ModeState) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(invalid("states live on different grids"));
        }
        Ok(self
            .psi_p
            .iter()
            .zip(&other.psi_p)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dp())
    }

    /// `φ'(p) = φ(p − s)`.
    pub fn shift_momentum(&self, s: f64) -> Result<ModeState> {
        let psi_p = shift_amplitudes(&self.grid, &self.psi_p, s)?;
        Ok(ModeState {
            grid: self.grid,
            psi_p,
        })
    }

    /// Applies `exp(−iθ a†a)`, after which measuring `x̂` measures the rotated
    /// quadrature `x̂ cos θ + 2p̂ sin θ` of the original state.
    ///
    /// Each step of at most π/2 is the exact factorization
    /// `exp(−iφH) = e^{−i tan(φ/2) x̂²/4} e^{−i sin φ p̂²} e^{−i tan(φ/2) x̂²/4}`
    /// (up to a global phase) of the oscillator `H = p̂² + x̂²/4`.
    pub fn rotate_quadrature(&self, theta: f64) -> Result<ModeState> {
        if !theta.is_finite() {
            return Err(invalid("rotation angle must be finite"));
        }
        let reduced = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
        if reduced == 0.0 {
            return Ok(self.clone());
        }
        let steps = (reduced.abs() / (PI / 2.0)).ceil().max(1.0) as usize;
        let phi = reduced / steps as f64;
        let shear_x = (phi / 2.0).tan() / 4.0;
        let shear_p = phi.sin();

        let grid = self.grid;
        let mut planner = FftPlanner::new();
        let x_chirp: Vec<Complex64> = (0..grid.n_points())
            .map(|m| Complex64::from_polar(1.0, -shear_x * grid.x(m).powi(2)))
            .collect();
        let p_chirp: Vec<Complex64> = (0..grid.n_points())
            .map(|j| Complex64::from_polar(1.0, -shear_p * grid.p(j).powi(2)))
            .collect();

        let mut psi_x = grid.to_position(&mut planner, &self.psi_p);
        for _ in 0..steps {
            multiply(&mut psi_x, &x_chirp);
            let mut psi_p = grid.to_momentum(&mut planner, &psi_x);
            multiply(&mut psi_p, &p_chirp);
            psi_x = grid.to_position(&mut planner, &psi_p);
            multiply(&mut psi_x, &x_chirp);
        }
        let psi_p = grid.to_momentum(&mut planner, &psi_x);

        check_edges(&grid, &psi_p, &psi_x)?;
        Ok(ModeState { grid, psi_p })
    }
}

fn multiply(values: &mut [Complex64], factors: &[Complex64]) {
    values.iter_mut().zip(factors).for_each(|(v, f)| *v *= f);
}

fn weighted_norm_sqr(values: &[Complex64], weight: f64) -> f64 {
    values.iter().map(|a| a.norm_sqr()).sum::<f64>() * weight
}

/// Rejects states with appreciable mass near the edges of either representation,
/// the signature of wrap-around on the periodic grid.
fn check_edges(grid: &Grid, psi_p: &[Complex64], psi_x: &[Complex64]) -> Result<()> {
    let band = (grid.n_points() / 64).max(1);
    let edge = |v: &[Complex64], w: f64| -> f64 {
        let n = v.len();
        v[..band]
            .iter()
            .chain(&v[n - band..])
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            * w
    };
    if edge(psi_p, grid.dp()) > EDGE_MASS {
        let (lo, hi) = support(psi_p, grid.dp());
        return Err(grid.momentum_coverage(grid.p(lo), grid.p(hi)));
    }
    if edge(psi_x, grid.dx()) > EDGE_MASS {
        let (lo, hi) = support(psi_x, grid.dx());
        return Err(Error::DomainCoverage {
            axis: Axis::Position,
            required_min: grid.x(lo),
            required_max: grid.x(hi),
            grid_min: grid.x_min(),
            grid_max: grid.x_max(),
        });
    }
    Ok(())
}

/// Index range holding all but a negligible fraction of the mass.
fn support(values: &[Complex64], weight: f64) -> (usize, usize) {
    let total: f64 = weighted_norm_sqr(values, weight);
    let cut = TAIL_MASS * total;
    let mut acc = 0.0;
    let lo = values
        .iter()
        .position(|a| {
            acc += a.norm_sqr() * weight;
            acc > cut
        })
        .unwrap_or(0);
    acc = 0.0;
    let hi = values.len()
        - 1
        - values
            .iter()
            .rev()
            .position(|a| {
                acc += a.norm_sqr() * weight;
                acc > cut
            })
            .unwrap_or(0);
    (lo, hi.max(lo))
}

/// Shifts raw (possibly unnormalized) momentum samples by `s`: exact index
/// shift when `s` is a multiple of `dp`, band-limited interpolation otherwise.
pub fn shift_amplitudes(grid: &Grid, psi_p: &[Complex64], s: f64) -> Result<Vec<Complex64>> {
    if !s.is_finite() {
        return Err(invalid("momentum shift must be finite"));
    }
    if s == 0.0 {
        return Ok(psi_p.to_vec());
    }
    let (lo, hi) = support(psi_p, grid.dp());
    let (need_lo, need_hi) = (grid.p(lo) + s, grid.p(hi) + s);
    if need_lo < grid.p_min() - 1e-9 * grid.dp() || need_hi > grid.p_max() + 1e-9 * grid.dp() {
        return Err(grid.momentum_coverage(need_lo, need_hi));
    }

    let steps = s / grid.dp();
    let rounded = steps.round();
    if (steps - rounded).abs() < 1e-9 {
        let offset = rounded as isize;
        let n = psi_p.len() as isize;
        return Ok((0..n)
            .map(|j| {
                let src = j - offset;
                if (0..n).contains(&src) {
                    psi_p[src as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect());
    }

    let mut planner = FftPlanner::new();
    let mut psi_x = grid.to_position(&mut planner, psi_p);
    for (m, a) in psi_x.iter_mut().enumerate() {
        *a *= Complex64::from_polar(1.0, s * grid.x(m));
    }
    Ok(grid.to_momentum(&mut planner, &psi_x))
}

/// Position probability density sampled on `x_m = x_min + m·dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDistribution {
    x_min: f64,
    dx: f64,
    density: Vec<f64>,
}

impl PositionDistribution {
    pub fn x(&self, m: usize) -> f64 {
        self.x_min + m as f64 * self.dx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.density
            .iter()
            .enumerate()
            .map(|(m, &p)| (self.x(m), p))
    }

    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.dx
    }

    pub fn mean(&self) -> f64 {
        self.points().map(|(x, p)| x * p).sum::<f64>() * self.dx
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.points()
            .map(|(x, p)| (x - mean).powi(2) * p)
            .sum::<f64>()
            * self.dx
    }

    /// Location of the largest sample.
    pub fn peak(&self) -> f64 {
        let (m, _) = self
            .density
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |best, (m, &p)| if p > best.1 { (m, p) } else { best },
            );
        self.x(m)
    }

    pub fn characteristic(&self, k: f64) -> Complex64 {
        let sum: Complex64 = self
            .points()
            .map(|(x, p)| Complex64::from_polar(p, k * x))
            .sum();
        sum * self.dx / (2.0 * PI).sqrt()
    }
}
