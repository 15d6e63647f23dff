//! Brute-force simulation of the joint register ⊗ mode state.
//!
//! The joint state is stored as one momentum wavefunction per register basis
//! label. Preparation, coupling and the inverse register transform are applied
//! literally, so the readout probabilities obtained here are an independent
//! check on the analytic formulas in [`crate::protocol`].

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::cvmode::{self, GaussianSpec, Grid, ModeState};
use crate::error::{invalid, Error, Result};
use crate::protocol::{self, ProtocolConfig, ReadoutDistribution};
use crate::register::{self, Direction};

/// Branches with less weight than this are reported as empty.
const EMPTY_BRANCH: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_qubits: usize,
    pub max_grid_points: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_qubits: 8,
            max_grid_points: 1 << 14,
        }
    }
}

impl OracleLimits {
    /// No qubit cap beyond what the register supports.
    pub fn unbounded() -> Self {
        Self {
            max_qubits: register::MAX_QUBITS,
            max_grid_points: usize::MAX,
        }
    }

    fn check(&self, n_qubits: usize, grid: &Grid) -> Result<()> {
        if n_qubits > self.max_qubits {
            return Err(Error::CapExceeded {
                n_qubits,
                cap: self.max_qubits,
            });
        }
        if grid.n_points() > self.max_grid_points {
            return Err(invalid(format!(
                "grid of {} points exceeds the cap of {}",
                grid.n_points(),
                self.max_grid_points
            )));
        }
        Ok(())
    }
}

/// Register ⊗ mode state: `branches[k]` is the (unnormalized) mode component
/// attached to register label `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    n_qubits: usize,
    grid: Grid,
    branches: Vec<Vec<Complex64>>,
}

impl JointState {
    /// Initial product state `|ψ⟩ ⊗ |0⟩`.
    pub fn product(mode: &ModeState, n_qubits: usize) -> Self {
        let dim = register::dimension(n_qubits);
        let zero = vec![Complex64::new(0.0, 0.0); mode.grid().n_points()];
        let mut branches = vec![zero; dim];
        branches[0] = mode.psi_p().to_vec();
        Self {
            n_qubits,
            grid: *mode.grid(),
            branches,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn branches(&self) -> &[Vec<Complex64>] {
        &self.branches
    }

    pub fn branch_weight(&self, label: usize) -> f64 {
        self.branches[label]
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            * self.grid.dp()
    }

    pub fn total_norm(&self) -> f64 {
        (0..self.branches.len())
            .map(|l| self.branch_weight(l))
            .sum()
    }

    /// Register readout probabilities (the branch weights).
    pub fn readout_distribution(&self) -> Result<ReadoutDistribution> {
        ReadoutDistribution::new(
            (0..self.branches.len())
                .map(|l| self.branch_weight(l))
                .collect(),
        )
    }
}

/// Mode state left behind by readout `l`, with the probability of that result.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional {
    /// `None` when the branch carries (numerically) no weight.
    pub state: Option<ModeState>,
    pub prob: f64,
}

pub fn conditional_state(joint: &JointState, l: usize) -> Result<Conditional> {
    if l >= joint.branches.len() {
        return Err(invalid(format!(
            "readout {l} out of range for a {}-qubit register",
            joint.n_qubits
        )));
    }
    let prob = joint.branch_weight(l);
    if prob < EMPTY_BRANCH {
        return Ok(Conditional {
            state: None,
            prob: 0.0,
        });
    }
    let state = ModeState::normalized(joint.grid, joint.branches[l].clone())?;
    Ok(Conditional {
        state: Some(state),
        prob,
    })
}

/// Grid policy for running the protocol on a Gaussian input: holds every
/// branch displacement `r·k`, `k ≤ K`, with spacing dividing `r`.
pub fn default_grid(spec: &GaussianSpec, config: &ProtocolConfig) -> Result<Grid> {
    config.validate()?;
    let max_shift = config.r * config.max_label() as f64;
    Grid::for_gaussian(spec, config.r, max_shift, config.theta != 0.0)
}

/// Runs preparation, coupling to the `θ`-rotated quadrature, and the inverse
/// register transform. Branches are expressed in the frame rotated by `θ`.
pub fn run_protocol(initial: &ModeState, config: &ProtocolConfig) -> Result<JointState> {
    run_protocol_with_limits(initial, config, &OracleLimits::default())
}

pub fn run_protocol_with_limits(
    initial: &ModeState,
    config: &ProtocolConfig,
    limits: &OracleLimits,
) -> Result<JointState> {
    config.validate()?;
    limits.check(config.n_qubits, initial.grid())?;
    let rotated = initial.rotate_quadrature(config.theta)?;
    couple_and_mix(&rotated, config)
}

fn couple_and_mix(mode: &ModeState, config: &ProtocolConfig) -> Result<JointState> {
    let n_qubits = config.n_qubits;
    let grid = *mode.grid();

    // Step 1: π/2 pulses put the register in |0̄⟩.
    let meter = register::prepare_fourier_zero(n_qubits)?;

    // Step 2: exp(i r x̂ Υ̂) displaces the momentum of branch k by r·k.
    let mut branches = meter
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, amp)| {
            let mut shifted = cvmode::shift_amplitudes(&grid, mode.psi_p(), config.r * k as f64)?;
            shifted.iter_mut().for_each(|a| *a *= amp);
            Ok(shifted)
        })
        .collect::<Result<Vec<_>>>()?;

    // Step 3: inverse register transform, independently at every momentum sample.
    let mut planner = FftPlanner::new();
    let mut column = vec![Complex64::new(0.0, 0.0); branches.len()];
    for j in 0..grid.n_points() {
        for (c, b) in column.iter_mut().zip(&branches) {
            *c = b[j];
        }
        register::qft_with_planner(&mut planner, &mut column, Direction::Inverse);
        for (c, b) in column.iter().zip(branches.iter_mut()) {
            b[j] = *c;
        }
    }

    Ok(JointState {
        n_qubits,
        grid,
        branches,
    })
}

/// Largest `|P_oracle(l) − P_analytic(l)|`, where the analytic side evaluates
/// the characteristic-function sum on the (rotated) input's position distribution.
pub fn oracle_vs_analytic(initial: &ModeState, config: &ProtocolConfig) -> Result<f64> {
    oracle_vs_analytic_with_limits(initial, config, &OracleLimits::default())
}

pub fn oracle_vs_analytic_with_limits(
    initial: &ModeState,
    config: &ProtocolConfig,
    limits: &OracleLimits,
) -> Result<f64> {
    config.validate()?;
    limits.check(config.n_qubits, initial.grid())?;
    let rotated = initial.rotate_quadrature(config.theta)?;
    let oracle = couple_and_mix(&rotated, config)?.readout_distribution()?;

    let position = rotated.position_distribution();
    let analytic =
        protocol::readout_distribution(|k| position.characteristic(k), config.n_qubits, config.r)?;
    Ok(oracle.max_abs_difference(&analytic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvmode::gaussian_state;
    use crate::protocol::{gaussian_characteristic, readout_distribution_gaussian, Truncation};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn setup(variance: f64, config: &ProtocolConfig) -> ModeState {
        let spec = GaussianSpec::centered(variance).unwrap();
        let grid = default_grid(&spec, config).unwrap();
        gaussian_state(&spec, &grid).unwrap()
    }

    /// Closed-form momentum amplitude of a centred Gaussian.
    fn gaussian_amplitude(variance: f64, p: f64) -> f64 {
        let sp = 0.5 / variance.sqrt();
        (2.0 * PI * sp * sp).powf(-0.25) * (-p * p / (4.0 * sp * sp)).exp()
    }

    #[test]
    fn branches_match_the_joint_state_expansion() {
        // ψ_l(p) = (K+1)^{-1} Σ_k e^{−2πikl/(K+1)} φ(p − rk), with φ from its
        // formula restricted to the grid the input was sampled on.
        let config = ProtocolConfig::new(3);
        let variance = 0.5;
        let mode = setup(variance, &config);
        let joint = run_protocol(&mode, &config).unwrap();
        let dim = 8;
        let grid = joint.grid();
        for l in 0..dim {
            for j in (0..grid.n_points()).step_by(7) {
                let p = grid.p(j);
                let expected: Complex64 = (0..dim)
                    .map(|k| {
                        let phase = -2.0 * PI * (k * l) as f64 / dim as f64;
                        let q = p - k as f64;
                        let amp = if q >= grid.p_min() - 1e-9 {
                            gaussian_amplitude(variance, q)
                        } else {
                            0.0
                        };
                        Complex64::from_polar(amp, phase)
                    })
                    .sum::<Complex64>()
                    / dim as f64;
                assert!((joint.branches()[l][j] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_qubit_two_peak_branches() {
        let config = ProtocolConfig::new(1);
        let spec = GaussianSpec::centered(50.0).unwrap();
        let grid = default_grid(&spec, &config).unwrap();
        let mode = gaussian_state(&spec, &grid).unwrap();
        let joint = run_protocol(&mode, &config).unwrap();
        let per_unit = (1.0 / grid.dp()).round() as usize;
        let origin = (-grid.p_min() / grid.dp()).round() as usize;
        let peak = mode.psi_p()[origin];
        // l = 0: (φ(p) + φ(p−1))/2, l = 1: (φ(p) − φ(p−1))/2
        let b0 = &joint.branches()[0];
        let b1 = &joint.branches()[1];
        assert!((b0[origin] - peak * 0.5).norm() < 1e-10);
        assert!((b0[origin + per_unit] - peak * 0.5).norm() < 1e-10);
        assert!((b1[origin] - peak * 0.5).norm() < 1e-10);
        assert!((b1[origin + per_unit] + peak * 0.5).norm() < 1e-10);
    }

    #[test]
    fn no_coupling_leaves_register_in_ground_state() {
        let config = ProtocolConfig::new(4).with_r(0.0);
        let spec = GaussianSpec::centered(0.5).unwrap();
        let grid = Grid::for_gaussian(&spec, 0.0, 0.0, false).unwrap();
        let mode = gaussian_state(&spec, &grid).unwrap();
        let dist = run_protocol(&mode, &config)
            .unwrap()
            .readout_distribution()
            .unwrap();
        assert_abs_diff_eq!(dist.probs()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn norm_is_preserved() {
        for n in 1..=6 {
            let config = ProtocolConfig::new(n);
            let joint = run_protocol(&setup(0.5, &config), &config).unwrap();
            assert_abs_diff_eq!(joint.total_norm(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn narrow_position_reads_zero() {
        let config = ProtocolConfig::new(3);
        let joint = run_protocol(&setup(1e-4, &config), &config).unwrap();
        let c = conditional_state(&joint, 0).unwrap();
        assert!(c.prob > 1.0 - 1e-3, "P(0) = {}", c.prob);
    }

    #[test]
    fn single_qubit_hand_case() {
        let config = ProtocolConfig::new(1);
        let joint = run_protocol(&setup(2.0 * std::f64::consts::LN_2, &config), &config).unwrap();
        let p0 = conditional_state(&joint, 0).unwrap();
        let p1 = conditional_state(&joint, 1).unwrap();
        assert_abs_diff_eq!(p0.prob, 0.75, epsilon = 1e-4);
        assert_abs_diff_eq!(p1.prob, 0.25, epsilon = 1e-4);
        assert_abs_diff_eq!(p0.state.unwrap().norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn conditional_probabilities_match_analytic() {
        for n in 1..=6 {
            let config = ProtocolConfig::new(n);
            let variance = 0.3;
            let joint = run_protocol(&setup(variance, &config), &config).unwrap();
            let analytic = readout_distribution_gaussian(variance, n, Truncation::Exact).unwrap();
            let probs: Vec<f64> = (0..1 << n)
                .map(|l| conditional_state(&joint, l).unwrap().prob)
                .collect();
            assert_abs_diff_eq!(probs.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
            for (a, b) in probs.iter().zip(analytic.probs()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn empty_branch_is_flagged() {
        let config = ProtocolConfig::new(2).with_r(0.0);
        let spec = GaussianSpec::centered(1.0).unwrap();
        let grid = Grid::for_gaussian(&spec, 0.0, 0.0, false).unwrap();
        let joint = run_protocol(&gaussian_state(&spec, &grid).unwrap(), &config).unwrap();
        let c = conditional_state(&joint, 3).unwrap();
        assert!(c.state.is_none());
        assert_eq!(c.prob, 0.0);
        assert!(conditional_state(&joint, 4).is_err());
    }

    #[test]
    fn oracle_matches_analytic_examples() {
        for &(n, v, theta, tol) in &[
            (3, 0.5, 0.0, 1e-6),
            (6, 0.1, 0.0, 1e-6),
            (4, 1.0, PI / 3.0, 1e-5),
        ] {
            let config = ProtocolConfig::new(n).with_theta(theta);
            let err = oracle_vs_analytic(&setup(v, &config), &config).unwrap();
            assert!(err <= tol, "N = {n}, Δ = {v}: {err}");
        }
    }

    #[test]
    fn rotated_and_displaced_inputs_match_closed_form() {
        // Rotated quadrature of a displaced Gaussian is Gaussian with known moments.
        let (v, mx, mp, theta) = (0.5, 0.4, 0.3, 0.8);
        let config = ProtocolConfig::new(4).with_theta(theta);
        let spec = GaussianSpec::new(v, mx, mp).unwrap();
        let grid = default_grid(&spec, &config).unwrap();
        let mode = gaussian_state(&spec, &grid).unwrap();
        let oracle = run_protocol(&mode, &config)
            .unwrap()
            .readout_distribution()
            .unwrap();
        let (c, s) = (theta.cos(), theta.sin());
        let chi = gaussian_characteristic(v * c * c + s * s / v, mx * c + 2.0 * mp * s);
        let analytic = protocol::readout_distribution(chi, 4, 1.0).unwrap();
        assert!(oracle.max_abs_difference(&analytic) <= 1e-5);
        assert!(oracle_vs_analytic(&mode, &config).unwrap() <= 1e-5);
    }

    #[test]
    fn non_unit_coupling() {
        let config = ProtocolConfig::new(3).with_r(0.6);
        let variance = 0.8;
        let oracle = run_protocol(&setup(variance, &config), &config)
            .unwrap()
            .readout_distribution()
            .unwrap();
        let analytic =
            protocol::readout_distribution(gaussian_characteristic(variance, 0.0), 3, 0.6).unwrap();
        assert!(oracle.max_abs_difference(&analytic) <= 1e-6);
    }

    #[test]
    fn linear_in_the_input_mode() {
        let config = ProtocolConfig::new(3);
        let a_spec = GaussianSpec::new(0.5, 0.3, 0.0).unwrap();
        let b_spec = GaussianSpec::new(0.8, -0.5, 0.4).unwrap();
        let grid =
            Grid::for_gaussian(&GaussianSpec::centered(0.5).unwrap(), 1.0, 7.0, true).unwrap();
        let a = gaussian_state(&a_spec, &grid).unwrap();
        let b = gaussian_state(&b_spec, &grid).unwrap();
        let (ca, cb) = (Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.5));
        let mixed: Vec<Complex64> = a
            .psi_p()
            .iter()
            .zip(b.psi_p())
            .map(|(x, y)| ca * x + cb * y)
            .collect();
        let norm = (mixed.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dp()).sqrt();
        let sup = ModeState::normalized(grid, mixed).unwrap();

        let ja = run_protocol(&a, &config).unwrap();
        let jb = run_protocol(&b, &config).unwrap();
        let js = run_protocol(&sup, &config).unwrap();
        for k in 0..8 {
            for j in 0..grid.n_points() {
                let expected = (ca * ja.branches()[k][j] + cb * jb.branches()[k][j]) / norm;
                assert!((js.branches()[k][j] - expected).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn symmetric_inputs_give_mirrored_readout() {
        let config = ProtocolConfig::new(5);
        let dist = run_protocol(&setup(0.7, &config), &config)
            .unwrap()
            .readout_distribution()
            .unwrap();
        for l in 1..32 {
            assert_abs_diff_eq!(dist.probs()[l], dist.probs()[32 - l], epsilon = 1e-8);
        }
    }

    #[test]
    fn conditional_position_shows_the_register_comb() {
        // |ψ_l(x)|² = |ψ(x)|² |D_l(x)|², D_l(x) = (K+1)^{-1} Σ_k e^{ik(x − 2πl/(K+1))}
        let config = ProtocolConfig::new(2);
        let variance = 20.0;
        let mode = setup(variance, &config);
        let joint = run_protocol(&mode, &config).unwrap();
        let envelope = mode.position_distribution();
        let dim = 4;
        for l in 0..dim {
            let c = conditional_state(&joint, l).unwrap();
            let cond = c.state.unwrap().position_distribution();
            let mut best = (0.0, f64::MIN);
            for (m, (x, p)) in cond.points().enumerate() {
                let comb: Complex64 = (0..dim)
                    .map(|k| {
                        Complex64::from_polar(
                            1.0,
                            k as f64 * (x - 2.0 * PI * l as f64 / dim as f64),
                        )
                    })
                    .sum::<Complex64>()
                    / dim as f64;
                let expected = envelope.density()[m] * comb.norm_sqr() / c.prob;
                assert!((p - expected).abs() < 1e-9);
                if p > best.1 {
                    best = (x, p);
                }
            }
            // Main lobe sits on a comb tooth x ≡ 2πl/(K+1) (mod 2π).
            let tooth = 2.0 * PI * l as f64 / dim as f64;
            let offset = (best.0 - tooth).rem_euclid(2.0 * PI);
            assert!(
                offset.min(2.0 * PI - offset) < 0.5,
                "l = {l}: peak at {}",
                best.0
            );
        }
    }

    #[test]
    fn cap_is_enforced() {
        let config = ProtocolConfig::new(9);
        let spec = GaussianSpec::centered(1.0).unwrap();
        let grid = Grid::for_gaussian(&spec, 1.0, 511.0, false).unwrap();
        let mode = gaussian_state(&spec, &grid).unwrap();
        assert!(matches!(
            run_protocol(&mode, &config),
            Err(Error::CapExceeded {
                n_qubits: 9,
                cap: 8
            })
        ));
    }

    #[test]
    fn grid_overflow_names_required_range() {
        let config = ProtocolConfig::new(4);
        let spec = GaussianSpec::centered(1.0).unwrap();
        let grid = Grid::new(-4.0, 1.0 / 16.0, 160).unwrap();
        let mode = gaussian_state(&spec, &grid).unwrap();
        match run_protocol(&mode, &config) {
            Err(Error::DomainCoverage {
                required_max,
                grid_max,
                ..
            }) => {
                assert!(required_max > grid_max);
            }
            other => panic!("expected coverage error, got {other:?}"),
        }
    }
}
