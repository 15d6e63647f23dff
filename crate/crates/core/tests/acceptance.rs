//! Acceptance suite. Runs every criterion at its fixed tolerance, prints one
//! `PASS`/`FAIL` line per criterion and exits non-zero if any criterion fails.
//!
//! Reference values are computed here from first principles rather than taken
//! from the library: the Gaussian readout is evaluated as a direct double sum
//! over register labels, and the mapped moments are recomputed by hand.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ionreadout::cvmode::{gaussian_state, GaussianSpec};
use ionreadout::oracle::{self, run_protocol};
use ionreadout::protocol::{
    gaussian_characteristic, n_min, readout_distribution, readout_distribution_gaussian,
    variance_scan, ProtocolConfig, ReadoutDistribution, Truncation,
};
use ionreadout::register::{self, Direction, RegisterState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// `P(l) = (1/M²) Σ_{k,k'} e^{−2πi(k−k')l/M} e^{−(k−k')²Δ/2}` summed term by term.
fn double_sum_gaussian(variance: f64, n_qubits: usize) -> Vec<f64> {
    let dim = 1usize << n_qubits;
    let m = dim as f64;
    (0..dim)
        .map(|l| {
            let mut total = 0.0;
            for k in 0..dim {
                for kp in 0..dim {
                    let d = k as f64 - kp as f64;
                    total += (2.0 * PI * d * l as f64 / m).cos() * (-d * d * variance / 2.0).exp();
                }
            }
            total / (m * m)
        })
        .collect()
}

/// Variance of the readout with labels above the midpoint reflected to negative x.
fn mapped_variance(probs: &[f64]) -> (f64, f64) {
    let dim = probs.len();
    let x = |l: usize| {
        let l = if 2 * l > dim {
            l as f64 - dim as f64
        } else {
            l as f64
        };
        2.0 * PI * l / dim as f64
    };
    let total: f64 = probs.iter().sum();
    let mean: f64 = probs.iter().enumerate().map(|(l, p)| p * x(l)).sum::<f64>() / total;
    let var = probs
        .iter()
        .enumerate()
        .map(|(l, p)| p * (x(l) - mean).powi(2))
        .sum::<f64>()
        / total;
    (mean, var)
}

/// Largest `|P(l) − P(M−l)|` for `l = 1..M−1`.
fn asymmetry(probs: &[f64]) -> f64 {
    let dim = probs.len();
    (1..dim)
        .map(|l| (probs[l] - probs[dim - l]).abs())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let a = n_min(0.1).unwrap();
    let b = n_min(1e-10).unwrap();
    outcome(
        a == 10 && b == 25,
        format!("nmin(0.1) = {a}, nmin(1e-10) = {b}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = (0, 1.0f64);
    let mut failing = Vec::new();
    for n in 1..=10 {
        let p0 = readout_distribution_gaussian(1e-12, n, Truncation::Exact)
            .unwrap()
            .probs()[0];
        if p0 < 1.0 - 1e-9 {
            failing.push(n);
        }
        if p0 < worst.1 {
            worst = (n, p0);
        }
    }
    outcome(
        failing.is_empty(),
        format!(
            "min P(0) = 1 − {:.3e} at N = {}; N below bound: {:?}",
            1.0 - worst.1,
            worst.0,
            failing
        ),
    )
}

fn criterion_3() -> Outcome {
    let dist = readout_distribution_gaussian(100.0, 6, Truncation::Exact).unwrap();
    let dev = dist
        .probs()
        .iter()
        .map(|p| (p - 1.0 / 64.0).abs())
        .fold(0.0, f64::max);
    outcome(dev <= 1e-9, format!("max |P − 1/64| = {dev:.3e}"))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for n in 3..=6 {
        for &v in &[0.1, 0.5, 1.0, 2.0] {
            let config = ProtocolConfig::new(n);
            let spec = GaussianSpec::centered(v).unwrap();
            let grid = oracle::default_grid(&spec, &config).unwrap();
            let mode = gaussian_state(&spec, &grid).unwrap();
            let simulated = run_protocol(&mode, &config)
                .unwrap()
                .readout_distribution()
                .unwrap();
            let reference = double_sum_gaussian(v, n);
            let against_reference = simulated
                .probs()
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let against_grid_chi = oracle::oracle_vs_analytic(&mode, &config).unwrap();
            worst = worst.max(against_reference).max(against_grid_chi);
        }
    }
    outcome(
        worst <= 1e-6,
        format!("max |P_oracle − P_analytic| = {worst:.3e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=10 {
        for &v in &[0.01, 0.1, 1.0, 10.0] {
            let closed = readout_distribution_gaussian(v, n, Truncation::Exact).unwrap();
            let general = readout_distribution(gaussian_characteristic(v, 0.0), n, 1.0).unwrap();
            worst = worst.max(closed.max_abs_difference(&general));
        }
    }
    for n in 1..=6 {
        for &v in &[0.01, 0.1, 1.0, 10.0] {
            let closed = readout_distribution_gaussian(v, n, Truncation::Exact).unwrap();
            let reference = double_sum_gaussian(v, n);
            let dev = closed
                .probs()
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(dev);
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max entry difference = {worst:.3e}"),
    )
}

fn criterion_6() -> Outcome {
    let narrow = readout_distribution_gaussian(0.1, 9, Truncation::Tolerance(0.01)).unwrap();
    let wide = readout_distribution_gaussian(1.0, 9, Truncation::Tolerance(0.01)).unwrap();
    let (_, v_narrow) = mapped_variance(narrow.probs());
    let (_, v_wide) = mapped_variance(wide.probs());
    let asym = asymmetry(narrow.probs()).max(asymmetry(wide.probs()));
    let sum_dev = [&narrow, &wide]
        .iter()
        .map(|d| (d.probs().iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let rel = (v_narrow - 0.1).abs() / 0.1;
    outcome(
        v_narrow < v_wide && asym <= 1e-8 && sum_dev <= 1e-10 && rel <= 0.10,
        format!(
            "var(0.1) = {v_narrow:.5}, var(1.0) = {v_wide:.5}, asymmetry = {asym:.1e}, |Σ−1| = {sum_dev:.1e}, rel. error = {:.2}%",
            100.0 * rel
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &(v, settle_from) in &[(0.1, 10usize), (1.0, 8)] {
        let scan = variance_scan(v, 4..=14, Truncation::Tolerance(0.01)).unwrap();
        let worst = scan
            .iter()
            .filter(|(n, _)| *n >= settle_from)
            .map(|(_, est)| (est - v).abs() / v)
            .fold(0.0, f64::max);
        pass &= worst <= 0.05;
        parts.push(format!(
            "Δ={v}: worst rel. error for N≥{settle_from} = {:.2}%",
            100.0 * worst
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut worst_ratio = 0.0f64;
    for &v in &[0.1, 1.0] {
        let exact = readout_distribution_gaussian(v, 9, Truncation::Exact).unwrap();
        for &eps in &[0.01, (-4.0f64).exp()] {
            let cut = readout_distribution_gaussian(v, 9, Truncation::Tolerance(eps)).unwrap();
            let dev = exact.max_abs_difference(&cut);
            pass &= dev <= 2.0 * eps;
            worst_ratio = worst_ratio.max(dev / eps);
        }
    }
    outcome(pass, format!("max |ΔP| / ε = {worst_ratio:.3e} (bound 2)"))
}

fn random_register(n: usize, rng: &mut ChaCha8Rng) -> RegisterState {
    let raw: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    RegisterState::new(n, raw.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut round_trip = 0.0f64;
    for n in 1..=10 {
        let state = random_register(n, &mut rng);
        let back = register::qft(
            &register::qft(&state, Direction::Forward),
            Direction::Inverse,
        );
        let dev = state
            .amplitudes()
            .iter()
            .zip(back.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        round_trip = round_trip.max(dev);
    }

    let mut drift = 0.0f64;
    for n in 3..=6 {
        for &(v, theta) in &[(0.1, 0.0), (1.0, 0.0), (0.5, PI / 3.0)] {
            let config = ProtocolConfig::new(n).with_theta(theta);
            let spec = GaussianSpec::centered(v).unwrap();
            let grid = oracle::default_grid(&spec, &config).unwrap();
            let mode = gaussian_state(&spec, &grid).unwrap();
            let joint = run_protocol(&mode, &config).unwrap();
            drift = drift.max((joint.total_norm() - mode.norm_sqr()).abs());
        }
    }

    let mut sums = 0.0f64;
    let mut check =
        |d: &ReadoutDistribution| sums = sums.max((d.probs().iter().sum::<f64>() - 1.0).abs());
    for n in 1..=12 {
        for &v in &[1e-6, 0.01, 0.1, 1.0, 10.0, 100.0] {
            check(&readout_distribution_gaussian(v, n, Truncation::Exact).unwrap());
            check(&readout_distribution(gaussian_characteristic(v, 0.0), n, 1.0).unwrap());
        }
    }

    outcome(
        round_trip <= 1e-12 && drift <= 1e-9 && sums <= 1e-10,
        format!("QFT round trip = {round_trip:.1e}, norm drift = {drift:.1e}, |Σ−1| = {sums:.1e}"),
    )
}

fn criterion_10() -> Outcome {
    let dist = readout_distribution_gaussian(0.5, 5, Truncation::Exact).unwrap();
    let shots = register::sample_readout(&dist, 2024, 1_000_000).unwrap();
    let mut counts = vec![0usize; dist.len()];
    for l in shots {
        counts[l] += 1;
    }
    let dev = counts
        .iter()
        .zip(dist.probs())
        .map(|(&c, p)| (c as f64 / 1e6 - p).abs())
        .fold(0.0, f64::max);
    outcome(dev <= 0.005, format!("max histogram deviation = {dev:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 minimum register size", criterion_1),
        ("2 delta limit", criterion_2),
        ("3 flat limit", criterion_3),
        ("4 oracle equivalence", criterion_4),
        ("5 closed-form equivalence", criterion_5),
        ("6 distribution shape at N=9", criterion_6),
        ("7 variance settles with N", criterion_7),
        ("8 truncation bound", criterion_8),
        ("9 unitarity and normalization", criterion_9),
        ("10 sampling consistency", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let result = run();
        let status = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!(
            "{status} criterion {name}: {} [{:.2} s]",
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
