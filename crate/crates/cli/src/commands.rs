use std::path::PathBuf;

use serde::Serialize;

use ionreadout::cvmode::{gaussian_state, GaussianSpec};
use ionreadout::oracle::{self, OracleLimits};
use ionreadout::protocol::{self, ProtocolConfig, Truncation, LAMB_DICKE_MARGIN};
use ionreadout::register;

use crate::output::{csv_bytes, emit, fmt_f64, manifest_path, RunManifest};
use crate::{CliError, DistributionArgs, NminArgs, OracleCheckArgs, SampleArgs, VarianceScanArgs};

fn warn_flat(variance: f64) {
    if protocol::is_flat_regime(variance) {
        eprintln!(
            "warning: variance {variance} is at or above {}; the readout distribution is essentially flat",
            protocol::upper_variance_limit()
        );
    }
}

fn write_manifest<C: Serialize>(
    command: &'static str,
    config: C,
    explicit: Option<&std::path::Path>,
    out: Option<&std::path::Path>,
    outputs: Vec<PathBuf>,
) -> Result<(), CliError> {
    if let Some(path) = manifest_path(explicit, out) {
        RunManifest::new(command, config, outputs).write(&path)?;
    }
    Ok(())
}

pub fn distribution(args: &DistributionArgs) -> Result<(), CliError> {
    let truncation = Truncation::Tolerance(args.epsilon);
    let mut columns = Vec::with_capacity(args.variances.len());
    for v in &args.variances {
        warn_flat(v.value());
        if let Some(eta) = args.eta {
            let check =
                protocol::lamb_dicke_check(v.value(), args.n_qubits, eta, LAMB_DICKE_MARGIN)?;
            if !check.is_pass() {
                eprintln!(
                    "warning: variance {} violates the Lamb-Dicke bound (√Δ·η/√N = {:.3} > {LAMB_DICKE_MARGIN})",
                    v.text(),
                    check.ratio()
                );
            }
        }
        // Coupling r samples χ at r·m, the same as unit coupling on variance r²Δ.
        let effective = args.r * args.r * v.value();
        columns.push(protocol::readout_distribution_gaussian(
            effective,
            args.n_qubits,
            truncation,
        )?);
    }

    let dim = register::dimension(args.n_qubits);
    let mut x_of = vec![0.0; dim];
    for p in protocol::map_to_position(&columns[0], args.r, !args.no_reflect).points() {
        x_of[p.l] = p.x;
    }

    let mut header = vec!["l".to_string(), "x".to_string()];
    header.extend(args.variances.iter().map(|v| format!("P_{}", v.text())));
    let rows = (0..dim).map(|l| {
        let mut row = vec![l.to_string(), fmt_f64(x_of[l])];
        row.extend(columns.iter().map(|d| fmt_f64(d.probs()[l])));
        row
    });
    emit(args.out.as_deref(), &csv_bytes(&header, rows)?)?;
    write_manifest(
        "distribution",
        args,
        args.manifest.as_deref(),
        args.out.as_deref(),
        args.out.iter().cloned().collect(),
    )
}

pub fn variance_scan(args: &VarianceScanArgs) -> Result<(), CliError> {
    if args.n_min > args.n_max {
        return Err(CliError::Usage(format!(
            "--n-min ({}) must not exceed --n-max ({})",
            args.n_min, args.n_max
        )));
    }
    warn_flat(args.variance.value());
    let scan = protocol::variance_scan(
        args.variance.value(),
        args.n_min..=args.n_max,
        Truncation::Tolerance(args.epsilon),
    )?;
    let header = ["N".to_string(), "estimated_variance".to_string()];
    let rows = scan.iter().map(|&(n, v)| vec![n.to_string(), fmt_f64(v)]);
    emit(args.out.as_deref(), &csv_bytes(&header, rows)?)?;
    write_manifest(
        "variance-scan",
        args,
        args.manifest.as_deref(),
        args.out.as_deref(),
        args.out.iter().cloned().collect(),
    )
}

pub fn nmin(args: &NminArgs) -> Result<(), CliError> {
    let n = protocol::n_min(args.variance.value())?;
    println!("{n}");
    write_manifest("nmin", args, args.manifest.as_deref(), None, Vec::new())
}

pub fn sample(args: &SampleArgs) -> Result<(), CliError> {
    warn_flat(args.variance.value());
    let dist = protocol::readout_distribution_gaussian(
        args.variance.value(),
        args.n_qubits,
        Truncation::Exact,
    )?;
    let n_shots =
        usize::try_from(args.shots).map_err(|_| CliError::Usage("too many shots".into()))?;
    let shots = register::sample_readout(&dist, args.seed, n_shots)?;

    let header = ["shot".to_string(), "l".to_string()];
    let rows = shots
        .iter()
        .enumerate()
        .map(|(i, l)| vec![i.to_string(), l.to_string()]);
    emit(args.out.as_deref(), &csv_bytes(&header, rows)?)?;

    let empirical = register::histogram(&shots, dist.len());
    let deviation = empirical
        .iter()
        .zip(dist.probs())
        .map(|(e, p)| (e - p).abs())
        .fold(0.0, f64::max);
    eprintln!("max |empirical − analytic| = {}", fmt_f64(deviation));

    if let Some(path) = &args.histogram {
        let header: Vec<String> = ["l", "count", "empirical", "analytic"]
            .map(String::from)
            .into();
        let rows = empirical
            .iter()
            .zip(dist.probs())
            .enumerate()
            .map(|(l, (e, p))| {
                let count = (e * n_shots as f64).round() as u64;
                vec![l.to_string(), count.to_string(), fmt_f64(*e), fmt_f64(*p)]
            });
        emit(Some(path), &csv_bytes(&header, rows)?)?;
    }

    let outputs = args.out.iter().chain(&args.histogram).cloned().collect();
    write_manifest(
        "sample",
        args,
        args.manifest.as_deref(),
        args.out.as_deref(),
        outputs,
    )
}

#[derive(Serialize)]
struct OracleCheckRecord<'a> {
    #[serde(flatten)]
    args: &'a OracleCheckArgs,
    grid: ionreadout::Grid,
    max_abs_error: f64,
}

pub fn oracle_check(args: &OracleCheckArgs) -> Result<(), CliError> {
    let limits = if args.force {
        OracleLimits::unbounded()
    } else {
        OracleLimits::default()
    };
    if args.n_qubits > limits.max_qubits {
        return Err(CliError::Usage(format!(
            "{} qubits exceeds the oracle cap of {}; pass --force to run anyway",
            args.n_qubits, limits.max_qubits
        )));
    }
    let config = ProtocolConfig::new(args.n_qubits)
        .with_r(args.r)
        .with_theta(args.theta);
    let spec = GaussianSpec::centered(args.variance.value())?;
    let grid = oracle::default_grid(&spec, &config)?;
    let mode = gaussian_state(&spec, &grid)?;
    let error = oracle::oracle_vs_analytic_with_limits(&mode, &config, &limits)?;
    println!("max_abs_error {}", fmt_f64(error));

    let record = OracleCheckRecord {
        args,
        grid,
        max_abs_error: error,
    };
    write_manifest(
        "oracle-check",
        &record,
        args.manifest.as_deref(),
        None,
        Vec::new(),
    )?;

    if error <= args.tolerance {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "max abs error {} exceeds tolerance {}",
            fmt_f64(error),
            args.tolerance
        )))
    }
}
