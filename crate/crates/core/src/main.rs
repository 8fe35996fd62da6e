//! Command-line front end: MIC reports for POVM files, lower-bound
//! certificates, hard-instance sampling, single tomography runs, and the
//! Monte Carlo sweep driver.
//!
//! Exit codes: 0 on success, 2 when inputs fail validation (bad flags,
//! malformed files, out-of-range parameters), 3 when a computation fails
//! numerically (eigensolver breakdown, invariant violations discovered
//! mid-run).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use tomosim::hardness::{
    pauli_lowerbound_certificate, pauli_top_weight_basis, sample_instance, HardnessError,
    HardnessParams,
};
use tomosim::harness::{
    emit_csv, emit_plot_data, emit_summary_json, run_sweep, state_factory, EstimatorKind,
    ExperimentConfig, HarnessError, StateSpec, TrialRecord,
};
use tomosim::linalg::{
    project_to_density, trace_distance, DensityMatrix, MatrixJson,
};
use tomosim::measurement::{
    mic_trace_norm, plug_play_lower_bound, povm_from_json, MeasurementError, MicMatrix,
};
use tomosim::sampling::derive_seed;
use tomosim::tomography::mub::{build_mub, mub_tomography_run};
use tomosim::tomography::sim::k_outcome_run;
use tomosim::tomography::{
    pauli_copies_needed, pauli_estimate, pauli_tomography_run, TomographyError,
};

#[derive(Parser)]
#[command(
    name = "tomosim",
    version,
    about = "Quantum state tomography simulators and copy-count bound calculus"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measurement information channel reports for a POVM file.
    Mic(MicArgs),
    /// Copy-count lower-bound certificates.
    #[command(subcommand)]
    Lowerbound(LowerboundCmd),
    /// Sample sign-perturbed nearly maximally mixed states.
    #[command(subcommand)]
    Hardinstance(HardinstanceCmd),
    /// Run one tomography estimator and print a JSON report.
    #[command(subcommand)]
    Tomo(TomoCmd),
    /// Monte Carlo sweep over a (size, eps, copies) grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct MicArgs {
    /// POVM file: JSON array of matrix objects, or {"effects": [...], "labels": [...]}.
    #[arg(long)]
    povm: PathBuf,
    #[arg(long, value_enum)]
    report: MicReport,
    /// Target accuracy; required by the bound report.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MicReport {
    /// Sum of Tr[M_x^2]/Tr[M_x]: the channel's trace norm.
    TraceNorm,
    /// Full eigenvalue list of the dense channel matrix.
    Spectrum,
    /// Copy-count lower bound fed by the channel's trace norm.
    Bound,
}

#[derive(Subcommand)]
enum LowerboundCmd {
    /// Certificate for Pauli basis measurements on N qubits.
    Pauli {
        #[arg(long)]
        n_qubits: usize,
        #[arg(long)]
        eps: f64,
    },
}

#[derive(Subcommand)]
enum HardinstanceCmd {
    /// Draw instances and emit per-sample trace distances as CSV.
    Sample(HardinstanceSampleArgs),
}

#[derive(Args)]
struct HardinstanceSampleArgs {
    #[arg(long)]
    n_qubits: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Re-verify density invariants on every sampled state.
    #[arg(long)]
    check_validity: bool,
}

#[derive(Subcommand)]
enum TomoCmd {
    /// Pauli-basis tomography at the prescribed copy count.
    Pauli(TomoPauliArgs),
    /// Grouped MUB tomography with projected least squares.
    Mub(TomoMubArgs),
    /// MUB tomography through the w-bit simulation protocol.
    KOutcome(TomoKOutcomeArgs),
}

#[derive(Args)]
struct TomoShared {
    #[arg(long)]
    seed: u64,
    /// True state: maximally-mixed | pure-random | hs-random |
    /// hard-instance:EPS | file:PATH.
    #[arg(long, default_value = "hs-random")]
    state: String,
    /// Repeat the experiment this many times.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Write per-trial CSV rows here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct TomoPauliArgs {
    #[arg(long)]
    n_qubits: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    /// Project the raw estimate onto density matrices.
    #[arg(long)]
    project: bool,
    #[command(flatten)]
    shared: TomoShared,
}

#[derive(Args)]
struct TomoMubArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    copies: u64,
    /// Success threshold for CSV bookkeeping; rows never succeed at the
    /// default 0.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[command(flatten)]
    shared: TomoShared,
}

#[derive(Args)]
struct TomoKOutcomeArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    copies: u64,
    /// Success threshold for CSV bookkeeping; rows never succeed at the
    /// default 0.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[command(flatten)]
    shared: TomoShared,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config file; other flags override its keys one by one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// pauli, mub, or k-outcome.
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    state: Option<String>,
    /// Comma-separated qubit counts (pauli) or dimensions (mub, k-outcome).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    copies: Vec<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; required here or in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Outcome count for the k-outcome estimator.
    #[arg(long)]
    k: Option<usize>,
    /// Project raw Pauli estimates onto density matrices.
    #[arg(long)]
    project: bool,
    /// Record wall-clock times (breaks byte-identical reruns).
    #[arg(long)]
    record_wall_time: bool,
    /// Per-trial CSV path (default sweep.csv).
    #[arg(long)]
    output: Option<String>,
    /// Summary JSON path (default: CSV path with .summary.json).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Also write per-group plot data files into this directory.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

enum Failure {
    Validation(String),
    Numerical(String),
}

type CliResult<T> = Result<T, Failure>;

fn validation(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

fn numerical(e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(e.to_string())
}

/// Variant-level split for errors that can surface mid-run: bad inputs
/// exit 2, broken numerics exit 3.
fn tomography_failure(e: TomographyError) -> Failure {
    use TomographyError::*;
    match &e {
        BadQubitCount(_) | UnsupportedDim(_) | EpsOutOfRange(_) | DeltaOutOfRange(_)
        | BadArgument { .. } | BadOutcomeCount { .. } | EnumerationTooLarge(_) => {
            Failure::Validation(e.to_string())
        }
        _ => Failure::Numerical(e.to_string()),
    }
}

fn hardness_failure(e: HardnessError) -> Failure {
    let text = e.to_string();
    match &e {
        HardnessError::BadQubitCount(_) | HardnessError::BadArgument { .. } => {
            Failure::Validation(text)
        }
        _ => Failure::Numerical(text),
    }
}

fn harness_failure(e: HarnessError) -> Failure {
    match e {
        HarnessError::Linalg(inner) => numerical(inner),
        HarnessError::Tomography(inner) => tomography_failure(inner),
        HarnessError::Hardness(inner) => hardness_failure(inner),
        other => Failure::Validation(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Command::Mic(args) => run_mic(args),
        Command::Lowerbound(LowerboundCmd::Pauli { n_qubits, eps }) => {
            let cert = pauli_lowerbound_certificate(n_qubits, eps).map_err(hardness_failure)?;
            println!("{}", serde_json::to_string_pretty(&cert).expect("serializable"));
            Ok(())
        }
        Command::Hardinstance(HardinstanceCmd::Sample(args)) => run_hardinstance(args),
        Command::Tomo(cmd) => run_tomo(cmd),
        Command::Sweep(args) => run_sweep_cmd(args),
    }
}

fn run_mic(args: MicArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.povm)
        .map_err(|e| validation(format!("{}: {e}", args.povm.display())))?;
    let povm = povm_from_json(&text)
        .map_err(|e| validation(format!("{}: {e}", args.povm.display())))?;
    let report = match args.report {
        MicReport::TraceNorm => json!({
            "d": povm.dim(),
            "outcomes": povm.n_outcomes(),
            "trace_norm": mic_trace_norm(&povm),
        }),
        MicReport::Spectrum => {
            let mic = MicMatrix::new(&povm).map_err(measurement_failure)?;
            let eigenvalues = mic.eigenvalues().map_err(measurement_failure)?;
            json!({
                "d": povm.dim(),
                "outcomes": povm.n_outcomes(),
                "eigenvalues": eigenvalues,
            })
        }
        MicReport::Bound => {
            let eps = args
                .eps
                .ok_or_else(|| validation("--eps is required for the bound report"))?;
            let sup = mic_trace_norm(&povm);
            let bound =
                plug_play_lower_bound(povm.dim(), eps, sup).map_err(measurement_failure)?;
            serde_json::to_value(&bound).expect("serializable")
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(())
}

fn measurement_failure(e: MeasurementError) -> Failure {
    use MeasurementError::*;
    match &e {
        Empty | TooManyEffects { .. } | EffectDim { .. } | LabelCount { .. }
        | DimTooLarge { .. } | DirectionDim { .. } | BadArgument { .. } | Json(_)
        | EffectNotPsd { .. } | Incomplete { .. } => Failure::Validation(e.to_string()),
        _ => Failure::Numerical(e.to_string()),
    }
}

fn run_hardinstance(args: HardinstanceSampleArgs) -> CliResult<()> {
    let d = 1usize
        .checked_shl(args.n_qubits as u32)
        .filter(|_| args.n_qubits >= 1 && args.n_qubits <= 8)
        .ok_or_else(|| validation("n-qubits must be in 1..=8"))?;
    let basis = pauli_top_weight_basis(args.n_qubits, d * d / 2).map_err(hardness_failure)?;
    let params = HardnessParams::new(args.eps).map_err(hardness_failure)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    println!("sample,trace_dist_from_mixed,clamp_factor");
    for i in 0..args.count {
        let inst = sample_instance(&basis, &params, &mut rng).map_err(hardness_failure)?;
        if args.check_validity {
            DensityMatrix::new(inst.state.hermitian().clone()).map_err(numerical)?;
        }
        println!("{i},{},{}", inst.trace_dist_from_mixed, inst.clamp);
    }
    Ok(())
}

struct TomoOutcome {
    estimate: MatrixJson,
    trace_error: f64,
    hs_error: f64,
    copies_used: u64,
}

fn run_tomo(cmd: TomoCmd) -> CliResult<()> {
    let (shared, estimator, n_or_d, eps, params) = match &cmd {
        TomoCmd::Pauli(a) => (
            &a.shared,
            EstimatorKind::Pauli,
            a.n_qubits,
            a.eps,
            json!({
                "n_qubits": a.n_qubits, "eps": a.eps, "delta": a.delta,
                "project": a.project, "state": a.shared.state, "seed": a.shared.seed,
            }),
        ),
        TomoCmd::Mub(a) => (
            &a.shared,
            EstimatorKind::Mub,
            a.dim,
            a.eps,
            json!({
                "dim": a.dim, "copies": a.copies, "state": a.shared.state,
                "seed": a.shared.seed,
            }),
        ),
        TomoCmd::KOutcome(a) => (
            &a.shared,
            EstimatorKind::KOutcome,
            a.dim,
            a.eps,
            json!({
                "dim": a.dim, "k": a.k, "copies": a.copies, "state": a.shared.state,
                "seed": a.shared.seed,
            }),
        ),
    };
    if shared.trials == 0 {
        return Err(validation("--trials must be at least 1"));
    }
    let spec: StateSpec = shared.state.parse().map_err(validation)?;

    let mut records = Vec::with_capacity(shared.trials as usize);
    let mut first: Option<TomoOutcome> = None;
    let mut extra = serde_json::Value::Null;
    for trial in 0..shared.trials {
        let seed = derive_seed(shared.seed, 0, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outcome = match &cmd {
            TomoCmd::Pauli(a) => {
                let plan =
                    pauli_copies_needed(a.n_qubits, a.eps, a.delta).map_err(tomography_failure)?;
                let rho = state_factory(&spec, 1 << a.n_qubits, &mut rng)
                    .map_err(harness_failure)?;
                let sheet = pauli_tomography_run(&rho, plan.shots_per_setting, &mut rng)
                    .map_err(tomography_failure)?;
                let est = pauli_estimate(&sheet).map_err(tomography_failure)?;
                let est = if a.project {
                    project_to_density(&est).map_err(numerical)?.hermitian().clone()
                } else {
                    est
                };
                TomoOutcome {
                    estimate: MatrixJson::from_matrix(est.matrix()),
                    trace_error: trace_distance(&est, rho.hermitian()).map_err(numerical)?,
                    hs_error: (est.matrix() - rho.hermitian().matrix()).frob_norm(),
                    copies_used: plan.total_copies,
                }
            }
            TomoCmd::Mub(a) => {
                let fam = build_mub(a.dim).map_err(tomography_failure)?;
                let rho = state_factory(&spec, a.dim, &mut rng).map_err(harness_failure)?;
                let report =
                    mub_tomography_run(&rho, &fam, a.copies, &mut rng).map_err(tomography_failure)?;
                let est = report.estimate.hermitian();
                let outcome = TomoOutcome {
                    estimate: MatrixJson::from_matrix(est.matrix()),
                    trace_error: trace_distance(est, rho.hermitian()).map_err(numerical)?,
                    hs_error: (est.matrix() - rho.hermitian().matrix()).frob_norm(),
                    copies_used: a.copies - report.leftover,
                };
                if trial == 0 {
                    extra = serde_json::to_value(report.summary()).expect("serializable");
                }
                outcome
            }
            TomoCmd::KOutcome(a) => {
                let rho = state_factory(&spec, a.dim, &mut rng).map_err(harness_failure)?;
                let report =
                    k_outcome_run(&rho, a.k, a.copies, &mut rng).map_err(tomography_failure)?;
                let est = report.estimate.hermitian();
                let outcome = TomoOutcome {
                    estimate: MatrixJson::from_matrix(est.matrix()),
                    trace_error: trace_distance(est, rho.hermitian()).map_err(numerical)?,
                    hs_error: (est.matrix() - rho.hermitian().matrix()).frob_norm(),
                    copies_used: a.copies - report.leftover_copies,
                };
                if trial == 0 {
                    extra = serde_json::to_value(report.summary()).expect("serializable");
                }
                outcome
            }
        };
        records.push(TrialRecord {
            trial,
            estimator,
            n_or_d,
            eps,
            copies: outcome.copies_used,
            trace_error: outcome.trace_error,
            hs_error: outcome.hs_error,
            success: outcome.trace_error <= eps,
            seed,
            wall_ms: 0,
        });
        if first.is_none() {
            first = Some(outcome);
        }
    }
    let first = first.expect("at least one trial");
    let mean_trace_error =
        records.iter().map(|r| r.trace_error).sum::<f64>() / records.len() as f64;

    let mut report = json!({
        "estimate": serde_json::to_value(&first.estimate).expect("serializable"),
        "trace_error": first.trace_error,
        "hs_error": first.hs_error,
        "copies_used": first.copies_used,
        "params": params,
        "trials": shared.trials,
        "mean_trace_error": mean_trace_error,
    });
    if !extra.is_null() {
        report["run"] = extra;
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));

    if let Some(path) = &shared.csv {
        emit_csv(&records, path).map_err(harness_failure)?;
    }
    Ok(())
}

fn parse_estimator(s: &str) -> CliResult<EstimatorKind> {
    match s {
        "pauli" => Ok(EstimatorKind::Pauli),
        "mub" => Ok(EstimatorKind::Mub),
        "k-outcome" => Ok(EstimatorKind::KOutcome),
        other => Err(validation(format!(
            "unknown estimator {other:?} (want pauli, mub, or k-outcome)"
        ))),
    }
}

fn run_sweep_cmd(args: SweepArgs) -> CliResult<()> {
    let mut config = if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| validation(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_toml_str(&text)
            .map_err(|e| validation(format!("{}: {e}", path.display())))?
    } else {
        let estimator = args
            .estimator
            .as_deref()
            .ok_or_else(|| validation("--estimator is required without --config"))?;
        ExperimentConfig {
            estimator: parse_estimator(estimator)?,
            state: args
                .state
                .as_deref()
                .unwrap_or("hs-random")
                .parse()
                .map_err(validation)?,
            sizes: args.sizes.clone(),
            eps: args.eps.clone(),
            copies: args.copies.clone(),
            trials: args.trials.unwrap_or(1),
            seed: args.seed.ok_or_else(|| validation("--seed is required for sweep"))?,
            k: args.k,
            project: args.project,
            record_wall_time: args.record_wall_time,
            output: args.output.clone(),
        }
    };
    if args.config.is_some() {
        if let Some(e) = &args.estimator {
            config.estimator = parse_estimator(e)?;
        }
        if let Some(s) = &args.state {
            config.state = s.parse().map_err(validation)?;
        }
        if !args.sizes.is_empty() {
            config.sizes = args.sizes.clone();
        }
        if !args.eps.is_empty() {
            config.eps = args.eps.clone();
        }
        if !args.copies.is_empty() {
            config.copies = args.copies.clone();
        }
        if let Some(t) = args.trials {
            config.trials = t;
        }
        if let Some(s) = args.seed {
            config.seed = s;
        }
        if let Some(k) = args.k {
            config.k = Some(k);
        }
        // Boolean flags only switch features on; disable by config edit.
        if args.project {
            config.project = true;
        }
        if args.record_wall_time {
            config.record_wall_time = true;
        }
        if args.output.is_some() {
            config.output = args.output.clone();
        }
    }
    config.validate().map_err(validation)?;

    let out = run_sweep(&config).map_err(harness_failure)?;

    let csv_path = PathBuf::from(config.output.as_deref().unwrap_or("sweep.csv"));
    emit_csv(&out.records, &csv_path).map_err(harness_failure)?;
    let summary_path = args
        .summary
        .clone()
        .unwrap_or_else(|| csv_path.with_extension("summary.json"));
    emit_summary_json(&out.summary, &summary_path).map_err(harness_failure)?;
    if let Some(dir) = &args.plot_dir {
        emit_plot_data(&out.summary, dir).map_err(harness_failure)?;
    }

    println!("{}", serde_json::to_string_pretty(&out.summary).expect("serializable"));
    eprintln!(
        "wrote {} records to {} (summary: {})",
        out.records.len(),
        csv_path.display(),
        summary_path.display()
    );
    Ok(())
}
