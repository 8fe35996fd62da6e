//! Monte Carlo sweep driver: test-state factories, seeded trial execution
//! over a (size, eps, copies) grid, per-cell summaries, and CSV / JSON /
//! plot-data emission.
//!
//! Determinism contract: a sweep is a pure function of its config. Trial
//! `t` of cell `c` runs on `ChaCha8Rng::seed_from_u64(derive_seed(base, c,
//! t))`, so cells and trials can execute in any order (or in parallel)
//! without changing a single output byte. Wall-clock times are the one
//! exception and are only recorded when `record_wall_time` is set; the
//! column is 0 otherwise so that CSV output stays byte-identical across
//! runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hardness::{pauli_top_weight_basis, sample_instance, HardnessError, HardnessParams};
use crate::linalg::{
    matrix_from_json, project_to_density, trace_distance, DensityMatrix, HermitianMatrix,
    LinalgError, C64,
};
use crate::pauli::MAX_QUBITS;
use crate::sampling::{derive_seed, standard_normal};
use crate::tomography::mub::{build_mub, mub_tomography_run, MubFamily, SUPPORTED_DIMS};
use crate::tomography::sim::k_outcome_run;
use crate::tomography::{pauli_estimate, pauli_tomography_run, TomographyError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad state spec: {0}")]
    BadSpec(String),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("state file {path}: {why}")]
    StateFile { path: String, why: String },
    #[error("{estimator} estimator cannot run at size {size}: {why}")]
    SizeMismatch { estimator: EstimatorKind, size: usize, why: &'static str },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv at {path}: {why}")]
    Csv { path: String, why: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error(transparent)]
    Hardness(#[from] HardnessError),
}

/// How to manufacture the true state for each trial.
#[derive(Clone, Debug, PartialEq)]
pub enum StateKind {
    MaximallyMixed,
    /// Haar-ish random pure state: normalized complex Gaussian vector.
    PureRandom,
    /// Hilbert-Schmidt random mixed state: `G G† / Tr[G G†]`.
    HsRandom,
    /// Sign-perturbed nearly maximally mixed state at the given
    /// separation scale.
    HardInstance { eps: f64 },
    /// Fixed density matrix from a JSON matrix file.
    File { path: String },
}

/// Text form used in config files and CLI flags: `maximally-mixed`,
/// `pure-random`, `hs-random`, `hard-instance:EPS`, `file:PATH`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct StateSpec {
    pub kind: StateKind,
}

impl StateSpec {
    pub fn new(kind: StateKind) -> Self {
        StateSpec { kind }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            StateKind::MaximallyMixed => write!(f, "maximally-mixed"),
            StateKind::PureRandom => write!(f, "pure-random"),
            StateKind::HsRandom => write!(f, "hs-random"),
            StateKind::HardInstance { eps } => write!(f, "hard-instance:{eps}"),
            StateKind::File { path } => write!(f, "file:{path}"),
        }
    }
}

impl std::str::FromStr for StateSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        let kind = match s {
            "maximally-mixed" => StateKind::MaximallyMixed,
            "pure-random" => StateKind::PureRandom,
            "hs-random" => StateKind::HsRandom,
            _ => {
                if let Some(eps) = s.strip_prefix("hard-instance:") {
                    let eps: f64 = eps
                        .parse()
                        .map_err(|_| HarnessError::BadSpec(format!("bad eps in {s:?}")))?;
                    if !(eps > 0.0 && eps <= 1.0) {
                        return Err(HarnessError::BadSpec(format!(
                            "hard-instance eps {eps} outside (0, 1]"
                        )));
                    }
                    StateKind::HardInstance { eps }
                } else if let Some(path) = s.strip_prefix("file:") {
                    if path.is_empty() {
                        return Err(HarnessError::BadSpec("empty file path".into()));
                    }
                    StateKind::File { path: path.to_string() }
                } else {
                    return Err(HarnessError::BadSpec(format!(
                        "unknown state kind {s:?} (want maximally-mixed, pure-random, \
                         hs-random, hard-instance:EPS, or file:PATH)"
                    )));
                }
            }
        };
        Ok(StateSpec { kind })
    }
}

impl TryFrom<String> for StateSpec {
    type Error = HarnessError;

    fn try_from(s: String) -> Result<Self, HarnessError> {
        s.parse()
    }
}

impl From<StateSpec> for String {
    fn from(spec: StateSpec) -> String {
        spec.to_string()
    }
}

/// Build one true state of dimension `dim`. Random kinds consume the rng,
/// so per-trial seeding makes them reproducible.
pub fn state_factory(
    spec: &StateSpec,
    dim: usize,
    rng: &mut impl Rng,
) -> Result<DensityMatrix, HarnessError> {
    match &spec.kind {
        StateKind::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(dim)),
        StateKind::PureRandom => {
            let v: Vec<C64> = (0..dim)
                .map(|_| C64::new(standard_normal(rng), standard_normal(rng)))
                .collect();
            Ok(DensityMatrix::pure_from_vec(&v)?)
        }
        StateKind::HsRandom => {
            let g = crate::linalg::ComplexMatrix::from_fn(dim, |_, _| {
                C64::new(standard_normal(rng), standard_normal(rng))
            });
            let a = &g * &g.dagger();
            let tr = a.trace().re;
            Ok(DensityMatrix::new(HermitianMatrix::symmetrize(a.scale(1.0 / tr)))?)
        }
        StateKind::HardInstance { eps } => {
            let n = dim.trailing_zeros() as usize;
            if dim != 1 << n || n == 0 {
                return Err(HarnessError::BadSpec(format!(
                    "hard-instance needs a power-of-two dimension, got {dim}"
                )));
            }
            let basis = pauli_top_weight_basis(n, dim * dim / 2)?;
            let params = HardnessParams::new(*eps)?;
            Ok(sample_instance(&basis, &params, rng)?.state)
        }
        StateKind::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| HarnessError::StateFile { path: path.clone(), why: e.to_string() })?;
            let m = matrix_from_json(&text)
                .map_err(|e| HarnessError::StateFile { path: path.clone(), why: e.to_string() })?;
            if m.dim() != dim {
                return Err(HarnessError::StateFile {
                    path: path.clone(),
                    why: format!("dimension {} but sweep needs {dim}", m.dim()),
                });
            }
            let defect = m.hermiticity_defect();
            if defect > crate::tol::HERMITICITY {
                return Err(HarnessError::StateFile {
                    path: path.clone(),
                    why: format!("not Hermitian (defect {defect:.2e})"),
                });
            }
            let rho = DensityMatrix::new(HermitianMatrix::symmetrize(m))
                .map_err(|e| HarnessError::StateFile { path: path.clone(), why: e.to_string() })?;
            Ok(rho)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Pauli-basis tallies, linear inversion. Size = qubit count.
    Pauli,
    /// Grouped MUB measurement with projected least squares. Size = d.
    Mub,
    /// MUB through the w-bit simulation protocol. Size = d, needs `k`.
    KOutcome,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Pauli => "pauli",
            EstimatorKind::Mub => "mub",
            EstimatorKind::KOutcome => "k-outcome",
        })
    }
}

/// A full sweep: the cell grid is `sizes x eps x copies`, each run
/// `trials` times. For `pauli`, sizes are qubit counts; for `mub` and
/// `k-outcome`, dimensions.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub estimator: EstimatorKind,
    pub state: StateSpec,
    pub sizes: Vec<usize>,
    pub eps: Vec<f64>,
    pub copies: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    /// Outcome count for the k-outcome estimator; ignored otherwise.
    #[serde(default)]
    pub k: Option<usize>,
    /// Project the raw Pauli estimate onto density matrices.
    #[serde(default)]
    pub project: bool,
    /// Off by default so output is byte-identical across runs.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::BadConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::BadConfig("trials must be at least 1".into()));
        }
        if self.sizes.is_empty() || self.eps.is_empty() || self.copies.is_empty() {
            return Err(HarnessError::BadConfig("sizes, eps, copies must be non-empty".into()));
        }
        for &e in &self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(HarnessError::BadConfig(format!("eps {e} must be positive")));
            }
        }
        for &c in &self.copies {
            if c == 0 {
                return Err(HarnessError::BadConfig("copies values must be positive".into()));
            }
        }
        for &s in &self.sizes {
            match self.estimator {
                EstimatorKind::Pauli => {
                    if s == 0 || s > MAX_QUBITS {
                        return Err(HarnessError::SizeMismatch {
                            estimator: self.estimator,
                            size: s,
                            why: "qubit count outside 1..=8",
                        });
                    }
                }
                EstimatorKind::Mub | EstimatorKind::KOutcome => {
                    if !SUPPORTED_DIMS.contains(&s) {
                        return Err(HarnessError::SizeMismatch {
                            estimator: self.estimator,
                            size: s,
                            why: "dimension not in {2, 4, 8, 16}",
                        });
                    }
                }
            }
        }
        if self.estimator == EstimatorKind::KOutcome {
            let k = self.k.ok_or_else(|| {
                HarnessError::BadConfig("k-outcome estimator needs the k key".into())
            })?;
            for &s in &self.sizes {
                if k < 2 || k >= s {
                    return Err(HarnessError::SizeMismatch {
                        estimator: self.estimator,
                        size: s,
                        why: "needs 2 <= k < d",
                    });
                }
            }
        }
        Ok(())
    }
}

/// One trial's outcome, shaped exactly like a CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub estimator: EstimatorKind,
    #[serde(rename = "N_or_d")]
    pub n_or_d: usize,
    pub eps: f64,
    /// Copies actually consumed (floor splits make this at most the
    /// requested budget).
    pub copies: u64,
    pub trace_error: f64,
    pub hs_error: f64,
    /// Exactly `trace_error <= eps`.
    pub success: bool,
    pub seed: u64,
    /// 0 unless `record_wall_time` was set.
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellSummary {
    pub estimator: EstimatorKind,
    pub n_or_d: usize,
    pub eps: f64,
    pub copies_requested: u64,
    pub trials: u64,
    pub success_rate: f64,
    pub mean_trace_error: f64,
    pub stderr_trace_error: f64,
    pub mean_hs_error: f64,
    pub stderr_hs_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub cells: Vec<CellSummary>,
}

pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub summary: SweepSummary,
}

struct TrialResult {
    trace_error: f64,
    hs_error: f64,
    copies_used: u64,
}

fn run_trial(
    config: &ExperimentConfig,
    mubs: &BTreeMap<usize, MubFamily>,
    size: usize,
    copies: u64,
    rng: &mut impl Rng,
) -> Result<TrialResult, HarnessError> {
    match config.estimator {
        EstimatorKind::Pauli => {
            let settings = 3u64.pow(size as u32);
            let m = copies / settings;
            if m == 0 {
                return Err(HarnessError::SizeMismatch {
                    estimator: config.estimator,
                    size,
                    why: "copy budget below one shot per setting",
                });
            }
            let rho = state_factory(&config.state, 1 << size, rng)?;
            let sheet = pauli_tomography_run(&rho, m, rng)?;
            let est = pauli_estimate(&sheet)?;
            let est = if config.project {
                project_to_density(&est)?.hermitian().clone()
            } else {
                est
            };
            Ok(TrialResult {
                trace_error: trace_distance(&est, rho.hermitian())?,
                hs_error: (est.matrix() - rho.hermitian().matrix()).frob_norm(),
                copies_used: m * settings,
            })
        }
        EstimatorKind::Mub => {
            let rho = state_factory(&config.state, size, rng)?;
            let fam = &mubs[&size];
            let report = mub_tomography_run(&rho, fam, copies, rng)?;
            let est = report.estimate.hermitian();
            Ok(TrialResult {
                trace_error: trace_distance(est, rho.hermitian())?,
                hs_error: (est.matrix() - rho.hermitian().matrix()).frob_norm(),
                copies_used: copies - report.leftover,
            })
        }
        EstimatorKind::KOutcome => {
            let k = config.k.expect("validated");
            let rho = state_factory(&config.state, size, rng)?;
            let report = k_outcome_run(&rho, k, copies, rng)?;
            let est = report.estimate.hermitian();
            Ok(TrialResult {
                trace_error: trace_distance(est, rho.hermitian())?,
                hs_error: (est.matrix() - rho.hermitian().matrix()).frob_norm(),
                copies_used: copies - report.leftover_copies,
            })
        }
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run the whole grid. Cell `c` (in `sizes x eps x copies` row-major
/// order), trial `t` uses `derive_seed(config.seed, c, t)`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput, HarnessError> {
    config.validate()?;
    let mut mubs = BTreeMap::new();
    if matches!(config.estimator, EstimatorKind::Mub | EstimatorKind::KOutcome) {
        for &d in &config.sizes {
            mubs.entry(d).or_insert(build_mub(d)?);
        }
    }

    let mut records = Vec::new();
    let mut cells = Vec::new();
    let mut cell_idx = 0u64;
    for &size in &config.sizes {
        for &eps in &config.eps {
            for &copies in &config.copies {
                let mut trace_errs = Vec::with_capacity(config.trials as usize);
                let mut hs_errs = Vec::with_capacity(config.trials as usize);
                let mut successes = 0u64;
                for trial in 0..config.trials {
                    let seed = derive_seed(config.seed, cell_idx, trial);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let started = Instant::now();
                    let result = run_trial(config, &mubs, size, copies, &mut rng)?;
                    let wall_ms = if config.record_wall_time {
                        started.elapsed().as_millis() as u64
                    } else {
                        0
                    };
                    let success = result.trace_error <= eps;
                    successes += u64::from(success);
                    trace_errs.push(result.trace_error);
                    hs_errs.push(result.hs_error);
                    records.push(TrialRecord {
                        trial,
                        estimator: config.estimator,
                        n_or_d: size,
                        eps,
                        copies: result.copies_used,
                        trace_error: result.trace_error,
                        hs_error: result.hs_error,
                        success,
                        seed,
                        wall_ms,
                    });
                }
                let (mean_t, se_t) = mean_and_stderr(&trace_errs);
                let (mean_h, se_h) = mean_and_stderr(&hs_errs);
                cells.push(CellSummary {
                    estimator: config.estimator,
                    n_or_d: size,
                    eps,
                    copies_requested: copies,
                    trials: config.trials,
                    success_rate: successes as f64 / config.trials as f64,
                    mean_trace_error: mean_t,
                    stderr_trace_error: se_t,
                    mean_hs_error: mean_h,
                    stderr_hs_error: se_h,
                });
                cell_idx += 1;
            }
        }
    }
    Ok(SweepOutput { records, summary: SweepSummary { cells } })
}

/// CSV text with the fixed column set; header always present, records in
/// input order.
pub fn csv_string(records: &[TrialRecord]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| HarnessError::Csv {
            path: "<memory>".into(),
            why: e.to_string(),
        })?;
    }
    // serde sees no rows to take the header from when the list is empty.
    if records.is_empty() {
        w.write_record([
            "trial",
            "estimator",
            "N_or_d",
            "eps",
            "copies",
            "trace_error",
            "hs_error",
            "success",
            "seed",
            "wall_ms",
        ])
        .map_err(|e| HarnessError::Csv { path: "<memory>".into(), why: e.to_string() })?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Csv { path: "<memory>".into(), why: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf8"))
}

pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<(), HarnessError> {
    let text = csv_string(records)?;
    std::fs::write(path, text)
        .map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e })
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e })?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut records = Vec::new();
    for row in reader.deserialize() {
        let record: TrialRecord = row
            .map_err(|e| HarnessError::Csv { path: path.display().to_string(), why: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}

pub fn emit_summary_json(summary: &SweepSummary, path: &Path) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e })
}

/// One whitespace-separated data file per (size, eps) group with rows
/// `copies mean_trace_error stderr`, for external plotting. Returns the
/// paths written.
pub fn emit_plot_data(summary: &SweepSummary, dir: &Path) -> Result<Vec<String>, HarnessError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| HarnessError::Io { path: dir.display().to_string(), source: e })?;
    let mut groups: BTreeMap<(usize, String), Vec<&CellSummary>> = BTreeMap::new();
    for cell in &summary.cells {
        groups.entry((cell.n_or_d, format!("{}", cell.eps))).or_default().push(cell);
    }
    let mut written = Vec::new();
    for ((size, eps), mut cells) in groups {
        cells.sort_by_key(|c| c.copies_requested);
        let name = format!("{}_{}_{}.dat", cells[0].estimator, size, eps);
        let path = dir.join(&name);
        let mut text = String::from("# copies mean_trace_error stderr\n");
        for cell in cells {
            text.push_str(&format!(
                "{} {} {}\n",
                cell.copies_requested, cell.mean_trace_error, cell.stderr_trace_error
            ));
        }
        std::fs::write(&path, text)
            .map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e })?;
        written.push(path.display().to_string());
    }
    Ok(written)
}
