//! The estimators: Pauli-settings tomography, MUB least-squares with
//! projection, and k-outcome tomography through a distributed simulation
//! protocol.
//!
//! The Pauli estimator measures every one of the `3^N` basis settings the
//! same number of times, tallies a signed counter per Pauli word, and
//! inverts the word decomposition. Its error analysis is for the
//! unprojected output, so [`pauli_estimate`] returns a Hermitian matrix
//! that is generally not PSD; project it only when a density matrix is
//! required.

pub mod mub;
pub mod sim;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{DensityMatrix, HermitianMatrix, LinalgError};
use crate::pauli::{
    all_settings, corresponding_words, sign_for_index, BasisSetting, PauliString, MAX_QUBITS,
};
use crate::tol;

#[derive(Debug, Error)]
pub enum TomographyError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    BadQubitCount(usize),
    #[error("dimension {0} is not a supported power of two")]
    UnsupportedDim(usize),
    #[error("eps {0} outside (0, 1]")]
    EpsOutOfRange(f64),
    #[error("delta {0} outside (0, 1/3)")]
    DeltaOutOfRange(f64),
    #[error("argument {name} = {value} out of range: {need}")]
    BadArgument { name: &'static str, value: f64, need: &'static str },
    #[error("outcome tally has {got} entries, setting needs {expected}")]
    TallyShape { expected: usize, got: usize },
    #[error("outcome tally sums to {got}, run records {expected} shots per setting")]
    TallyShotCount { expected: u64, got: u64 },
    #[error("setting {0} recorded twice")]
    DuplicateSetting(String),
    #[error("tally sheet has {have} of {need} settings")]
    IncompleteTallies { have: usize, need: usize },
    #[error("frequency row {row} sums to {sum:.12}, outside tolerance")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("frequency row {0} is empty; estimator needs every basis observed")]
    EmptyRow(usize),
    #[error("frequency table shape {rows}x{cols}, need {need_rows}x{need_cols}")]
    FrequencyShape { rows: usize, cols: usize, need_rows: usize, need_cols: usize },
    #[error("simulation needs {need} pre-drawn samples, got {got}")]
    NotEnoughSamples { need: usize, got: usize },
    #[error("outcome index {got} out of range for d = {d}")]
    OutcomeRange { d: usize, got: usize },
    #[error("k = {k} must be at least 2 and less than d = {d}")]
    BadOutcomeCount { d: usize, k: usize },
    #[error("brute-force enumeration over {0} tuples exceeds the cap")]
    EnumerationTooLarge(u128),
    #[error(transparent)]
    Pauli(#[from] crate::pauli::PauliError),
    #[error(transparent)]
    Measurement(#[from] crate::measurement::MeasurementError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Copy budget of the Pauli estimator for target accuracy `eps` (trace
/// distance) and failure probability `delta`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CopiesPlan {
    pub n_qubits: usize,
    pub eps: f64,
    pub delta: f64,
    /// Shots per setting, `ceil((3 + 2 sqrt 2) 10^N ln(1/delta) / (3^N eps^2))`.
    pub shots_per_setting: u64,
    /// Total copies, shots times `3^N` settings.
    pub total_copies: u64,
}

pub fn pauli_copies_needed(n_qubits: usize, eps: f64, delta: f64) -> Result<CopiesPlan, TomographyError> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(TomographyError::BadQubitCount(n_qubits));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(TomographyError::EpsOutOfRange(eps));
    }
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return Err(TomographyError::DeltaOutOfRange(delta));
    }
    let settings = 3f64.powi(n_qubits as i32);
    let m_real = (3.0 + 2.0 * 2f64.sqrt()) * 10f64.powi(n_qubits as i32) * (1.0 / delta).ln()
        / (settings * eps * eps);
    let m = m_real.ceil() as u64;
    Ok(CopiesPlan {
        n_qubits,
        eps,
        delta,
        shots_per_setting: m,
        total_copies: m * 3u64.pow(n_qubits as u32),
    })
}

/// Mean Hilbert-Schmidt error budget of the Pauli estimator:
/// `sqrt(5^N / (m 3^N))`.
pub fn expected_hs_bound(n_qubits: usize, m: u64) -> Result<f64, TomographyError> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(TomographyError::BadQubitCount(n_qubits));
    }
    if m == 0 {
        return Err(TomographyError::BadArgument { name: "m", value: 0.0, need: "positive" });
    }
    Ok((5f64.powi(n_qubits as i32) / (m as f64 * 3f64.powi(n_qubits as i32))).sqrt())
}

/// Signed tallies of the Pauli run: one counter per word, fed by every
/// setting the word corresponds to.
pub struct TallySheet {
    n_qubits: usize,
    shots_per_setting: u64,
    sums: Vec<i64>,
    counts: Vec<u64>,
    recorded: Vec<bool>,
    settings_recorded: usize,
}

impl TallySheet {
    pub fn new(n_qubits: usize, shots_per_setting: u64) -> Result<Self, TomographyError> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(TomographyError::BadQubitCount(n_qubits));
        }
        if shots_per_setting == 0 {
            return Err(TomographyError::BadArgument { name: "shots_per_setting", value: 0.0, need: "positive" });
        }
        let words = 1usize << (2 * n_qubits);
        Ok(TallySheet {
            n_qubits,
            shots_per_setting,
            sums: vec![0; words],
            counts: vec![0; words],
            recorded: vec![false; words],
            settings_recorded: 0,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots_per_setting(&self) -> u64 {
        self.shots_per_setting
    }

    pub fn settings_recorded(&self) -> usize {
        self.settings_recorded
    }

    pub fn is_complete(&self) -> bool {
        self.settings_recorded == 3usize.pow(self.n_qubits as u32)
    }

    /// Signed tally of a word across all settings recorded so far.
    pub fn mu(&self, q: &PauliString) -> i64 {
        self.sums[q.packed() as usize]
    }

    /// Shots that contributed to a word's tally; `m 3^(N-w)` once
    /// complete.
    pub fn count(&self, q: &PauliString) -> u64 {
        self.counts[q.packed() as usize]
    }

    /// Fold one setting's outcome histogram into the tallies.
    pub fn record_setting(
        &mut self,
        b: &BasisSetting,
        outcome_counts: &[u64],
    ) -> Result<(), TomographyError> {
        let n = self.n_qubits;
        if b.n_qubits() != n {
            return Err(TomographyError::BadQubitCount(b.n_qubits()));
        }
        if outcome_counts.len() != 1 << n {
            return Err(TomographyError::TallyShape { expected: 1 << n, got: outcome_counts.len() });
        }
        let total: u64 = outcome_counts.iter().sum();
        if total != self.shots_per_setting {
            return Err(TomographyError::TallyShotCount { expected: self.shots_per_setting, got: total });
        }
        let key = b.word().packed() as usize;
        if self.recorded[key] {
            return Err(TomographyError::DuplicateSetting(b.to_string()));
        }
        self.recorded[key] = true;
        self.settings_recorded += 1;
        for q in corresponding_words(b) {
            let code = q.packed() as usize;
            let mut signed = 0i64;
            for (idx, &cnt) in outcome_counts.iter().enumerate() {
                if cnt != 0 {
                    signed += sign_for_index(&q, idx) as i64 * cnt as i64;
                }
            }
            self.sums[code] += signed;
            self.counts[code] += total;
        }
        Ok(())
    }
}

/// Measure every setting `m` times and tally.
pub fn pauli_tomography_run(
    rho: &DensityMatrix,
    m: u64,
    rng: &mut impl Rng,
) -> Result<TallySheet, TomographyError> {
    let d = rho.dim();
    let n = d.trailing_zeros() as usize;
    if d != 1 << n || !(1..=MAX_QUBITS).contains(&n) {
        return Err(TomographyError::UnsupportedDim(d));
    }
    let mut sheet = TallySheet::new(n, m)?;
    for b in all_settings(n)? {
        let counts = crate::pauli::sample_outcome_counts(rho, &b, m, rng)?;
        sheet.record_setting(&b, &counts)?;
    }
    Ok(sheet)
}

/// Invert the tallies: `sum_P mu_P / (count_P 2^N) P`, identity included,
/// so the output always has unit trace. Not projected to PSD; the error
/// analysis is for this raw estimator.
pub fn pauli_estimate(sheet: &TallySheet) -> Result<HermitianMatrix, TomographyError> {
    if !sheet.is_complete() {
        return Err(TomographyError::IncompleteTallies {
            have: sheet.settings_recorded,
            need: 3usize.pow(sheet.n_qubits as u32),
        });
    }
    let n = sheet.n_qubits;
    let d = 1usize << n;
    let mut coeffs = std::collections::BTreeMap::new();
    for q in crate::pauli::enumerate_by_weight(n, crate::pauli::WeightOrder::Ascending)? {
        let count = sheet.count(&q);
        debug_assert_eq!(
            count,
            sheet.shots_per_setting * 3u64.pow((n - q.weight()) as u32),
            "complete sheet count identity"
        );
        let mean = sheet.mu(&q) as f64 / count as f64;
        coeffs.insert(q, mean / d as f64);
    }
    Ok(crate::pauli::reconstruct(n, 1.0, &coeffs)?)
}

/// Per-basis empirical conditional frequencies, one row per measurement
/// basis of a MUB family (`d + 1` rows of `d` entries).
pub struct FrequencyVector {
    d: usize,
    rows: Vec<Vec<f64>>,
    empty: Vec<bool>,
}

impl FrequencyVector {
    /// Rows must each be a probability vector; use
    /// [`FrequencyVector::from_counts`] for raw tallies.
    pub fn new(d: usize, rows: Vec<Vec<f64>>) -> Result<Self, TomographyError> {
        if rows.len() != d + 1 || rows.iter().any(|r| r.len() != d) {
            return Err(TomographyError::FrequencyShape {
                rows: rows.len(),
                cols: rows.first().map(|r| r.len()).unwrap_or(0),
                need_rows: d + 1,
                need_cols: d,
            });
        }
        for (row, r) in rows.iter().enumerate() {
            if r.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(TomographyError::RowNotNormalized { row, sum: f64::NAN });
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > tol::FREQ_ROW_SUM {
                return Err(TomographyError::RowNotNormalized { row, sum });
            }
        }
        let empty = vec![false; d + 1];
        Ok(FrequencyVector { d, rows, empty })
    }

    /// Normalize per-basis outcome tallies; all-zero rows are kept as
    /// zeros and flagged empty.
    pub fn from_counts(d: usize, counts: &[Vec<u64>]) -> Result<Self, TomographyError> {
        if counts.len() != d + 1 || counts.iter().any(|r| r.len() != d) {
            return Err(TomographyError::FrequencyShape {
                rows: counts.len(),
                cols: counts.first().map(|r| r.len()).unwrap_or(0),
                need_rows: d + 1,
                need_cols: d,
            });
        }
        let mut rows = Vec::with_capacity(d + 1);
        let mut empty = Vec::with_capacity(d + 1);
        for r in counts {
            let total: u64 = r.iter().sum();
            if total == 0 {
                rows.push(vec![0.0; d]);
                empty.push(true);
            } else {
                rows.push(r.iter().map(|&c| c as f64 / total as f64).collect());
                empty.push(false);
            }
        }
        Ok(FrequencyVector { d, rows, empty })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn is_row_empty(&self, row: usize) -> bool {
        self.empty[row]
    }

    pub fn is_complete(&self) -> bool {
        !self.empty.iter().any(|&e| e)
    }

    /// Swap an empty row for the uniform distribution (the caller's
    /// fallback policy; the substitution is recorded by the caller, not
    /// here).
    pub fn fill_empty_uniform(&mut self) -> usize {
        let mut filled = 0;
        for (row, e) in self.empty.iter_mut().enumerate() {
            if *e {
                self.rows[row] = vec![1.0 / self.d as f64; self.d];
                *e = false;
                filled += 1;
            }
        }
        filled
    }
}
