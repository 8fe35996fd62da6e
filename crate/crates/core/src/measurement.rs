//! POVMs and the information channel they induce on traceless
//! perturbations.
//!
//! For a measurement with effects `M_x`, the channel sends a Hermitian
//! direction `A` to `sum_x M_x Tr[M_x A] / Tr[M_x]`. Vectorizing turns
//! the channel into the `d^2 x d^2` PSD matrix
//! `C = sum_x |M_x>><<M_x| / Tr[M_x]`, whose quadratic form measures how
//! much of a perturbation the measurement can see. Everything downstream
//! (ensemble eigenvalues, trace-norm budgets, sample-complexity bounds)
//! reads off this one object.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    eig_herm, eigvals_herm, vectorize, C64, ComplexMatrix, DensityMatrix, HermitianMatrix,
    LinalgError, MatrixJson, MatrixVector,
};
use crate::pauli::{all_settings, BasisSetting, OutcomeString, PauliString};
use crate::sampling;
use crate::tol;

/// Hard cap on outcome count; beyond this the dense channel bookkeeping
/// stops being a sensible tool.
pub const MAX_OUTCOMES: usize = 4096;

/// The dense channel matrix has dimension `d^2`, so `d` is capped at the
/// square root of the crate's matrix budget.
pub const MAX_MIC_DIM: usize = 16;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("POVM needs at least one effect")]
    Empty,
    #[error("POVM has {0} effects, cap is {MAX_OUTCOMES}")]
    TooManyEffects(usize),
    #[error("effect {index} has eigenvalue {min_eig:.3e}, below the PSD tolerance")]
    EffectNotPsd { index: usize, min_eig: f64 },
    #[error("effects sum to identity only up to {defect:.3e}, outside tolerance")]
    Incomplete { defect: f64 },
    #[error("effect {index} dimension {got} does not match {expected}")]
    EffectDim { index: usize, expected: usize, got: usize },
    #[error("{got} labels for {effects} effects")]
    LabelCount { effects: usize, got: usize },
    #[error("channel matrix needs d <= {MAX_MIC_DIM}, got {0}")]
    DimTooLarge(usize),
    #[error("direction dimension {got} does not match POVM dimension {expected}")]
    DirectionDim { expected: usize, got: usize },
    #[error("outcome probability {0:.3e} below the clip floor")]
    BornNegative(f64),
    #[error("outcome probabilities sum to {0:.12}, outside tolerance")]
    BornSum(f64),
    #[error("argument {name} = {value} out of range: {need}")]
    BadArgument { name: &'static str, value: f64, need: &'static str },
    #[error("POVM JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Validated measurement: PSD effects summing to the identity.
#[derive(Clone)]
pub struct Povm {
    d: usize,
    effects: Vec<HermitianMatrix>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianMatrix>, labels: Option<Vec<String>>) -> Result<Self, MeasurementError> {
        if effects.is_empty() {
            return Err(MeasurementError::Empty);
        }
        if effects.len() > MAX_OUTCOMES {
            return Err(MeasurementError::TooManyEffects(effects.len()));
        }
        let d = effects[0].dim();
        let mut sum = ComplexMatrix::zeros(d);
        for (index, eff) in effects.iter().enumerate() {
            if eff.dim() != d {
                return Err(MeasurementError::EffectDim { index, expected: d, got: eff.dim() });
            }
            let evs = eigvals_herm(eff)?;
            let min_eig = evs.last().copied().unwrap_or(0.0);
            if min_eig < -tol::POVM_EFFECT_PSD {
                return Err(MeasurementError::EffectNotPsd { index, min_eig });
            }
            sum = &sum + eff.matrix();
        }
        let defect = (&sum - &ComplexMatrix::identity(d)).max_entry_abs();
        if defect > tol::POVM_COMPLETENESS {
            return Err(MeasurementError::Incomplete { defect });
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != effects.len() {
                    return Err(MeasurementError::LabelCount { effects: effects.len(), got: l.len() });
                }
                l
            }
            None => (0..effects.len()).map(|i| i.to_string()).collect(),
        };
        Ok(Povm { d, effects, labels })
    }

    /// Projective measurement in the computational basis.
    pub fn computational(d: usize) -> Result<Self, MeasurementError> {
        if d == 0 {
            return Err(MeasurementError::Empty);
        }
        let effects = (0..d)
            .map(|i| {
                let m = ComplexMatrix::from_fn(d, |r, c| {
                    if r == i && c == i {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                HermitianMatrix::symmetrize(m)
            })
            .collect();
        let labels = (0..d).map(|i| i.to_string()).collect();
        Povm::new(effects, Some(labels))
    }

    /// The `2^n` rank-one effects of a Pauli basis setting, labeled by
    /// outcome string.
    pub fn from_basis(b: &BasisSetting) -> Result<Self, MeasurementError> {
        let n = b.n_qubits();
        let mut effects = Vec::with_capacity(1 << n);
        let mut labels = Vec::with_capacity(1 << n);
        for idx in 0..(1usize << n) {
            let o = OutcomeString::from_index(idx, n)
                .map_err(|e| MeasurementError::Json(e.to_string()))?;
            let eff = b.effect(&o).map_err(|e| MeasurementError::Json(e.to_string()))?;
            effects.push(eff);
            labels.push(o.to_string());
        }
        Povm::new(effects, Some(labels))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Outcome probabilities on `rho`, clipped and renormalized per the
    /// crate tolerances.
    pub fn born(&self, rho: &DensityMatrix) -> Result<Vec<f64>, MeasurementError> {
        if rho.dim() != self.d {
            return Err(MeasurementError::DirectionDim { expected: self.d, got: rho.dim() });
        }
        let mut probs = Vec::with_capacity(self.effects.len());
        for eff in &self.effects {
            let p = eff.matrix().hs_inner(rho.matrix()).re;
            if p < -tol::BORN_CLIP {
                return Err(MeasurementError::BornNegative(p));
            }
            probs.push(p.max(0.0));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol::BORN_SUM {
            return Err(MeasurementError::BornSum(sum));
        }
        for p in &mut probs {
            *p /= sum;
        }
        Ok(probs)
    }

    /// Tally of `shots` independent outcomes.
    pub fn sample_counts(
        &self,
        rho: &DensityMatrix,
        shots: u64,
        rng: &mut impl rand::Rng,
    ) -> Result<Vec<u64>, MeasurementError> {
        let probs = self.born(rho)?;
        Ok(sampling::sample_counts(&probs, shots, rng))
    }
}

/// Channel image of a Hermitian direction:
/// `sum_x M_x Tr[M_x A] / Tr[M_x]`. Effects with trace below the floor
/// contribute nothing and are skipped.
pub fn mic_apply(povm: &Povm, a: &HermitianMatrix) -> Result<HermitianMatrix, MeasurementError> {
    if a.dim() != povm.dim() {
        return Err(MeasurementError::DirectionDim { expected: povm.dim(), got: a.dim() });
    }
    let mut out = ComplexMatrix::zeros(povm.dim());
    for eff in povm.effects() {
        let t = eff.trace().re;
        if t < tol::EFFECT_TRACE_FLOOR {
            continue;
        }
        let overlap = eff.matrix().hs_inner(a.matrix()).re;
        out = &out + &eff.matrix().scale(overlap / t);
    }
    Ok(HermitianMatrix::symmetrize(out))
}

/// Quadratic form `sum_x |Tr[M_x V]|^2 / Tr[M_x]` of the channel matrix on
/// a Hermitian direction, computed without building the dense matrix.
pub fn mic_quadratic_form(povm: &Povm, v: &HermitianMatrix) -> Result<f64, MeasurementError> {
    if v.dim() != povm.dim() {
        return Err(MeasurementError::DirectionDim { expected: povm.dim(), got: v.dim() });
    }
    let mut acc = 0.0;
    for eff in povm.effects() {
        let t = eff.trace().re;
        if t < tol::EFFECT_TRACE_FLOOR {
            continue;
        }
        let overlap = eff.matrix().hs_inner(v.matrix());
        acc += overlap.norm_sqr() / t;
    }
    Ok(acc)
}

/// Trace norm of the channel matrix, `sum_x Tr[M_x^2] / Tr[M_x]`. The
/// matrix is PSD so this equals its trace; for a basis measurement it is
/// exactly `d`, and for any `k`-outcome POVM it is at most `min(k, d)`.
pub fn mic_trace_norm(povm: &Povm) -> f64 {
    povm.effects()
        .iter()
        .filter_map(|eff| {
            let t = eff.trace().re;
            if t < tol::EFFECT_TRACE_FLOOR {
                return None;
            }
            Some(eff.matrix().hs_inner(eff.matrix()).re / t)
        })
        .sum()
}

/// Dense `d^2 x d^2` channel matrix in the vectorized picture.
pub struct MicMatrix {
    d: usize,
    m: ComplexMatrix,
}

impl MicMatrix {
    pub fn new(povm: &Povm) -> Result<Self, MeasurementError> {
        let d = povm.dim();
        if d > MAX_MIC_DIM {
            return Err(MeasurementError::DimTooLarge(d));
        }
        let d2 = d * d;
        let mut m = ComplexMatrix::zeros(d2);
        for eff in povm.effects() {
            let t = eff.trace().re;
            if t < tol::EFFECT_TRACE_FLOOR {
                continue;
            }
            let v = vectorize(eff.matrix());
            let entries = v.entries();
            for a in 0..d2 {
                for b in 0..d2 {
                    m[(a, b)] += entries[a] * entries[b].conj() / t;
                }
            }
        }
        // Trace must reproduce the closed form; a mismatch means the
        // vectorization convention broke somewhere.
        let tr = m.trace().re;
        let expect = mic_trace_norm(povm);
        if (tr - expect).abs() > tol::MIC_TRACE_IDENT {
            return Err(MeasurementError::Json(format!(
                "channel trace {tr} disagrees with closed form {expect}"
            )));
        }
        Ok(MicMatrix { d, m })
    }

    /// Averaged channel of several POVMs (a uniform measurement ensemble).
    pub fn ensemble(povms: &[Povm]) -> Result<Self, MeasurementError> {
        if povms.is_empty() {
            return Err(MeasurementError::Empty);
        }
        let d = povms[0].dim();
        let mut sum = ComplexMatrix::zeros(d * d);
        for p in povms {
            if p.dim() != d {
                return Err(MeasurementError::DirectionDim { expected: d, got: p.dim() });
            }
            let one = MicMatrix::new(p)?;
            sum = &sum + &one.m;
        }
        Ok(MicMatrix { d, m: sum.scale(1.0 / povms.len() as f64) })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    /// Defect checks: Hermitian and PSD within the crate tolerances.
    pub fn validate(&self) -> Result<(), MeasurementError> {
        let defect = self.m.hermiticity_defect();
        if defect > tol::MIC_HERMITICITY {
            return Err(MeasurementError::Json(format!("channel hermiticity defect {defect:.3e}")));
        }
        let evs = self.eigenvalues()?;
        let min_eig = evs.last().copied().unwrap_or(0.0);
        if min_eig < -tol::MIC_PSD {
            return Err(MeasurementError::Json(format!("channel eigenvalue {min_eig:.3e} below zero")));
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>, MeasurementError> {
        Ok(eigvals_herm(&HermitianMatrix::symmetrize(self.m.clone()))?)
    }

    /// `<<V| C |V>>` for a vectorized direction.
    pub fn quadratic_form(&self, v: &MatrixVector) -> Result<f64, MeasurementError> {
        if v.dim() != self.d {
            return Err(MeasurementError::DirectionDim { expected: self.d, got: v.dim() });
        }
        let mv = self.m.mul_vec(v.entries());
        let out: C64 = v.entries().iter().zip(&mv).map(|(a, b)| a.conj() * b).sum();
        Ok(out.re)
    }

    /// Residual of `C |v>> = lambda |v>>`; small iff `v` is an eigenvector.
    pub fn eigen_residual(&self, v: &MatrixVector, lambda: f64) -> Result<f64, MeasurementError> {
        if v.dim() != self.d {
            return Err(MeasurementError::DirectionDim { expected: self.d, got: v.dim() });
        }
        let mv = self.m.mul_vec(v.entries());
        let mut worst = 0.0f64;
        for (a, b) in mv.iter().zip(v.entries()) {
            worst = worst.max((a - b * C64::new(lambda, 0.0)).norm());
        }
        Ok(worst)
    }
}

/// Channel eigenvalue of a normalized Pauli direction under one basis
/// setting: 1 when the word corresponds to the setting, else 0.
pub fn pauli_mic_eigenvalue(b: &BasisSetting, q: &PauliString) -> f64 {
    if crate::pauli::corresponds(q, b) {
        1.0
    } else {
        0.0
    }
}

/// Channel eigenvalue of a weight-`w` Pauli direction under the uniform
/// ensemble of all `3^n` settings: `3^-w`.
pub fn uniform_ensemble_eigenvalue(q: &PauliString) -> f64 {
    3f64.powi(-(q.weight() as i32))
}

/// The uniform Pauli-settings ensemble channel, built densely.
pub fn uniform_pauli_mic(n: usize) -> Result<MicMatrix, MeasurementError> {
    let settings = all_settings(n).map_err(|e| MeasurementError::Json(e.to_string()))?;
    let povms: Result<Vec<Povm>, MeasurementError> =
        settings.iter().map(Povm::from_basis).collect();
    MicMatrix::ensemble(&povms?)
}

/// Copy-count lower bound, reported with its caveats attached.
#[derive(Clone, Debug, Serialize)]
pub struct PlugPlayBound {
    pub d: usize,
    pub eps: f64,
    /// Largest channel quadratic form over the perturbation directions.
    pub sup_term: f64,
    /// `d^4 / (eps^2 * sup_term)`; a copy count up to absolute constants.
    pub body: f64,
    /// Always true: the bound suppresses universal constants.
    pub order_only: bool,
    /// Whether `eps <= 1/200`, the regime the guarantee is proved in.
    pub eps_in_regime: bool,
}

pub fn plug_play_lower_bound(d: usize, eps: f64, sup_term: f64) -> Result<PlugPlayBound, MeasurementError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(MeasurementError::BadArgument { name: "eps", value: eps, need: "positive and finite" });
    }
    if !(sup_term > 0.0 && sup_term.is_finite()) {
        return Err(MeasurementError::BadArgument {
            name: "sup_term",
            value: sup_term,
            need: "positive and finite",
        });
    }
    if d < 2 {
        return Err(MeasurementError::BadArgument { name: "d", value: d as f64, need: "at least 2" });
    }
    let body = (d as f64).powi(4) / (eps * eps * sup_term);
    Ok(PlugPlayBound { d, eps, sup_term, body, order_only: true, eps_in_regime: eps <= 1.0 / 200.0 })
}

/// Random `k`-outcome POVM: normalize Wishart blocks by the inverse square
/// root of their sum.
pub fn random_povm(d: usize, k: usize, rng: &mut impl rand::Rng) -> Result<Povm, MeasurementError> {
    if k == 0 {
        return Err(MeasurementError::Empty);
    }
    if k > MAX_OUTCOMES {
        return Err(MeasurementError::TooManyEffects(k));
    }
    let mut blocks = Vec::with_capacity(k);
    let mut total = ComplexMatrix::zeros(d);
    for _ in 0..k {
        let g = ComplexMatrix::from_fn(d, |_, _| {
            C64::new(sampling::standard_normal(rng), sampling::standard_normal(rng))
        });
        let a = &g * &g.dagger();
        total = &total + &a;
        blocks.push(a);
    }
    let dec = eig_herm(&HermitianMatrix::symmetrize(total))?;
    // Wishart sums of k d-dim blocks are almost surely full rank; fail
    // loudly on the measure-zero degenerate draw instead of inverting noise.
    let min_eig = dec.values.last().copied().unwrap_or(0.0);
    if min_eig < 1e-9 {
        return Err(MeasurementError::BadArgument {
            name: "total",
            value: min_eig,
            need: "full-rank effect sum",
        });
    }
    let mut inv_sqrt = ComplexMatrix::zeros(d);
    for (idx, &lam) in dec.values.iter().enumerate() {
        let s = 1.0 / lam.sqrt();
        for r in 0..d {
            for c in 0..d {
                inv_sqrt[(r, c)] += dec.vectors[(r, idx)] * dec.vectors[(c, idx)].conj() * s;
            }
        }
    }
    let effects = blocks
        .into_iter()
        .map(|a| HermitianMatrix::symmetrize(&(&inv_sqrt * &a) * &inv_sqrt))
        .collect();
    Povm::new(effects, None)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PovmJson {
    Bare(Vec<MatrixJson>),
    Labeled { effects: Vec<MatrixJson>, labels: Option<Vec<String>> },
}

/// Parse a POVM from JSON: either a bare array of matrices or an object
/// `{"effects": [...], "labels": [...]}`. The result is fully validated.
pub fn povm_from_json(s: &str) -> Result<Povm, MeasurementError> {
    let parsed: PovmJson = serde_json::from_str(s).map_err(|e| MeasurementError::Json(e.to_string()))?;
    let (mats, labels) = match parsed {
        PovmJson::Bare(mats) => (mats, None),
        PovmJson::Labeled { effects, labels } => (effects, labels),
    };
    let effects: Result<Vec<HermitianMatrix>, MeasurementError> = mats
        .into_iter()
        .map(|mj| {
            let m = mj.into_matrix()?;
            HermitianMatrix::new(m).map_err(MeasurementError::from)
        })
        .collect();
    Povm::new(effects?, labels)
}

pub fn povm_to_json(povm: &Povm) -> String {
    let effects: Vec<MatrixJson> =
        povm.effects().iter().map(|e| MatrixJson::from_matrix(e.matrix())).collect();
    let labels = Some(povm.labels().to_vec());
    serde_json::to_string(&PovmJson::Labeled { effects, labels }).expect("povm serializes")
}
