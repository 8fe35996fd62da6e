//! Hard-instance families and the sample-complexity calculus built on
//! them.
//!
//! The construction perturbs the maximally mixed state along a packing of
//! traceless orthonormal directions: a sign vector `z` picks the state
//! `sigma_z = I/d + gamma * (c eps / sqrt(d ell)) * sum_i z_i V_i`, where
//! `gamma` clamps the spectral norm so `sigma_z` stays a density matrix.
//! Distinguishing the `2^ell` states pins down `z`, so any estimator that
//! works must carry enough mutual information through its measurement
//! channel; the bounds here turn that into copy-count floors.

use rand::{Rng, RngExt};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    eigvals_herm, trace_distance, ComplexMatrix, DensityMatrix, HermitianMatrix, LinalgError,
};
use crate::pauli::{enumerate_by_weight, PauliString, WeightOrder};
use crate::tol;

/// Cap for the exhaustive-decode experiment (`2^ell` candidate states).
pub const MAX_DECODE_ELL: usize = 12;

/// Pure-arithmetic functions (counts, certificates) stay exact in u64/f64
/// up to this many qubits.
pub const MAX_ARITH_QUBITS: usize = 16;

#[derive(Debug, Error)]
pub enum HardnessError {
    #[error("basis size {ell} outside [d^2/2, d^2-1] = [{lo}, {hi}]")]
    BadBasisSize { ell: usize, lo: usize, hi: usize },
    #[error("direction {index} has trace magnitude {trace:.3e}, not traceless")]
    NotTraceless { index: usize, trace: f64 },
    #[error("directions {i} and {j} have inner product {inner:.3e} off the identity pattern")]
    NotOrthonormal { i: usize, j: usize, inner: f64 },
    #[error("direction {index} dimension {got} does not match {expected}")]
    DirectionDim { index: usize, expected: usize, got: usize },
    #[error("sign vector length {got}, basis has {expected} directions")]
    ZLength { expected: usize, got: usize },
    #[error("sign vector entry {0}; entries must be +1 or -1")]
    ZValue(i8),
    #[error("decode experiment needs ell <= {MAX_DECODE_ELL}, got {0}")]
    EllTooLarge(usize),
    #[error("qubit count {0} outside 1..={MAX_ARITH_QUBITS}")]
    BadQubitCount(usize),
    #[error("argument {name} = {value} out of range: {need}")]
    BadArgument { name: &'static str, value: f64, need: &'static str },
    #[error(transparent)]
    Pauli(#[from] crate::pauli::PauliError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Traceless, Hilbert-Schmidt-orthonormal Hermitian directions, at least
/// `d^2/2` of them and at most `d^2 - 1`.
pub struct PerturbationBasis {
    d: usize,
    mats: Vec<HermitianMatrix>,
}

impl PerturbationBasis {
    pub fn new(mats: Vec<HermitianMatrix>) -> Result<Self, HardnessError> {
        let ell = mats.len();
        let d = mats.first().map(|m| m.dim()).unwrap_or(0);
        let lo = d * d / 2 + (d * d) % 2;
        let hi = d.saturating_mul(d).saturating_sub(1);
        if ell < lo || ell > hi {
            return Err(HardnessError::BadBasisSize { ell, lo, hi });
        }
        for (index, m) in mats.iter().enumerate() {
            if m.dim() != d {
                return Err(HardnessError::DirectionDim { index, expected: d, got: m.dim() });
            }
            let trace = m.trace().norm();
            if trace > tol::BASIS_TRACELESS {
                return Err(HardnessError::NotTraceless { index, trace });
            }
        }
        for i in 0..ell {
            for j in i..ell {
                let inner = mats[i].matrix().hs_inner(mats[j].matrix()).re;
                let expect = if i == j { 1.0 } else { 0.0 };
                if (inner - expect).abs() > tol::BASIS_ORTHO {
                    return Err(HardnessError::NotOrthonormal { i, j, inner });
                }
            }
        }
        Ok(PerturbationBasis { d, mats })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn directions(&self) -> &[HermitianMatrix] {
        &self.mats
    }

    /// Signed sum `sum_i z_i V_i` (no scaling).
    pub fn signed_sum(&self, z: &[i8]) -> Result<HermitianMatrix, HardnessError> {
        if z.len() != self.len() {
            return Err(HardnessError::ZLength { expected: self.len(), got: z.len() });
        }
        let mut acc = ComplexMatrix::zeros(self.d);
        for (zi, v) in z.iter().zip(&self.mats) {
            match zi {
                1 => acc = &acc + v.matrix(),
                -1 => acc = &acc - v.matrix(),
                other => return Err(HardnessError::ZValue(*other)),
            }
        }
        Ok(HermitianMatrix::symmetrize(acc))
    }
}

/// The `ell` heaviest non-identity Pauli words, normalized to unit
/// Hilbert-Schmidt norm. Ties inside a weight class break
/// lexicographically, so the basis is a deterministic function of
/// `(n, ell)`.
pub fn pauli_top_weight_basis(n: usize, ell: usize) -> Result<PerturbationBasis, HardnessError> {
    let words = enumerate_by_weight(n, WeightOrder::Descending)?;
    if ell > words.len() {
        let d = 1usize << n;
        return Err(HardnessError::BadBasisSize { ell, lo: d * d / 2, hi: d * d - 1 });
    }
    let d = 1usize << n;
    let scale = 1.0 / (d as f64).sqrt();
    let mats = words[..ell].iter().map(|p| p.matrix_of().scale(scale)).collect();
    PerturbationBasis::new(mats)
}

/// Words used by [`pauli_top_weight_basis`], in order.
pub fn top_weight_words(n: usize, ell: usize) -> Result<Vec<PauliString>, HardnessError> {
    let words = enumerate_by_weight(n, WeightOrder::Descending)?;
    if ell > words.len() {
        let d = 1usize << n;
        return Err(HardnessError::BadBasisSize { ell, lo: d * d / 2, hi: d * d - 1 });
    }
    Ok(words[..ell].to_vec())
}

fn binom_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Number of non-identity `n`-letter words of weight at least `n - w`.
pub fn g_of_w(n: usize, w: usize) -> Result<u64, HardnessError> {
    if !(1..=MAX_ARITH_QUBITS).contains(&n) {
        return Err(HardnessError::BadQubitCount(n));
    }
    let lo = n.saturating_sub(w).max(1);
    Ok((lo..=n).map(|v| binom_u64(n, v) * 3u64.pow(v as u32)).sum())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeightThreshold {
    pub n: usize,
    pub w: usize,
    pub g: u64,
    /// Whether `g >= d^2 / 2`, the size a packing basis needs.
    pub g_ge_half_d2: bool,
}

/// The working weight threshold `w = ceil(n/4)` and the size of the word
/// family it admits.
pub fn weight_threshold(n: usize) -> Result<WeightThreshold, HardnessError> {
    if !(1..=MAX_ARITH_QUBITS).contains(&n) {
        return Err(HardnessError::BadQubitCount(n));
    }
    let w = n.div_ceil(4);
    let g = g_of_w(n, w)?;
    let d2 = 4u64.pow(n as u32);
    Ok(WeightThreshold { n, w, g, g_ge_half_d2: 2 * g >= d2 })
}

/// Knobs of the hard-instance construction.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HardnessParams {
    /// Packing constant; the default `10 sqrt(2)` assumes the norm bound
    /// `kappa = sqrt(2)` on typical sign sums.
    pub c: f64,
    /// Target accuracy the family is hard at.
    pub eps: f64,
    /// Exponent of the atypical-set probability `e^{-alpha d}`.
    pub alpha: f64,
}

impl HardnessParams {
    pub fn new(eps: f64) -> Result<Self, HardnessError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(HardnessError::BadArgument { name: "eps", value: eps, need: "positive and finite" });
        }
        Ok(HardnessParams { c: 10.0 * 2f64.sqrt(), eps, alpha: 1.0 })
    }

    pub fn with_c(mut self, c: f64) -> Result<Self, HardnessError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(HardnessError::BadArgument { name: "c", value: c, need: "positive and finite" });
        }
        self.c = c;
        Ok(self)
    }

    /// The lower-bound guarantee is stated for `eps <= 1/200`.
    pub fn in_guarantee_regime(&self) -> bool {
        self.eps <= 1.0 / 200.0
    }

    /// The packing argument wants `c >= 10 kappa`; with an empirical
    /// `kappa` this can be checked after the fact.
    pub fn c_meets_kappa(&self, kappa: f64) -> bool {
        self.c >= 10.0 * kappa
    }

    /// Perturbation scale `c eps / sqrt(d ell)`.
    pub fn scale(&self, d: usize, ell: usize) -> f64 {
        self.c * self.eps / ((d * ell) as f64).sqrt()
    }
}

/// One member of the hard family, with the spectral bookkeeping that the
/// validity and separation checks need.
pub struct HardInstance {
    pub z: Vec<i8>,
    /// Spectral clamp `min(1, 1/(2 d ||Delta||_inf))` applied to keep the
    /// state PSD.
    pub clamp: f64,
    /// `c eps / sqrt(d ell)`.
    pub scale: f64,
    /// Operator norm of the unscaled sign sum `W_z`.
    pub w_op_norm: f64,
    /// `|| sigma_z - I/d ||_1` after clamping.
    pub trace_dist_from_mixed: f64,
    /// The clamped perturbation `sigma_z - I/d`.
    pub delta: HermitianMatrix,
    pub state: DensityMatrix,
}

impl HardInstance {
    /// Membership in the typical set: `||W_z||_inf <= kappa sqrt(d)`.
    pub fn in_g_set(&self, kappa: f64) -> bool {
        self.w_op_norm <= kappa * (self.state.dim() as f64).sqrt()
    }

    pub fn clamp_active(&self) -> bool {
        self.clamp < 1.0 - tol::CLAMP_SLACK
    }
}

/// Deterministic construction of `sigma_z` from a sign vector.
pub fn instance_from_z(
    basis: &PerturbationBasis,
    z: &[i8],
    params: &HardnessParams,
) -> Result<HardInstance, HardnessError> {
    let d = basis.dim();
    let ell = basis.len();
    let w = basis.signed_sum(z)?;
    let evs = eigvals_herm(&w)?;
    let w_op_norm = evs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let w_abs_sum: f64 = evs.iter().map(|e| e.abs()).sum();
    let w_min = evs.last().copied().unwrap_or(0.0);

    let scale = params.scale(d, ell);
    let delta_op = scale * w_op_norm;
    let clamp = if delta_op > 0.0 { (1.0 / (2.0 * d as f64 * delta_op)).min(1.0) } else { 1.0 };

    let factor = clamp * scale;
    let delta = w.scale(factor);
    let mixed = HermitianMatrix::symmetrize(ComplexMatrix::identity(d).scale(1.0 / d as f64));
    let state_h = mixed.add(&delta);
    // Smallest eigenvalue comes along for free from the spectrum of W; the
    // clamp guarantees it is at least 1/(2d).
    let min_eig = 1.0 / d as f64 + factor * w_min;
    let state = DensityMatrix::new_spectrum_checked(state_h, min_eig);

    Ok(HardInstance {
        z: z.to_vec(),
        clamp,
        scale,
        w_op_norm,
        trace_dist_from_mixed: factor * w_abs_sum,
        delta,
        state,
    })
}

/// Draw `z` uniformly from `{-1, +1}^ell` and build the instance.
pub fn sample_instance(
    basis: &PerturbationBasis,
    params: &HardnessParams,
    rng: &mut impl Rng,
) -> Result<HardInstance, HardnessError> {
    let z: Vec<i8> = (0..basis.len()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    instance_from_z(basis, &z, params)
}

/// Nearest-rank `q`-quantile of `||W_z||_inf / sqrt(d)` over random sign
/// vectors; the empirical stand-in for the typical-set constant.
pub fn empirical_kappa(
    basis: &PerturbationBasis,
    samples: usize,
    q: f64,
    rng: &mut impl Rng,
) -> Result<f64, HardnessError> {
    if samples == 0 {
        return Err(HardnessError::BadArgument { name: "samples", value: 0.0, need: "positive" });
    }
    if !(0.0 < q && q <= 1.0) {
        return Err(HardnessError::BadArgument { name: "q", value: q, need: "in (0, 1]" });
    }
    let sqrt_d = (basis.dim() as f64).sqrt();
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z: Vec<i8> =
            (0..basis.len()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let w = basis.signed_sum(&z)?;
        let evs = eigvals_herm(&w)?;
        let op = evs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        vals.push(op / sqrt_d);
    }
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite norms"));
    let idx = ((q * samples as f64).ceil() as usize).clamp(1, samples) - 1;
    Ok(vals[idx])
}

pub fn hamming(a: &[i8], b: &[i8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeparationCheck {
    pub hamming: usize,
    /// `|| sigma_a - sigma_b ||_1`.
    pub trace_dist: f64,
    /// `c eps Ham(a,b) / (2 kappa ell)`.
    pub floor: f64,
    /// Whether either instance had its clamp engaged; the floor is only
    /// guaranteed for unclamped typical-set pairs.
    pub clamped: bool,
}

/// Both sides of the packing separation inequality for a pair of
/// instances.
pub fn hamming_separation_margin(
    a: &HardInstance,
    b: &HardInstance,
    params: &HardnessParams,
    kappa: f64,
) -> Result<SeparationCheck, HardnessError> {
    if a.z.len() != b.z.len() {
        return Err(HardnessError::ZLength { expected: a.z.len(), got: b.z.len() });
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(HardnessError::BadArgument { name: "kappa", value: kappa, need: "positive and finite" });
    }
    let ell = a.z.len();
    let ham = hamming(&a.z, &b.z);
    let trace_dist = trace_distance(a.state.hermitian(), b.state.hermitian())?;
    let floor = params.c * params.eps * ham as f64 / (2.0 * kappa * ell as f64);
    Ok(SeparationCheck {
        hamming: ham,
        trace_dist,
        floor,
        clamped: a.clamp_active() || b.clamp_active(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MiVariant {
    /// `8 t c^2 eps^2 s / ell^2 + 16 e^{-alpha d} t c^2 eps^2`, with `s`
    /// the largest per-instance sum of channel quadratic forms over the
    /// basis directions.
    PartialSup,
    /// `16 t c^2 eps^2 s / ell^2`, with `s` the channel trace norm; the
    /// coarser bound that needs no per-instance supremum.
    TraceNorm,
}

/// Upper bound on the average per-bit mutual information carried by `t`
/// measured copies of a hard instance.
pub fn assouad_mi_upper(
    copies: f64,
    d: usize,
    ell: usize,
    params: &HardnessParams,
    s: f64,
    variant: MiVariant,
) -> Result<f64, HardnessError> {
    if !(copies >= 0.0 && copies.is_finite()) {
        return Err(HardnessError::BadArgument { name: "copies", value: copies, need: "nonnegative and finite" });
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(HardnessError::BadArgument { name: "s", value: s, need: "nonnegative and finite" });
    }
    if ell == 0 {
        return Err(HardnessError::BadArgument { name: "ell", value: 0.0, need: "positive" });
    }
    let ce2 = (params.c * params.eps).powi(2);
    let l2 = (ell * ell) as f64;
    Ok(match variant {
        MiVariant::PartialSup => {
            8.0 * copies * ce2 * s / l2 + 16.0 * (-params.alpha * d as f64).exp() * copies * ce2
        }
        MiVariant::TraceNorm => 16.0 * copies * ce2 * s / l2,
    })
}

/// Base-2 binary entropy, zero at the endpoints.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Fano-style floor: average decode error `err` forces at least
/// `1 - h2(err)` bits of information per coordinate.
pub fn info_floor_from_error(err: f64) -> f64 {
    1.0 - binary_entropy(err.clamp(0.0, 0.5))
}

/// Self-contained arithmetic certificate for the Pauli-measurement copy
/// floor at threshold `w = ceil(n/4)`.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundCertificate {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub w: usize,
    /// Family size at the threshold.
    pub g: u64,
    pub g_ge_half_d2: bool,
    /// Largest number of family words any single setting corresponds to:
    /// `sum_{m<=w} C(n, m)`.
    pub sum_matching: u64,
    pub h_quarter: f64,
    /// Exponential base `2^(4 - h2(1/4))` of the copy floor.
    pub base: f64,
    /// `base^n / eps^2`; the floor up to absolute constants.
    pub body: f64,
    /// `16^n / (eps^2 sum_matching)`; the same floor before the entropy
    /// relaxation.
    pub body_exact: f64,
    /// `2^(n h2(1/4))`, the entropy relaxation of `sum_matching`.
    pub entropy_bound: f64,
    /// Whether the relaxation really dominates; exact at multiples of 4,
    /// can fail below because of the ceiling in `w`.
    pub sum_le_entropy: bool,
    pub eps_in_regime: bool,
}

pub fn pauli_lowerbound_certificate(n: usize, eps: f64) -> Result<LowerBoundCertificate, HardnessError> {
    if !(1..=MAX_ARITH_QUBITS).contains(&n) {
        return Err(HardnessError::BadQubitCount(n));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(HardnessError::BadArgument { name: "eps", value: eps, need: "positive and finite" });
    }
    let thr = weight_threshold(n)?;
    let sum_matching: u64 = (0..=thr.w).map(|m| binom_u64(n, m)).sum();
    let h_quarter = binary_entropy(0.25);
    let base = 2f64.powf(4.0 - h_quarter);
    let body = base.powi(n as i32) / (eps * eps);
    let body_exact = 16f64.powi(n as i32) / (eps * eps * sum_matching as f64);
    let entropy_bound = 2f64.powf(n as f64 * h_quarter);
    Ok(LowerBoundCertificate {
        n,
        d: 1 << n,
        eps,
        w: thr.w,
        g: thr.g,
        g_ge_half_d2: thr.g_ge_half_d2,
        sum_matching,
        h_quarter,
        base,
        body,
        body_exact,
        entropy_bound,
        sum_le_entropy: (sum_matching as f64) <= entropy_bound,
        eps_in_regime: eps <= 1.0 / 200.0,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecodeReport {
    pub ell: usize,
    pub trials: usize,
    /// Average per-coordinate decode error across trials.
    pub avg_bit_error: f64,
    /// `1 - h2(avg_bit_error)`.
    pub info_floor: f64,
}

/// Assouad decode experiment: draw a hidden sign vector, hand the state to
/// an estimator, decode by nearest candidate in trace distance, and score
/// the recovered bits. Ties resolve to the lowest candidate index.
pub fn assouad_decode_experiment<R: Rng>(
    basis: &PerturbationBasis,
    params: &HardnessParams,
    trials: usize,
    mut estimator: impl FnMut(&DensityMatrix, &mut R) -> HermitianMatrix,
    rng: &mut R,
) -> Result<DecodeReport, HardnessError> {
    let ell = basis.len();
    if ell > MAX_DECODE_ELL {
        return Err(HardnessError::EllTooLarge(ell));
    }
    if trials == 0 {
        return Err(HardnessError::BadArgument { name: "trials", value: 0.0, need: "positive" });
    }
    let z_of = |idx: usize| -> Vec<i8> {
        (0..ell).map(|i| if idx >> i & 1 == 1 { -1 } else { 1 }).collect()
    };
    let candidates: Vec<HardInstance> = (0..(1usize << ell))
        .map(|idx| instance_from_z(basis, &z_of(idx), params))
        .collect::<Result<_, _>>()?;

    let mut total_bits_wrong = 0usize;
    for _ in 0..trials {
        let hidden = rng.random_range(0..(1usize << ell));
        let est = estimator(&candidates[hidden].state, rng);
        let est_h = est;
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for (idx, cand) in candidates.iter().enumerate() {
            let dist = trace_distance(&est_h, cand.state.hermitian())?;
            if dist < best_dist {
                best_dist = dist;
                best = idx;
            }
        }
        total_bits_wrong += hamming(&candidates[hidden].z, &candidates[best].z);
    }
    let avg = total_bits_wrong as f64 / (trials * ell) as f64;
    Ok(DecodeReport { ell, trials, avg_bit_error: avg, info_floor: info_floor_from_error(avg) })
}
