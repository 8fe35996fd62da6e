//! Mutually unbiased bases for power-of-2 dimensions and the grouped
//! least-squares tomography scheme built on them.
//!
//! The `d + 1` bases come from partitioning the `d^2 - 1` non-identity
//! Pauli words into maximal commuting classes. The partition is the
//! standard line construction over the field with `d` elements: writing
//! each word as an (x, z) pair of field elements through a self-dual
//! basis, the classes are the lines `{(0, b)}` and `{(a, m a)}` through
//! the origin. Each class is jointly diagonalized numerically and the
//! resulting family is validated against the unbiasedness invariants, so
//! a bug in the field bookkeeping cannot produce a silently wrong family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{
    eig_herm, project_to_density, C64, ComplexMatrix, DensityMatrix, HermitianMatrix,
};
use crate::measurement::Povm;
use crate::pauli::{born_in_unitary_basis, Pauli, PauliString};
use crate::sampling;
use crate::tol;

use super::{FrequencyVector, TomographyError};

/// Dimensions the builder supports (`2^n` for `n = 1..4`).
pub const SUPPORTED_DIMS: [usize; 4] = [2, 4, 8, 16];

const JOINT_DIAG_ATTEMPTS: usize = 32;
const JOINT_DIAG_TOL: f64 = 1e-10;

fn reduction_poly(n: usize) -> u32 {
    // Lexicographically least irreducible polynomial per degree.
    match n {
        2 => 0b111,
        3 => 0b1011,
        4 => 0b10011,
        _ => unreachable!("field arithmetic only used for n in 2..=4"),
    }
}

fn gf_mul(a: u32, b: u32, n: usize) -> u32 {
    let poly = reduction_poly(n);
    let mut a = a;
    let mut b = b;
    let mut r = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> n & 1 == 1 {
            a ^= poly;
        }
    }
    r
}

/// Field trace down to GF(2): sum of the `n` conjugates.
fn gf_trace(a: u32, n: usize) -> u32 {
    let mut acc = 0u32;
    let mut x = a;
    for _ in 0..n {
        acc ^= x;
        x = gf_mul(x, x, n);
    }
    debug_assert!(acc <= 1, "trace lands in the base field");
    acc
}

/// First (in subset order) basis of the field whose trace form is the
/// identity; such a basis exists over GF(2) in every degree.
fn self_dual_basis(n: usize) -> Vec<u32> {
    let q = 1u32 << n;
    for mask in 0u32..(1 << (q - 1)) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let cand: Vec<u32> = (0..q - 1).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        let ok = (0..n).all(|i| {
            (i..n).all(|j| {
                let expect = u32::from(i == j);
                gf_trace(gf_mul(cand[i], cand[j], n), n) == expect
            })
        });
        if ok {
            return cand;
        }
    }
    unreachable!("self-dual basis search is exhaustive and the basis exists");
}

fn words_commute(a: &PauliString, b: &PauliString) -> bool {
    let clashes = (0..a.n_qubits())
        .filter(|&j| {
            let x = a.letter(j);
            let y = b.letter(j);
            x != Pauli::I && y != Pauli::I && x != y
        })
        .count();
    clashes % 2 == 0
}

/// Partition the non-identity words on `n` qubits into `2^n + 1` maximal
/// commuting classes of `2^n - 1` words each.
pub fn commuting_classes(n: usize) -> Result<Vec<Vec<PauliString>>, TomographyError> {
    if n == 1 {
        return Ok(vec![
            vec!["Z".parse().expect("literal")],
            vec!["X".parse().expect("literal")],
            vec!["Y".parse().expect("literal")],
        ]);
    }
    if !(2..=4).contains(&n) {
        return Err(TomographyError::UnsupportedDim(1 << n));
    }
    let q = 1u32 << n;
    let basis = self_dual_basis(n);
    let coords = |a: u32| -> u32 {
        (0..n).fold(0u32, |acc, i| acc | (gf_trace(gf_mul(a, basis[i], n), n) << i))
    };
    let word_from = |x_bits: u32, z_bits: u32| -> PauliString {
        let letters: Vec<Pauli> = (0..n)
            .map(|j| match (x_bits >> j & 1, z_bits >> j & 1) {
                (0, 0) => Pauli::I,
                (1, 0) => Pauli::X,
                (0, 1) => Pauli::Z,
                _ => Pauli::Y,
            })
            .collect();
        PauliString::from_letters(&letters).expect("n letters")
    };

    let mut classes: Vec<Vec<PauliString>> = Vec::with_capacity((q + 1) as usize);
    classes.push((1..q).map(|b| word_from(0, coords(b))).collect());
    for m in 0..q {
        classes
            .push((1..q).map(|a| word_from(coords(a), coords(gf_mul(m, a, n)))).collect());
    }

    // The line construction guarantees these properties; check them anyway
    // so field-arithmetic bugs surface here and not as a bad basis.
    let mut seen = vec![false; 1 << (2 * n)];
    for class in &classes {
        for (i, a) in class.iter().enumerate() {
            if a.is_identity() || seen[a.packed() as usize] {
                return Err(TomographyError::BadArgument {
                    name: "classes",
                    value: a.packed() as f64,
                    need: "each non-identity word exactly once",
                });
            }
            seen[a.packed() as usize] = true;
            for b in &class[i + 1..] {
                if !words_commute(a, b) {
                    return Err(TomographyError::BadArgument {
                        name: "classes",
                        value: 0.0,
                        need: "within-class words must commute",
                    });
                }
            }
        }
    }
    Ok(classes)
}

/// Joint eigenbasis of a commuting class: diagonalize a random real
/// combination, retry on eigenvalue collisions.
fn joint_eigenbasis(class: &[PauliString], seed: u64) -> Result<ComplexMatrix, TomographyError> {
    let d = class[0].dim();
    let mats: Vec<HermitianMatrix> = class.iter().map(|p| p.matrix_of()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..JOINT_DIAG_ATTEMPTS {
        let mut combo = ComplexMatrix::zeros(d);
        for m in &mats {
            combo = &combo + &m.matrix().scale(sampling::standard_normal(&mut rng));
        }
        let dec = eig_herm(&HermitianMatrix::symmetrize(combo))?;
        let u = dec.vectors;
        let mut good = true;
        'words: for m in &mats {
            for col in 0..d {
                let v: Vec<C64> = (0..d).map(|r| u[(r, col)]).collect();
                let mv = m.matrix().mul_vec(&v);
                let lambda: C64 = v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum();
                if (lambda.re.abs() - 1.0).abs() > JOINT_DIAG_TOL || lambda.im.abs() > JOINT_DIAG_TOL {
                    good = false;
                    break 'words;
                }
                let worst = mv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * lambda).norm())
                    .fold(0.0f64, f64::max);
                if worst > JOINT_DIAG_TOL {
                    good = false;
                    break 'words;
                }
            }
        }
        if good {
            return Ok(u);
        }
    }
    Err(TomographyError::BadArgument {
        name: "joint_diagonalization",
        value: JOINT_DIAG_ATTEMPTS as f64,
        need: "a random combination with simple spectrum",
    })
}

/// `d + 1` orthonormal bases with all cross-basis overlaps of squared
/// magnitude `1/d`, stored as unitaries whose columns are the basis
/// vectors.
pub struct MubFamily {
    d: usize,
    bases: Vec<ComplexMatrix>,
}

impl MubFamily {
    /// Validates the defining invariants; every constructor goes through
    /// here.
    pub fn new(d: usize, bases: Vec<ComplexMatrix>) -> Result<Self, TomographyError> {
        if bases.len() != d + 1 {
            return Err(TomographyError::FrequencyShape {
                rows: bases.len(),
                cols: d,
                need_rows: d + 1,
                need_cols: d,
            });
        }
        for u in &bases {
            if u.dim() != d {
                return Err(TomographyError::UnsupportedDim(u.dim()));
            }
            let gram = &u.dagger() * u;
            let defect = (&gram - &ComplexMatrix::identity(d)).max_entry_abs();
            if defect > tol::MUB_ORTHO {
                return Err(TomographyError::BadArgument {
                    name: "basis",
                    value: defect,
                    need: "orthonormal columns",
                });
            }
        }
        let target = 1.0 / d as f64;
        for j in 0..bases.len() {
            for k in (j + 1)..bases.len() {
                let overlap = &bases[j].dagger() * &bases[k];
                for x in 0..d {
                    for y in 0..d {
                        let dev = (overlap[(x, y)].norm_sqr() - target).abs();
                        if dev > tol::MUB_UNBIASED {
                            return Err(TomographyError::BadArgument {
                                name: "unbiasedness",
                                value: dev,
                                need: "|<u|v>|^2 = 1/d across bases",
                            });
                        }
                    }
                }
            }
        }
        Ok(MubFamily { d, bases })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_bases(&self) -> usize {
        self.bases.len()
    }

    pub fn basis(&self, k: usize) -> &ComplexMatrix {
        &self.bases[k]
    }

    pub fn bases(&self) -> &[ComplexMatrix] {
        &self.bases
    }

    /// Rank-one projector onto vector `x` of basis `k`.
    pub fn projector(&self, k: usize, x: usize) -> HermitianMatrix {
        let d = self.d;
        let u = &self.bases[k];
        let m = ComplexMatrix::from_fn(d, |r, c| u[(r, x)] * u[(c, x)].conj());
        HermitianMatrix::symmetrize(m)
    }

    /// The pooled measurement: all `d(d+1)` projectors scaled by
    /// `1/(d+1)`.
    pub fn povm(&self) -> Result<Povm, TomographyError> {
        let mut effects = Vec::with_capacity(self.d * (self.d + 1));
        let mut labels = Vec::with_capacity(self.d * (self.d + 1));
        for k in 0..self.n_bases() {
            for x in 0..self.d {
                effects.push(self.projector(k, x).scale(1.0 / (self.d as f64 + 1.0)));
                labels.push(format!("{k}:{x}"));
            }
        }
        Ok(Povm::new(effects, Some(labels))?)
    }

    /// Exact per-basis Born rows for a state.
    pub fn exact_frequencies(&self, rho: &DensityMatrix) -> Result<FrequencyVector, TomographyError> {
        let mut rows = Vec::with_capacity(self.n_bases());
        for u in &self.bases {
            rows.push(born_in_unitary_basis(rho, u)?);
        }
        FrequencyVector::new(self.d, rows)
    }
}

/// Build the family for `d` in {2, 4, 8, 16}. Deterministic: the joint
/// diagonalization uses fixed internal seeds.
pub fn build_mub(d: usize) -> Result<MubFamily, TomographyError> {
    if !SUPPORTED_DIMS.contains(&d) {
        return Err(TomographyError::UnsupportedDim(d));
    }
    if d == 2 {
        let z: crate::pauli::BasisSetting = "Z".parse().expect("literal");
        let x: crate::pauli::BasisSetting = "X".parse().expect("literal");
        let y: crate::pauli::BasisSetting = "Y".parse().expect("literal");
        return MubFamily::new(2, vec![z.unitary(), x.unitary(), y.unitary()]);
    }
    let n = d.trailing_zeros() as usize;
    let classes = commuting_classes(n)?;
    let bases: Result<Vec<ComplexMatrix>, TomographyError> = classes
        .iter()
        .enumerate()
        .map(|(idx, class)| joint_eigenbasis(class, 0x6d75_6200 + idx as u64))
        .collect();
    MubFamily::new(d, bases?)
}

/// Linear inversion of per-basis frequencies:
/// `sum_{k,x} f(x|k) proj_{k,x} - I`. Exact Born frequencies reproduce the
/// state (the family's reconstruction identity); sampled frequencies give
/// the least-squares estimate, Hermitian with unit trace but possibly
/// non-PSD.
pub fn mub_ls_estimate(
    freqs: &FrequencyVector,
    mub: &MubFamily,
) -> Result<HermitianMatrix, TomographyError> {
    if freqs.dim() != mub.dim() {
        return Err(TomographyError::UnsupportedDim(freqs.dim()));
    }
    if !freqs.is_complete() {
        let row = (0..mub.n_bases()).find(|&r| freqs.is_row_empty(r)).unwrap_or(0);
        return Err(TomographyError::EmptyRow(row));
    }
    let d = mub.dim();
    let mut acc = ComplexMatrix::zeros(d);
    for (k, row) in freqs.rows().iter().enumerate() {
        for (x, &f) in row.iter().enumerate() {
            if f != 0.0 {
                acc = &acc + &mub.projector(k, x).matrix().scale(f);
            }
        }
    }
    acc = &acc - &ComplexMatrix::identity(d);
    Ok(HermitianMatrix::symmetrize(acc))
}

/// Copy budget of the grouped MUB scheme for trace accuracy `eps` at the
/// 99/100 success level: `ceil(172 d^3 ln(200 d) / eps^2)`.
pub fn mub_copies_needed(d: usize, eps: f64) -> Result<u64, TomographyError> {
    if d < 2 {
        return Err(TomographyError::UnsupportedDim(d));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TomographyError::EpsOutOfRange(eps));
    }
    let n = 172.0 * (d as f64).powi(3) * (200.0 * d as f64).ln() / (eps * eps);
    Ok(n.ceil() as u64)
}

/// Bookkeeping of one grouped-scheme run.
pub struct MubRunReport {
    pub d: usize,
    /// Requested copy budget.
    pub copies_budget: u64,
    /// Per-group allocation `floor(n / (d+1))`.
    pub group_size: u64,
    /// Copies discarded by the floor split.
    pub leftover: u64,
    /// Uniform basis labels drawn: `floor(n / 2)`.
    pub labels_drawn: u64,
    /// Label histogram over the `d + 1` bases.
    pub m_counts: Vec<u64>,
    /// Outcomes actually used per basis: `min(group_size, m_j)`.
    pub used: Vec<u64>,
    /// Groups where the label draw exceeded the allocation.
    pub truncated_groups: usize,
    /// Groups that ended up with zero usable outcomes (replaced by a
    /// uniform row in the frequency table).
    pub empty_groups: usize,
    /// Raw linear inversion.
    pub ls: HermitianMatrix,
    /// Projection of `ls` onto density matrices.
    pub estimate: DensityMatrix,
}

/// The grouped MUB scheme: split the copy budget evenly over the `d + 1`
/// bases, resample per-basis usage counts from uniform labels on half the
/// budget, truncate to the allocation, and run least squares plus
/// projection on the resulting frequencies.
pub fn mub_tomography_run(
    rho: &DensityMatrix,
    mub: &MubFamily,
    copies: u64,
    rng: &mut impl Rng,
) -> Result<MubRunReport, TomographyError> {
    let d = mub.dim();
    if rho.dim() != d {
        return Err(TomographyError::UnsupportedDim(rho.dim()));
    }
    let groups = (d + 1) as u64;
    if copies < 2 * groups {
        return Err(TomographyError::BadArgument {
            name: "copies",
            value: copies as f64,
            need: "at least 2(d+1)",
        });
    }
    let group_size = copies / groups;
    let leftover = copies - group_size * groups;
    let labels_drawn = copies / 2;
    let uniform = vec![1.0 / groups as f64; groups as usize];
    let m_counts = sampling::sample_counts(&uniform, labels_drawn, rng);

    let mut counts_rows: Vec<Vec<u64>> = Vec::with_capacity(groups as usize);
    let mut used = Vec::with_capacity(groups as usize);
    let mut truncated_groups = 0usize;
    for (k, &m_k) in m_counts.iter().enumerate() {
        if m_k > group_size {
            truncated_groups += 1;
        }
        let u_k = m_k.min(group_size);
        used.push(u_k);
        let probs = born_in_unitary_basis(rho, mub.basis(k))?;
        counts_rows.push(sampling::sample_counts(&probs, u_k, rng));
    }
    let mut freqs = FrequencyVector::from_counts(d, &counts_rows)?;
    let empty_groups = freqs.fill_empty_uniform();
    let ls = mub_ls_estimate(&freqs, mub)?;
    let estimate = project_to_density(&ls)?;
    Ok(MubRunReport {
        d,
        copies_budget: copies,
        group_size,
        leftover,
        labels_drawn,
        m_counts,
        used,
        truncated_groups,
        empty_groups,
        ls,
        estimate,
    })
}

/// Serializable summary of a [`MubRunReport`] (the matrices are left out;
/// callers serialize those through the matrix interchange form).
#[derive(Serialize)]
pub struct MubRunSummary {
    pub d: usize,
    pub copies_budget: u64,
    pub group_size: u64,
    pub leftover: u64,
    pub labels_drawn: u64,
    pub m_counts: Vec<u64>,
    pub used: Vec<u64>,
    pub truncated_groups: usize,
    pub empty_groups: usize,
}

impl MubRunReport {
    pub fn summary(&self) -> MubRunSummary {
        MubRunSummary {
            d: self.d,
            copies_budget: self.copies_budget,
            group_size: self.group_size,
            leftover: self.leftover,
            labels_drawn: self.labels_drawn,
            m_counts: self.m_counts.clone(),
            used: self.used.clone(),
            truncated_groups: self.truncated_groups,
            empty_groups: self.empty_groups,
        }
    }
}
