//! Pauli words, measurement settings, and Born sampling.
//!
//! A [`PauliString`] packs one letter per qubit into two bits (I=0, Z=1,
//! Y=2, X=3); qubit 0 is the leftmost letter in text form and the leftmost
//! Kronecker factor, so it owns the high-order bits of computational basis
//! indices. An N-letter word over {X,Y,Z} is a [`BasisSetting`]: measuring
//! it projects every qubit onto the corresponding single-qubit eigenbasis
//! and yields a `+1/-1` outcome per qubit, recorded as an [`OutcomeString`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::linalg::{kron, C64, ComplexMatrix, DensityMatrix, HermitianMatrix};
use crate::sampling;
use crate::tol;

/// Enumeration cap; dense matrices for longer words would not fit the
/// crate's dimension budget anyway.
pub const MAX_QUBITS: usize = 8;

#[derive(Debug, Error)]
pub enum PauliError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    BadQubitCount(usize),
    #[error("unexpected character {0:?}")]
    BadChar(char),
    #[error("identity letter not allowed in a basis setting")]
    IdentityInSetting,
    #[error("dimension {0} is not a power of two within the qubit cap")]
    BadDimension(usize),
    #[error("qubit count mismatch: {a} vs {b}")]
    QubitMismatch { a: usize, b: usize },
    #[error("Born probability {0:.3e} below the clip floor")]
    BornNegative(f64),
    #[error("Born probabilities sum to {0:.12}, outside tolerance")]
    BornSum(f64),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Packing code; also the tie-break order (I < Z < Y < X).
    pub fn code(self) -> u32 {
        match self {
            Pauli::I => 0,
            Pauli::Z => 1,
            Pauli::Y => 2,
            Pauli::X => 3,
        }
    }

    fn from_code(c: u32) -> Pauli {
        match c & 3 {
            0 => Pauli::I,
            1 => Pauli::Z,
            2 => Pauli::Y,
            _ => Pauli::X,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let rows = match self {
            Pauli::I => vec![vec![one, z], vec![z, one]],
            Pauli::X => vec![vec![z, one], vec![one, z]],
            Pauli::Y => vec![vec![z, -i], vec![i, z]],
            Pauli::Z => vec![vec![one, z], vec![z, -one]],
        };
        ComplexMatrix::from_rows(rows).expect("2x2 literal")
    }

    /// Columns are the +1 and -1 eigenvectors, in that order.
    fn eigenbasis(self) -> ComplexMatrix {
        let h = 1.0 / 2f64.sqrt();
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let rows = match self {
            Pauli::Z | Pauli::I => vec![vec![one, z], vec![z, one]],
            Pauli::X => vec![
                vec![C64::new(h, 0.0), C64::new(h, 0.0)],
                vec![C64::new(h, 0.0), C64::new(-h, 0.0)],
            ],
            Pauli::Y => vec![
                vec![C64::new(h, 0.0), C64::new(h, 0.0)],
                vec![C64::new(0.0, h), C64::new(0.0, -h)],
            ],
        };
        ComplexMatrix::from_rows(rows).expect("2x2 literal")
    }
}

/// Word of Pauli letters, two bits per qubit (qubit j at bits 2j..2j+2).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u8,
    code: u32,
}

impl PauliString {
    pub fn from_letters(letters: &[Pauli]) -> Result<Self, PauliError> {
        let n = letters.len();
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(PauliError::BadQubitCount(n));
        }
        let mut code = 0u32;
        for (j, &p) in letters.iter().enumerate() {
            code |= p.code() << (2 * j);
        }
        Ok(PauliString { n: n as u8, code })
    }

    pub fn identity(n: usize) -> Result<Self, PauliError> {
        Self::from_letters(&vec![Pauli::I; n])
    }

    pub fn n_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn letter(&self, j: usize) -> Pauli {
        debug_assert!(j < self.n as usize);
        Pauli::from_code(self.code >> (2 * j))
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits()).map(|j| self.letter(j)).collect()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (0..self.n_qubits()).filter(|&j| self.letter(j) != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.code == 0
    }

    /// Packed code; used as a dense tally index in `0..4^n`.
    pub fn packed(&self) -> u32 {
        self.code
    }

    pub fn from_packed(n: usize, code: u32) -> Result<Self, PauliError> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(PauliError::BadQubitCount(n));
        }
        debug_assert!(code < 1 << (2 * n));
        Ok(PauliString { n: n as u8, code })
    }

    /// Bitmask over qubits with a non-identity letter.
    pub fn support_mask(&self) -> u32 {
        let mut m = 0;
        for j in 0..self.n_qubits() {
            if self.letter(j) != Pauli::I {
                m |= 1 << j;
            }
        }
        m
    }

    /// Dense tensor product of the letters.
    pub fn matrix_of(&self) -> HermitianMatrix {
        let mut m = self.letter(0).matrix();
        for j in 1..self.n_qubits() {
            m = kron(&m, &self.letter(j).matrix());
        }
        HermitianMatrix::symmetrize(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.n_qubits() {
            write!(f, "{}", self.letter(j).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for PauliString {
    type Err = PauliError;
    fn from_str(s: &str) -> Result<Self, PauliError> {
        let letters: Result<Vec<Pauli>, PauliError> = s
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(PauliError::BadChar(other)),
            })
            .collect();
        PauliString::from_letters(&letters?)
    }
}

impl Ord for PauliString {
    /// Lexicographic in position order (qubit 0 first) with I < Z < Y < X.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n.cmp(&other.n).then_with(|| {
            for j in 0..self.n_qubits() {
                let ord = self.letter(j).code().cmp(&other.letter(j).code());
                if ord != std::cmp::Ordering::Equal {
                    return ord;
                }
            }
            std::cmp::Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightOrder {
    Ascending,
    Descending,
}

/// All non-identity words of `n` letters, sorted by weight with the
/// lexicographic tie-break; `Descending` reverses the weight key only.
pub fn enumerate_by_weight(n: usize, order: WeightOrder) -> Result<Vec<PauliString>, PauliError> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(PauliError::BadQubitCount(n));
    }
    let mut all: Vec<PauliString> = (1..(1u32 << (2 * n)))
        .map(|code| PauliString { n: n as u8, code })
        .collect();
    all.sort_by(|a, b| {
        let byweight = match order {
            WeightOrder::Ascending => a.weight().cmp(&b.weight()),
            WeightOrder::Descending => b.weight().cmp(&a.weight()),
        };
        byweight.then_with(|| a.cmp(b))
    });
    Ok(all)
}

/// Measurement setting: a Pauli word with no identity letters.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisSetting(PauliString);

impl BasisSetting {
    pub fn new(word: PauliString) -> Result<Self, PauliError> {
        if word.letters().contains(&Pauli::I) {
            return Err(PauliError::IdentityInSetting);
        }
        Ok(BasisSetting(word))
    }

    pub fn word(&self) -> &PauliString {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn letter(&self, j: usize) -> Pauli {
        self.0.letter(j)
    }

    /// Unitary whose column `x` is the joint eigenvector for outcome index
    /// `x` (qubit 0 = most significant bit, bit set = outcome -1).
    pub fn unitary(&self) -> ComplexMatrix {
        let mut u = self.letter(0).eigenbasis();
        for j in 1..self.n_qubits() {
            u = kron(&u, &self.letter(j).eigenbasis());
        }
        u
    }

    /// Rank-one effect for one outcome: tensor product of `(I +- sigma)/2`.
    pub fn effect(&self, outcome: &OutcomeString) -> Result<HermitianMatrix, PauliError> {
        if outcome.n_qubits() != self.n_qubits() {
            return Err(PauliError::QubitMismatch { a: outcome.n_qubits(), b: self.n_qubits() });
        }
        let half = |p: Pauli, sign: f64| -> ComplexMatrix {
            let m = p.matrix();
            let id = ComplexMatrix::identity(2);
            (&id + &m.scale(sign)).scale(0.5)
        };
        let mut m = half(self.letter(0), outcome.sign_at(0) as f64);
        for j in 1..self.n_qubits() {
            m = kron(&m, &half(self.letter(j), outcome.sign_at(j) as f64));
        }
        Ok(HermitianMatrix::symmetrize(m))
    }
}

impl fmt::Display for BasisSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for BasisSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for BasisSetting {
    type Err = PauliError;
    fn from_str(s: &str) -> Result<Self, PauliError> {
        BasisSetting::new(s.parse()?)
    }
}

/// The `3^n` settings in alphabetical order (X < Y < Z, qubit 0 varies
/// slowest).
pub fn all_settings(n: usize) -> Result<Vec<BasisSetting>, PauliError> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(PauliError::BadQubitCount(n));
    }
    let alphabet = [Pauli::X, Pauli::Y, Pauli::Z];
    let total = 3usize.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut letters = vec![Pauli::I; n];
        let mut rem = idx;
        for j in (0..n).rev() {
            letters[j] = alphabet[rem % 3];
            rem /= 3;
        }
        out.push(BasisSetting(PauliString::from_letters(&letters)?));
    }
    Ok(out)
}

/// True when every letter of `q` is the identity or matches `b`; exactly the
/// words whose expectation a run of setting `b` estimates.
pub fn corresponds(q: &PauliString, b: &BasisSetting) -> bool {
    if q.n_qubits() != b.n_qubits() {
        return false;
    }
    (0..q.n_qubits()).all(|j| {
        let l = q.letter(j);
        l == Pauli::I || l == b.letter(j)
    })
}

/// The `2^n` words corresponding to a setting (identity included), by
/// ascending support subset.
pub fn corresponding_words(b: &BasisSetting) -> Vec<PauliString> {
    let n = b.n_qubits();
    (0..(1u32 << n))
        .map(|subset| {
            let letters: Vec<Pauli> = (0..n)
                .map(|j| if subset >> j & 1 == 1 { b.letter(j) } else { Pauli::I })
                .collect();
            PauliString::from_letters(&letters).expect("valid subset word")
        })
        .collect()
}

/// Per-qubit `+1/-1` outcomes; bit j set means qubit j read `-1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomeString {
    n: u8,
    bits: u32,
}

impl OutcomeString {
    pub fn new(n: usize, bits: u32) -> Result<Self, PauliError> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(PauliError::BadQubitCount(n));
        }
        Ok(OutcomeString { n: n as u8, bits: bits & ((1 << n) - 1) })
    }

    /// Decode a Born-vector index (qubit 0 = most significant bit).
    pub fn from_index(index: usize, n: usize) -> Result<Self, PauliError> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(PauliError::BadQubitCount(n));
        }
        debug_assert!(index < 1 << n);
        let mut bits = 0u32;
        for j in 0..n {
            if index >> (n - 1 - j) & 1 == 1 {
                bits |= 1 << j;
            }
        }
        Ok(OutcomeString { n: n as u8, bits })
    }

    pub fn to_index(&self) -> usize {
        let n = self.n_qubits();
        let mut idx = 0usize;
        for j in 0..n {
            if self.bits >> j & 1 == 1 {
                idx |= 1 << (n - 1 - j);
            }
        }
        idx
    }

    pub fn n_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn sign_at(&self, j: usize) -> i8 {
        if self.bits >> j & 1 == 1 {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for OutcomeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.n_qubits() {
            write!(f, "{}", if self.sign_at(j) == 1 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for OutcomeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for OutcomeString {
    type Err = PauliError;
    fn from_str(s: &str) -> Result<Self, PauliError> {
        let n = s.chars().count();
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(PauliError::BadQubitCount(n));
        }
        let mut bits = 0u32;
        for (j, ch) in s.chars().enumerate() {
            match ch {
                '+' => {}
                '-' => bits |= 1 << j,
                other => return Err(PauliError::BadChar(other)),
            }
        }
        Ok(OutcomeString { n: n as u8, bits })
    }
}

/// Product of the outcome signs on the support of `q`.
pub fn sign_for(q: &PauliString, x: &OutcomeString) -> i8 {
    debug_assert_eq!(q.n_qubits(), x.n_qubits());
    if (x.bits & q.support_mask()).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Same sign, computed from a Born-vector index without decoding.
pub fn sign_for_index(q: &PauliString, index: usize) -> i8 {
    let n = q.n_qubits();
    let mut mask = 0usize;
    for j in 0..n {
        if q.letter(j) != Pauli::I {
            mask |= 1 << (n - 1 - j);
        }
    }
    if (index & mask).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Born probabilities of measuring `rho` in the orthonormal basis given by
/// the columns of `u`: the diagonal of `U^dag rho U`, clipped and
/// renormalized per the crate tolerances.
pub fn born_in_unitary_basis(
    rho: &DensityMatrix,
    u: &ComplexMatrix,
) -> Result<Vec<f64>, PauliError> {
    let d = rho.dim();
    if u.dim() != d {
        return Err(PauliError::QubitMismatch { a: u.dim(), b: d });
    }
    let mut probs = Vec::with_capacity(d);
    for x in 0..d {
        // <u_x| rho |u_x>
        let mut col = Vec::with_capacity(d);
        for i in 0..d {
            col.push(u[(i, x)]);
        }
        let rho_col = rho.matrix().mul_vec(&col);
        let p: C64 = col.iter().zip(&rho_col).map(|(a, b)| a.conj() * b).sum();
        let p = p.re;
        if p < -tol::BORN_CLIP {
            return Err(PauliError::BornNegative(p));
        }
        probs.push(p.max(0.0));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol::BORN_SUM {
        return Err(PauliError::BornSum(sum));
    }
    for p in &mut probs {
        *p /= sum;
    }
    Ok(probs)
}

/// Born vector for a Pauli setting, indexed per [`OutcomeString::from_index`].
pub fn born_vector(rho: &DensityMatrix, b: &BasisSetting) -> Result<Vec<f64>, PauliError> {
    if rho.dim() != b.dim() {
        return Err(PauliError::QubitMismatch { a: rho.dim(), b: b.dim() });
    }
    born_in_unitary_basis(rho, &b.unitary())
}

/// `shots` measurement outcomes of setting `b` on `rho`, tallied by index.
pub fn sample_outcome_counts(
    rho: &DensityMatrix,
    b: &BasisSetting,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<Vec<u64>, PauliError> {
    let probs = born_vector(rho, b)?;
    Ok(sampling::sample_counts(&probs, shots, rng))
}

/// Pauli coefficients `Tr[h P]/d` for every non-identity word `P`.
pub fn decompose(h: &HermitianMatrix) -> Result<BTreeMap<PauliString, f64>, PauliError> {
    let d = h.dim();
    let n = d.trailing_zeros() as usize;
    if d != 1 << n || !(1..=MAX_QUBITS).contains(&n) {
        return Err(PauliError::BadDimension(d));
    }
    let mut out = BTreeMap::new();
    for p in enumerate_by_weight(n, WeightOrder::Ascending)? {
        let coeff = p.matrix_of().matrix().hs_inner(h.matrix()).re / d as f64;
        out.insert(p, coeff);
    }
    Ok(out)
}

/// Inverse of [`decompose`]: `tr/d * I + sum coeff_P P`.
pub fn reconstruct(
    n: usize,
    trace: f64,
    coeffs: &BTreeMap<PauliString, f64>,
) -> Result<HermitianMatrix, PauliError> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(PauliError::BadQubitCount(n));
    }
    let d = 1usize << n;
    let mut m = ComplexMatrix::identity(d).scale(trace / d as f64);
    for (p, &coeff) in coeffs {
        if p.n_qubits() != n {
            return Err(PauliError::QubitMismatch { a: p.n_qubits(), b: n });
        }
        m = &m + &p.matrix_of().scale(coeff);
    }
    Ok(HermitianMatrix::symmetrize(m))
}
