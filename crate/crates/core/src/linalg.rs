//! Dense complex linear algebra sized for small Hilbert spaces.
//!
//! Conventions used throughout the crate:
//!
//! * Matrices are square, row-major, dimension `1..=256`.
//! * Vectorization is column-stacking: `vec(|i><j|)` is the unit vector at
//!   index `j*d + i`, so `<<A|B>> = Tr[A^dag B]` matches the entrywise
//!   inner product of the vectorized operators.
//! * The eigensolver is a cyclic Jacobi iteration on complex Hermitian
//!   matrices. It is deterministic and fails loudly on non-convergence
//!   instead of returning garbage.
//!
//! Newtypes encode validation state: a [`HermitianMatrix`] has been checked
//! (and symmetrized) against `tol::HERMITICITY`, a [`DensityMatrix`]
//! additionally has unit trace and a spectrum above `-tol::PSD_SLACK`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tol;

pub type C64 = Complex64;

/// Largest matrix dimension the dense code paths are sized for.
pub const MAX_DIM: usize = 256;

const MAX_JACOBI_SWEEPS: usize = 64;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix dimension {0} outside 1..={MAX_DIM}")]
    BadDimension(usize),
    #[error("expected {expected} rows/cols, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {a} vs {b}")]
    DimMismatch { a: usize, b: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix deviates from its adjoint by {defect:.3e} (tolerance {tol:.1e})")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("trace {trace:.12} is not 1 within {tol:.1e}")]
    TraceNotOne { trace: f64, tol: f64 },
    #[error("minimum eigenvalue {min_eig:.3e} below -{tol:.1e}")]
    NotPsd { min_eig: f64, tol: f64 },
    #[error("Jacobi eigensolver did not converge in {0} sweeps")]
    NoConvergence(usize),
    #[error("vector length {got} is not d^2 = {expected}")]
    BadVectorLength { expected: usize, got: usize },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("interchange parse: {0}")]
    Interchange(String),
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    d: usize,
    a: Vec<C64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix d={}", self.d)?;
        for i in 0..self.d {
            for j in 0..self.d {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(d: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&d), "dimension {d} out of range");
        ComplexMatrix { d, a: vec![C64::new(0.0, 0.0); d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from row-major nested vectors, validating shape and finiteness.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self, LinalgError> {
        let d = rows.len();
        if !(1..=MAX_DIM).contains(&d) {
            return Err(LinalgError::BadDimension(d));
        }
        let mut a = Vec::with_capacity(d * d);
        for row in &rows {
            if row.len() != d {
                return Err(LinalgError::ShapeMismatch { expected: d, got: row.len() });
            }
            a.extend_from_slice(row);
        }
        let m = ComplexMatrix { d, a };
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn dagger(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.d, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.d).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> ComplexMatrix {
        ComplexMatrix { d: self.d, a: self.a.iter().map(|z| z * s).collect() }
    }

    pub fn scale_c(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix { d: self.d, a: self.a.iter().map(|z| z * s).collect() }
    }

    /// Hilbert-Schmidt inner product `Tr[self^dag other]`.
    pub fn hs_inner(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!(self.d, other.d, "hs_inner dimension mismatch");
        self.a.iter().zip(&other.a).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_entry_abs(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from the adjoint.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.d {
            for j in i..self.d {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.d, "mul_vec length mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.d];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.a[i * self.d..(i + 1) * self.d];
            *o = row.iter().zip(v).map(|(m, x)| m * x).sum();
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.a[i * self.d + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.a[i * self.d + j]
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.d, rhs.d, "add dimension mismatch");
        ComplexMatrix { d: self.d, a: self.a.iter().zip(&rhs.a).map(|(x, y)| x + y).collect() }
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.d, rhs.d, "sub dimension mismatch");
        ComplexMatrix { d: self.d, a: self.a.iter().zip(&rhs.a).map(|(x, y)| x - y).collect() }
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.d, rhs.d, "mul dimension mismatch");
        let d = self.d;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let x = self[(i, k)];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += x * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Kronecker product; the left factor owns the high-order index bits.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let d = da * db;
    assert!(d <= MAX_DIM, "kron result dimension {d} exceeds {MAX_DIM}");
    ComplexMatrix::from_fn(d, |i, j| a[(i / db, j / db)] * b[(i % db, j % db)])
}

/// Hermitian matrix, validated and symmetrized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, LinalgError> {
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let defect = m.hermiticity_defect();
        if defect > tol::HERMITICITY {
            return Err(LinalgError::NotHermitian { defect, tol: tol::HERMITICITY });
        }
        Ok(Self::symmetrize(m))
    }

    /// `(M + M^dag)/2` without the tolerance gate; for callers whose inputs
    /// are Hermitian by construction (Pauli words, projector sums, ...).
    pub fn symmetrize(m: ComplexMatrix) -> Self {
        let d = m.dim();
        let mut s = m;
        for i in 0..d {
            s[(i, i)] = C64::new(s[(i, i)].re, 0.0);
            for j in i + 1..d {
                let avg = 0.5 * (s[(i, j)] + s[(j, i)].conj());
                s[(i, j)] = avg;
                s[(j, i)] = avg.conj();
            }
        }
        HermitianMatrix(s)
    }

    pub fn zeros(d: usize) -> Self {
        HermitianMatrix(ComplexMatrix::zeros(d))
    }

    pub fn identity(d: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Sum of two Hermitian matrices (exactly Hermitian entrywise).
    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.scale(s))
    }
}

impl std::ops::Deref for HermitianMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Density matrix: Hermitian, unit trace, spectrum above `-tol::PSD_SLACK`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self, LinalgError> {
        let tr = h.trace().re;
        if (tr - 1.0).abs() > tol::DENSITY_TRACE {
            return Err(LinalgError::TraceNotOne { trace: tr, tol: tol::DENSITY_TRACE });
        }
        let vals = eigvals_herm(&h)?;
        let min_eig = vals.last().copied().unwrap_or(0.0);
        if min_eig < -tol::PSD_SLACK {
            return Err(LinalgError::NotPsd { min_eig, tol: tol::PSD_SLACK });
        }
        Ok(DensityMatrix(h))
    }

    /// Constructor for states whose spectrum the caller has already computed;
    /// validity is still asserted in debug builds.
    pub(crate) fn new_spectrum_checked(h: HermitianMatrix, min_eig: f64) -> Self {
        debug_assert!((h.trace().re - 1.0).abs() <= tol::DENSITY_TRACE);
        debug_assert!(min_eig >= -tol::PSD_SLACK, "min eigenvalue {min_eig}");
        let _ = min_eig;
        DensityMatrix(h)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix(HermitianMatrix(ComplexMatrix::identity(d).scale(1.0 / d as f64)))
    }

    /// `|psi><psi|` from an unnormalized state vector.
    pub fn pure_from_vec(v: &[C64]) -> Result<Self, LinalgError> {
        let d = v.len();
        if !(1..=MAX_DIM).contains(&d) {
            return Err(LinalgError::BadDimension(d));
        }
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2.is_finite() && norm2 > 0.0) {
            return Err(LinalgError::ZeroVector);
        }
        let m = ComplexMatrix::from_fn(d, |i, j| v[i] * v[j].conj() / norm2);
        Ok(DensityMatrix(HermitianMatrix::symmetrize(m)))
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }
}

impl std::ops::Deref for DensityMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}

/// Column-stacked operator, length `d^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixVector {
    d: usize,
    v: Vec<C64>,
}

impl MatrixVector {
    pub fn new(d: usize, v: Vec<C64>) -> Result<Self, LinalgError> {
        if v.len() != d * d {
            return Err(LinalgError::BadVectorLength { expected: d * d, got: v.len() });
        }
        Ok(MatrixVector { d, v })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[C64] {
        &self.v
    }

    pub fn inner(&self, other: &MatrixVector) -> C64 {
        assert_eq!(self.d, other.d);
        self.v.iter().zip(&other.v).map(|(x, y)| x.conj() * y).sum()
    }
}

/// Column-stacking: `vectorize(A)[j*d + i] = A[i][j]`.
pub fn vectorize(m: &ComplexMatrix) -> MatrixVector {
    let d = m.dim();
    let mut v = Vec::with_capacity(d * d);
    for j in 0..d {
        for i in 0..d {
            v.push(m[(i, j)]);
        }
    }
    MatrixVector { d, v }
}

pub fn unvectorize(v: &MatrixVector) -> ComplexMatrix {
    let d = v.dim();
    ComplexMatrix::from_fn(d, |i, j| v.v[j * d + i])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchattenP {
    One,
    Two,
    Inf,
}

/// Schatten norm via singular values. Hermitian inputs (within
/// `tol::HERMITICITY`) use their eigenvalues directly; general matrices go
/// through the spectrum of `A^dag A`.
pub fn schatten_norm(m: &ComplexMatrix, p: SchattenP) -> Result<f64, LinalgError> {
    if p == SchattenP::Two {
        return Ok(m.frob_norm());
    }
    let svals: Vec<f64> = if m.is_hermitian(tol::HERMITICITY) {
        eigvals_herm(&HermitianMatrix::symmetrize(m.clone()))?
            .into_iter()
            .map(f64::abs)
            .collect()
    } else {
        let gram = &m.dagger() * m;
        eigvals_herm(&HermitianMatrix::symmetrize(gram))?
            .into_iter()
            .map(|x| x.max(0.0).sqrt())
            .collect()
    };
    Ok(match p {
        SchattenP::One => svals.iter().sum(),
        SchattenP::Inf => svals.iter().cloned().fold(0.0, f64::max),
        SchattenP::Two => unreachable!(),
    })
}

/// `|| a - b ||_1`; both arguments Hermitian so the difference is too.
pub fn trace_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64, LinalgError> {
    let vals = eigvals_herm(&a.sub(b))?;
    Ok(vals.iter().map(|x| x.abs()).sum())
}

pub struct EigDecomp {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Columns are the matching orthonormal eigenvectors.
    pub vectors: ComplexMatrix,
}

impl EigDecomp {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.vectors.dim();
        let mut m = ComplexMatrix::zeros(d);
        for k in 0..d {
            let lv = self.values[k];
            for i in 0..d {
                let vik = self.vectors[(i, k)];
                for j in 0..d {
                    m[(i, j)] += lv * vik * self.vectors[(j, k)].conj();
                }
            }
        }
        m
    }
}

pub fn eig_herm(h: &HermitianMatrix) -> Result<EigDecomp, LinalgError> {
    let (values, vectors) = jacobi(h, true)?;
    Ok(EigDecomp { values, vectors: vectors.expect("vectors requested") })
}

/// Eigenvalues only (descending); skips eigenvector accumulation.
pub fn eigvals_herm(h: &HermitianMatrix) -> Result<Vec<f64>, LinalgError> {
    Ok(jacobi(h, false)?.0)
}

/// Cyclic Jacobi on a Hermitian matrix. Each rotation annihilates one
/// off-diagonal pair; the off-diagonal Frobenius mass decreases
/// monotonically, and we stop once it falls below `~eps * ||A||_F`.
fn jacobi(
    h: &HermitianMatrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<ComplexMatrix>), LinalgError> {
    let d = h.dim();
    let mut a = h.matrix().clone();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(d));
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    let fro = a.frob_norm().max(f64::MIN_POSITIVE);
    let stop = (1e-15 * fro).powi(2);
    let off2 = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                s += 2.0 * a[(i, j)].norm_sqr();
            }
        }
        s
    };

    let mut converged = d < 2 || off2(&a) <= stop;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= MAX_JACOBI_SWEEPS {
            return Err(LinalgError::NoConvergence(MAX_JACOBI_SWEEPS));
        }
        sweeps += 1;
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // Unitary plane rotation R with R[p][p]=c, R[p][q]=s*e,
                // R[q][p]=-s*conj(e), R[q][q]=c zeroing A[p][q] under R^dag A R.
                let e = apq / mag;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (tau * tau + 1.0).sqrt())
                } else {
                    -1.0 / (-tau + (tau * tau + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let se = s * e;

                // Columns: A <- A R.
                for i in 0..d {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - se.conj() * aiq;
                    a[(i, q)] = se * aip + c * aiq;
                }
                // Rows: A <- R^dag A.
                for j in 0..d {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - se * aqj;
                    a[(q, j)] = se.conj() * apj + c * aqj;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                if let Some(v) = v.as_mut() {
                    for i in 0..d {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = c * vip - se.conj() * viq;
                        v[(i, q)] = se * vip + c * viq;
                    }
                }
            }
        }
        converged = off2(&a) <= stop;
    }

    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|v| ComplexMatrix::from_fn(d, |i, j| v[(i, order[j])]));
    Ok((values, vectors))
}

/// Euclidean projection of a real vector onto the probability simplex
/// (sort-and-shift). Input order is irrelevant; output matches input order.
pub fn simplex_project(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    assert!(n > 0, "empty spectrum");
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &mu) in sorted.iter().enumerate() {
        cumsum += mu;
        let cand = (cumsum - 1.0) / (k + 1) as f64;
        if mu - cand > 0.0 {
            theta = cand;
        }
    }
    vals.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Nearest density matrix in Frobenius distance: eigenvalues are projected
/// onto the simplex, eigenvectors kept.
pub fn project_to_density(h: &HermitianMatrix) -> Result<DensityMatrix, LinalgError> {
    let eig = eig_herm(h)?;
    let probs = simplex_project(&eig.values);
    let d = h.dim();
    let mut m = ComplexMatrix::zeros(d);
    for (k, &pk) in probs.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        for i in 0..d {
            let vik = eig.vectors[(i, k)];
            for j in 0..d {
                m[(i, j)] += pk * vik * eig.vectors[(j, k)].conj();
            }
        }
    }
    let herm = HermitianMatrix::symmetrize(m);
    let min_eig = probs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DensityMatrix::new_spectrum_checked(herm, min_eig))
}

/// JSON interchange form: `{"d": 2, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub d: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let d = m.dim();
        MatrixJson {
            d,
            re: (0..d).map(|i| (0..d).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }

    pub fn into_matrix(self) -> Result<ComplexMatrix, LinalgError> {
        let d = self.d;
        if !(1..=MAX_DIM).contains(&d) {
            return Err(LinalgError::BadDimension(d));
        }
        for part in [&self.re, &self.im] {
            if part.len() != d {
                return Err(LinalgError::ShapeMismatch { expected: d, got: part.len() });
            }
            for row in part {
                if row.len() != d {
                    return Err(LinalgError::ShapeMismatch { expected: d, got: row.len() });
                }
            }
        }
        let m = ComplexMatrix::from_fn(d, |i, j| C64::new(self.re[i][j], self.im[i][j]));
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        Ok(m)
    }
}

pub fn matrix_from_json(s: &str) -> Result<ComplexMatrix, LinalgError> {
    let mj: MatrixJson =
        serde_json::from_str(s).map_err(|e| LinalgError::Interchange(e.to_string()))?;
    mj.into_matrix()
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from_matrix(m)).expect("matrix serializes")
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::sampling;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub(crate) fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let g = ComplexMatrix::from_fn(d, |_, _| {
            c(sampling::standard_normal(rng), sampling::standard_normal(rng))
        });
        HermitianMatrix::symmetrize(&g + &g.dagger())
    }

    pub(crate) fn random_density(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let g = ComplexMatrix::from_fn(d, |_, _| {
            c(sampling::standard_normal(rng), sampling::standard_normal(rng))
        });
        let gg = &g * &g.dagger();
        let tr = gg.trace().re;
        DensityMatrix::new(HermitianMatrix::symmetrize(gg.scale(1.0 / tr))).unwrap()
    }

    #[test]
    fn vectorize_column_stacks() {
        // |0><1| in d=2 lives at entry (0,1), hence position 1*2+0 = 2.
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = c(1.0, 0.0);
        let v = vectorize(&m);
        let want = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(v.entries(), &want);
        assert_eq!(unvectorize(&v), m);
    }

    #[test]
    fn vectorize_preserves_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_hermitian(3, &mut rng);
            let b = random_hermitian(3, &mut rng);
            let direct = a.matrix().hs_inner(b.matrix());
            let vec = vectorize(a.matrix()).inner(&vectorize(b.matrix()));
            assert!((direct - vec).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_gate_rejects_and_accepts() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        assert!(HermitianMatrix::new(m).is_ok());
        let bad = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(HermitianMatrix::new(bad), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn eig_diagonal_and_pauli_x() {
        let z = HermitianMatrix::new(ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ]).unwrap())
        .unwrap();
        let e = eig_herm(&z).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);

        let x = HermitianMatrix::new(ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ]).unwrap())
        .unwrap();
        let e = eig_herm(&x).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        // +1 eigenvector is |+> up to phase: components equal in magnitude.
        let (v0, v1) = (e.vectors[(0, 0)], e.vectors[(1, 0)]);
        assert!((v0.norm() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((v0 - v1).norm() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2usize, 5, 8, 16] {
            let h = random_hermitian(d, &mut rng);
            let e = eig_herm(&h).unwrap();
            let rec = e.reconstruct();
            let defect = (&rec - h.matrix()).max_entry_abs();
            assert!(defect < tol::EIG_RESIDUAL, "d={d} residual {defect}");
            // Columns orthonormal.
            let gram = &e.vectors.dagger() * &e.vectors;
            let dev = (&gram - &ComplexMatrix::identity(d)).max_entry_abs();
            assert!(dev < 1e-12, "d={d} gram deviation {dev}");
            // Trace and Frobenius invariants of the spectrum.
            let tr: f64 = e.values.iter().sum();
            assert!((tr - h.trace().re).abs() < 1e-10);
            let f2: f64 = e.values.iter().map(|x| x * x).sum();
            assert!((f2 - h.frob_norm().powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn eigvals_match_full_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = random_hermitian(6, &mut rng);
        let full = eig_herm(&h).unwrap().values;
        let fast = eigvals_herm(&h).unwrap();
        for (a, b) in full.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn schatten_norms_basics() {
        let id = ComplexMatrix::identity(4);
        assert!((schatten_norm(&id, SchattenP::One).unwrap() - 4.0).abs() < 1e-12);
        assert!((schatten_norm(&id, SchattenP::Two).unwrap() - 2.0).abs() < 1e-12);
        assert!((schatten_norm(&id, SchattenP::Inf).unwrap() - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = random_hermitian(5, &mut rng);
        let vals = eigvals_herm(&h).unwrap();
        let n1: f64 = vals.iter().map(|x| x.abs()).sum();
        let n2: f64 = vals.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ninf = vals.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!((schatten_norm(h.matrix(), SchattenP::One).unwrap() - n1).abs() < 1e-10);
        assert!((schatten_norm(h.matrix(), SchattenP::Two).unwrap() - n2).abs() < 1e-10);
        assert!((schatten_norm(h.matrix(), SchattenP::Inf).unwrap() - ninf).abs() < 1e-10);
        assert!(n1 >= n2 - 1e-12 && n2 >= ninf - 1e-12);

        // Frobenius identity: ||A||_2^2 equals the entrywise square sum.
        let fro2: f64 = h.matrix().frob_norm().powi(2);
        assert!((schatten_norm(h.matrix(), SchattenP::Two).unwrap().powi(2) - fro2).abs() < 1e-10);
    }

    #[test]
    fn trace_norm_duality_lower_bounds() {
        // ||A||_1 >= |Tr[B^dag A]| for every ||B||_inf <= 1.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = random_hermitian(4, &mut rng);
        let n1 = schatten_norm(a.matrix(), SchattenP::One).unwrap();
        for _ in 0..50 {
            let b = random_hermitian(4, &mut rng);
            let bn = schatten_norm(b.matrix(), SchattenP::Inf).unwrap();
            let witness = (b.matrix().hs_inner(a.matrix())).norm() / bn;
            assert!(witness <= n1 + 1e-9);
        }
    }

    #[test]
    fn kron_structure() {
        let x = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let xx = kron(&x, &x);
        // (X (x) X) maps |00> (index 0) to |11> (index 3).
        let v = xx.mul_vec(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(v, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let k = kron(a.matrix(), b.matrix());
        assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn simplex_projection_known_case() {
        // (0.9, 0.9, -0.8): active set {1,2}, shift 0.4.
        let p = simplex_project(&[0.9, 0.9, -0.8]);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
        assert_eq!(p[2], 0.0);
        let q = simplex_project(&[2.0, 0.0]);
        assert_eq!(q, vec![1.0, 0.0]);
    }

    /// 1-D dual search oracle: bisect on the shift theta so the clipped sum
    /// hits 1, then compare against the sort-and-shift output.
    #[test]
    fn simplex_projection_matches_dual_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..200 {
            let n = rng.random_range(1..=8);
            let vals: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let fast = simplex_project(&vals);

            let mut lo = vals.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
            let mut hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let s: f64 = vals.iter().map(|&x| (x - mid).max(0.0)).sum();
                if s > 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let theta = 0.5 * (lo + hi);
            for (f, &x) in fast.iter().zip(&vals) {
                assert!((f - (x - theta).max(0.0)).abs() < 1e-9);
            }
            let sum: f64 = fast.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn project_to_density_cases() {
        let h = HermitianMatrix::new(ComplexMatrix::from_rows(vec![
            vec![c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.9, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(-0.8, 0.0)],
        ]).unwrap())
        .unwrap();
        let rho = project_to_density(&h).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((rho.matrix()[(2, 2)].re - 0.0).abs() < 1e-12);

        // Idempotent on states.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let sigma = random_density(4, &mut rng);
        let back = project_to_density(sigma.hermitian()).unwrap();
        assert!((back.matrix() - sigma.matrix()).max_entry_abs() < 1e-9);
    }

    #[test]
    fn project_to_density_is_closest_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let h = random_hermitian(3, &mut rng);
        let p = project_to_density(&h).unwrap();
        let base = (p.matrix() - h.matrix()).frob_norm();
        for _ in 0..100 {
            let other = random_density(3, &mut rng);
            let dist = (other.matrix() - h.matrix()).frob_norm();
            assert!(base <= dist + 1e-9);
        }
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(HermitianMatrix::identity(2)).is_err());
        let ok = DensityMatrix::new(HermitianMatrix::identity(2).scale(0.5)).unwrap();
        assert_eq!(ok.dim(), 2);
        // Negative eigenvalue beyond slack.
        let bad = HermitianMatrix::new(ComplexMatrix::from_rows(vec![
            vec![c(1.1, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-0.1, 0.0)],
        ]).unwrap())
        .unwrap();
        assert!(matches!(DensityMatrix::new(bad), Err(LinalgError::NotPsd { .. })));
    }

    #[test]
    fn matrix_json_round_trip_and_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let m = random_hermitian(3, &mut rng).into_matrix();
        let s = matrix_to_json(&m);
        let back = matrix_from_json(&s).unwrap();
        assert!((&back - &m).max_entry_abs() < 1e-15);

        // 2x2 payload claiming d=3.
        let bad = r#"{"d":3,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#;
        assert!(matches!(matrix_from_json(bad), Err(LinalgError::ShapeMismatch { .. })));
        assert!(matrix_from_json("{").is_err());
        assert!(matrix_from_json(r#"{"d":1,"re":[[null]],"im":[[0]]}"#).is_err());
    }
}
