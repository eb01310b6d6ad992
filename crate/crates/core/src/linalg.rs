//! Dense complex spectral calculus.
//!
//! Everything here works on small square complex matrices stored densely.
//! [`HermitianMatrix`] is exactly self-adjoint by construction (entries are
//! averaged with their conjugate transpose on entry), so spectral routines
//! never see asymmetric round-off.
//!
//! Positive parts and positive projections keep only eigenvalues strictly
//! above a scale-relative cutoff, `ZERO_CUTOFF_REL * ‖A‖_∞`, so that
//! numerically-zero eigenvalues of degenerate operators do not flicker in and
//! out of the positive eigenspace.

use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance on `max |A - A^H|` accepted by [`HermitianMatrix::new`].
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-10;

/// Relative eigenvalue cutoff separating "positive" from "zero or negative".
pub const ZERO_CUTOFF_REL: f64 = 1e-10;

const EIGH_MAX_ITERS: usize = 100_000;
const SVD_MAX_ITERS: usize = 100_000;

/// A square matrix with finite complex entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::NotSquare {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        if let Some((idx, _)) = data
            .iter()
            .enumerate()
            .find(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
        {
            // column-major storage
            let d = data.nrows();
            return Err(Error::NonFinite {
                row: idx % d,
                col: idx / d,
            });
        }
        Ok(Self { data })
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::NotSquare {
                rows: d,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub(crate) fn from_fn(d: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            data: DMatrix::from_fn(d, d, f),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            data: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            data: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.data[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            data: self.data.map(|z| z * s),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A^H|` over entries.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        dev
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            data: &self.data * &other.data,
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            data: &self.data - &other.data,
        })
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{:?}", self.to_rows())
    }
}

// Operator impls panic on dimension mismatch, like nalgebra's. Use the
// `try_*` methods when dimensions come from untrusted input.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data * &rhs.data,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

/// A complex matrix equal to its own conjugate transpose.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Accepts `m` if `max |m - m^H| <= tol`, then symmetrizes it exactly.
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let deviation = m.hermitian_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation, tol });
        }
        Ok(Self::symmetrize(&m))
    }

    /// `(m + m^H) / 2` with exactly conjugate-symmetric entries and a real
    /// diagonal.
    pub fn symmetrize(m: &ComplexMatrix) -> Self {
        let d = m.dim();
        let mut data = DMatrix::zeros(d, d);
        for i in 0..d {
            data[(i, i)] = C64::new(m.data[(i, i)].re, 0.0);
            for j in (i + 1)..d {
                let z = (m.data[(i, j)] + m.data[(j, i)].conj()) * 0.5;
                data[(i, j)] = z;
                data[(j, i)] = z.conj();
            }
        }
        Self(ComplexMatrix { data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?, DEFAULT_HERMITIAN_TOL)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self(ComplexMatrix::from_fn(d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Rank-one `|v><v|` (no normalization applied).
    pub fn outer(v: &[C64]) -> Self {
        Self::symmetrize(&ComplexMatrix::from_fn(v.len(), |i, j| v[i] * v[j].conj()))
    }

    pub fn zeros(d: usize) -> Self {
        Self(ComplexMatrix::zeros(d))
    }

    pub fn identity(d: usize) -> Self {
        Self(ComplexMatrix::identity(d))
    }

    /// Real trace.
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn as_complex(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_complex(self) -> ComplexMatrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// `C A C^H`, re-symmetrized.
    pub fn conjugate_by(&self, c: &ComplexMatrix) -> Self {
        Self::symmetrize(&(&(c * &self.0) * &c.adjoint()))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.try_add(&other.0)?))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.try_sub(&other.0)?))
    }

    /// Tr(A B) for Hermitian A, B; real up to round-off.
    pub fn trace_product(&self, other: &Self) -> f64 {
        let a = self.0.as_matrix();
        let b = other.0.as_matrix();
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (a[(i, j)] * b[(j, i)]).re;
            }
        }
        acc
    }
}

impl Deref for HermitianMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{:?}", self.0.to_rows())
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

impl From<HermitianMatrix> for ComplexMatrix {
    fn from(h: HermitianMatrix) -> Self {
        h.0
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as columns.
///
/// Each eigenvector is phase-fixed so that its largest-modulus component
/// (lowest index on ties) is real and positive.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue modulus, i.e. the operator norm.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    /// Cutoff below which eigenvalues count as zero.
    pub fn zero_cutoff(&self) -> f64 {
        ZERO_CUTOFF_REL * self.spectral_radius()
    }

    /// `Σ f(λ_i) v_i v_i^H` over the eigenpairs where `f` returns a weight.
    pub fn spectral_sum(&self, mut f: impl FnMut(f64) -> Option<f64>) -> HermitianMatrix {
        let d = self.dim();
        let mut acc = DMatrix::<C64>::zeros(d, d);
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            if let Some(w) = f(lambda) {
                let v = self.eigenvectors.column(i);
                acc += (v * v.adjoint()) * C64::new(w, 0.0);
            }
        }
        HermitianMatrix::symmetrize(&ComplexMatrix { data: acc })
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.spectral_sum(Some)
    }

    /// `‖V^H V - 1‖` as a max entry modulus.
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.dim();
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let residual = gram - DMatrix::<C64>::identity(d, d);
        residual.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sum of eigenvalues above the zero cutoff.
    pub fn positive_trace(&self) -> f64 {
        let cut = self.zero_cutoff();
        self.eigenvalues.iter().filter(|&&l| l > cut).sum()
    }
}

/// Hermitian eigendecomposition, eigenvalues sorted descending.
pub fn eigh(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let d = a.dim();
    if d == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(a.as_matrix().clone(), f64::EPSILON, EIGH_MAX_ITERS)
        .ok_or(Error::NoConvergence {
            routine: "hermitian eigensolver",
            iterations: EIGH_MAX_ITERS,
        })?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::<C64>::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, z) in col.iter().enumerate() {
            let n = z.norm();
            if n > best * (1.0 + 1e-12) {
                best = n;
                pivot = i;
            }
        }
        let phase = if best > 0.0 {
            col[pivot].conj() / best
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            eigenvectors[(i, dst)] = col[i] * phase;
        }
        // pivot component is exactly real after rotation
        eigenvectors[(pivot, dst)] = C64::new(eigenvectors[(pivot, dst)].norm(), 0.0);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `(L + L^H) / 2`.
pub fn real_part(l: &ComplexMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrize(l)
}

/// `[A]_+`: the spectral truncation of `A` to its positive eigenvalues.
pub fn positive_part(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let spec = eigh(a)?;
    let cut = spec.zero_cutoff();
    Ok(spec.spectral_sum(|l| (l > cut).then_some(l)))
}

/// `χ_+(A)`: the projector onto the positive eigenspace of `A`.
pub fn positive_projection(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let spec = eigh(a)?;
    let cut = spec.zero_cutoff();
    Ok(spec.spectral_sum(|l| (l > cut).then_some(1.0)))
}

/// Singular values in descending order.
pub fn singular_values(b: &ComplexMatrix) -> Result<Vec<f64>> {
    if b.dim() == 0 {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(b.as_matrix().clone(), false, false, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(Error::NoConvergence {
            routine: "singular value decomposition",
            iterations: SVD_MAX_ITERS,
        })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `Tr sqrt(B^H B)`.
pub fn trace_norm(b: &ComplexMatrix) -> Result<f64> {
    if b.hermitian_deviation() == 0.0 {
        let spec = eigh(&HermitianMatrix(b.clone()))?;
        return Ok(spec.eigenvalues.iter().map(|l| l.abs()).sum());
    }
    Ok(singular_values(b)?.iter().sum())
}

/// Largest singular value.
pub fn operator_norm(b: &ComplexMatrix) -> Result<f64> {
    if b.hermitian_deviation() == 0.0 {
        return Ok(eigh(&HermitianMatrix(b.clone()))?.spectral_radius());
    }
    Ok(singular_values(b)?.first().copied().unwrap_or(0.0))
}

/// True iff the smallest eigenvalue of `a` is at least `-tol`.
pub fn is_psd(a: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(eigh(a)?.min_eigenvalue() >= -tol)
}

/// Pseudo-inverse square root `S^{-1/2}` on the range of `s`, together with
/// the projector onto its kernel.
///
/// Eigenvalues at or below the zero cutoff count as kernel.
pub fn pseudo_inverse_sqrt(s: &HermitianMatrix) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let spec = eigh(s)?;
    let cut = spec.zero_cutoff();
    let inv_sqrt = spec.spectral_sum(|l| (l > cut).then(|| 1.0 / l.sqrt()));
    let kernel = spec.spectral_sum(|l| (l <= cut).then_some(1.0));
    Ok((inv_sqrt, kernel))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn real_part_of_identity_is_identity() {
        let id = ComplexMatrix::identity(3);
        assert_eq!(real_part(&id).as_complex(), &id);
    }

    #[test]
    fn real_part_of_nilpotent() {
        let l = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let re = real_part(&l);
        let expected = HermitianMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        assert_eq!(re, expected);
    }

    #[test]
    fn real_part_is_exactly_hermitian() {
        let l = ComplexMatrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.3, -0.7)],
            vec![c(-1.1, 0.2), c(0.5, 0.5)],
        ])
        .unwrap();
        let re = real_part(&l);
        assert_eq!(re.hermitian_deviation(), 0.0);
        assert_eq!(real_part(re.as_complex()), re);
    }

    #[test]
    fn rejects_non_square_rows() {
        let err = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
    }

    #[test]
    fn rejects_non_finite() {
        let err = ComplexMatrix::from_real_rows(&[vec![1.0, f64::NAN], vec![0.0, 1.0]]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            HermitianMatrix::new(m, 1e-10),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigh_diagonal() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 3.0]);
        let spec = eigh(&a).unwrap();
        assert_eq!(spec.eigenvalues(), &[3.0, 1.0]);
        assert_eq!(spec.eigenvector(0), vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(spec.eigenvector(1), vec![c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn eigh_pauli_x() {
        let a = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let spec = eigh(&a).unwrap();
        assert!(close(spec.eigenvalues()[0], 1.0, 1e-14));
        assert!(close(spec.eigenvalues()[1], -1.0, 1e-14));
        assert!(spec.orthonormality_error() < 1e-14);
    }

    #[test]
    fn eigh_phase_convention_is_real_positive_pivot() {
        let a = HermitianMatrix::new(
            ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 2.0)], vec![c(0.0, -2.0), c(-1.0, 0.0)]])
                .unwrap(),
            0.0,
        )
        .unwrap();
        let spec = eigh(&a).unwrap();
        for i in 0..2 {
            let v = spec.eigenvector(i);
            let pivot = v
                .iter()
                .copied()
                .max_by(|x, y| x.norm().total_cmp(&y.norm()))
                .unwrap();
            assert!(pivot.re > 0.0 && pivot.im == 0.0);
        }
    }

    #[test]
    fn positive_part_and_projection_diagonal() {
        let a = HermitianMatrix::from_real_diagonal(&[2.0, -1.0]);
        assert_eq!(positive_part(&a).unwrap(), HermitianMatrix::from_real_diagonal(&[2.0, 0.0]));
        assert_eq!(
            positive_projection(&a).unwrap(),
            HermitianMatrix::from_real_diagonal(&[1.0, 0.0])
        );
    }

    #[test]
    fn positive_part_of_psd_is_itself() {
        let a = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let p = positive_part(&a).unwrap();
        assert!((&p - &a).max_abs_entry() < 1e-14);
    }

    #[test]
    fn positive_projection_of_nsd_is_zero() {
        let a = HermitianMatrix::from_real_rows(&[vec![-2.0, 1.0], vec![1.0, -2.0]]).unwrap();
        assert_eq!(positive_projection(&a).unwrap().max_abs_entry(), 0.0);
    }

    #[test]
    fn cutoff_drops_numerically_zero_eigenvalues() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 1e-13, -0.5]);
        let p = positive_projection(&a).unwrap();
        assert_eq!(p.trace(), 1.0);
    }

    #[test]
    fn norms_of_diagonal() {
        let b = HermitianMatrix::from_real_diagonal(&[1.0, -2.0]);
        assert_eq!(trace_norm(&b).unwrap(), 3.0);
        assert_eq!(operator_norm(&b).unwrap(), 2.0);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn trace_norm_of_nilpotent() {
        let b = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!(close(trace_norm(&b).unwrap(), 2.0, 1e-14));
        assert!(close(operator_norm(&b).unwrap(), 2.0, 1e-14));
    }

    #[test]
    fn trace_norm_of_unitary_is_dimension() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // non-Hermitian unitary: phase-rotated Hadamard
        let u = ComplexMatrix::from_rows(&[
            vec![c(s, 0.0), c(0.0, s)],
            vec![c(0.0, s), c(s, 0.0)],
        ])
        .unwrap();
        assert!(close(trace_norm(&u).unwrap(), 2.0, 1e-14));
    }

    #[test]
    fn is_psd_examples() {
        assert!(is_psd(&HermitianMatrix::identity(2), 0.0).unwrap());
        assert!(!is_psd(&HermitianMatrix::from_real_diagonal(&[1.0, -1e-3]), 1e-6).unwrap());
        let tol = 1e-6;
        let rho = HermitianMatrix::from_real_diagonal(&[0.7, 0.3, 0.0]);
        let shifted = &rho - &HermitianMatrix::identity(3).scale(2.0 * tol);
        assert!(!is_psd(&shifted, tol).unwrap());
        assert!(is_psd(&rho, tol).unwrap());
    }

    #[test]
    fn pseudo_inverse_sqrt_on_singular_matrix() {
        let s = HermitianMatrix::from_real_diagonal(&[4.0, 0.0]);
        let (inv, ker) = pseudo_inverse_sqrt(&s).unwrap();
        assert_eq!(inv, HermitianMatrix::from_real_diagonal(&[0.5, 0.0]));
        assert_eq!(ker, HermitianMatrix::from_real_diagonal(&[0.0, 1.0]));
    }
}
