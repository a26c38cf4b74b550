//! Dense complex linear algebra for small operators on a finite-dimensional
//! Hilbert space.
//!
//! Everything above this module talks to matrices through [`ComplexMatrix`]
//! and the handful of free functions defined here: range bases, Hermitian
//! spectra, Haar-random unitaries and Frobenius residuals. The Hermitian
//! eigensolver and QR come from `nalgebra`; singular values use a local
//! one-sided Jacobi SVD.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// A column vector of the Hilbert space.
pub type Ket = DVector<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Numerical thresholds shared by every layer of the crate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToleranceConfig {
    /// Validation of Hermiticity, idempotence and unitarity.
    pub eps_structural: f64,
    /// Existence decisions and Boolean lattice predicates.
    pub eps_exist: f64,
    /// Singular-value cutoff, relative to the largest singular value.
    pub eps_rank: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps_structural: 1e-9,
            eps_exist: 1e-8,
            eps_rank: 1e-10,
        }
    }
}

impl ToleranceConfig {
    pub fn new(eps_structural: f64, eps_exist: f64, eps_rank: f64) -> Result<Self> {
        let tol = Self {
            eps_structural,
            eps_exist,
            eps_rank,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.eps_structural, self.eps_exist, self.eps_rank];
        if all.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::Domain(format!(
                "tolerances must be finite and strictly positive, got {self:?}"
            )));
        }
        if !(self.eps_rank < self.eps_structural && self.eps_structural < 1.0) {
            return Err(Error::Domain(format!(
                "tolerances must satisfy eps_rank < eps_structural < 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// A square matrix of complex doubles with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Wraps a `nalgebra` matrix after checking it is square, nonempty and finite.
    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::Shape("matrix dimension must be positive".into()));
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Shape(format!(
                "row of length {} in a matrix with {} rows",
                bad.len(),
                n
            )));
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        assert!(!diag.is_empty(), "dimension must be positive");
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self(DMatrix::from_diagonal(&d))
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &Ket, b: &Ket) -> Self {
        Self(a * b.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.0)
    }

    /// `(m + m*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    /// Frobenius distance to the adjoint.
    pub fn hermitian_residual(&self) -> f64 {
        frobenius(&(&self.0 - self.0.adjoint()))
    }

    /// `‖u·u* − I‖_F`.
    pub fn unitary_residual(&self) -> f64 {
        let n = self.dim();
        frobenius(&(&self.0 * self.0.adjoint() - DMatrix::<Complex64>::identity(n, n)))
    }

    /// `u · self · u*`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &Ket) -> Ket {
        &self.0 * v
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self * other)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

pub(crate) fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of `a − b`.
pub fn residual(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.check_same_dim(b)?;
    Ok(frobenius(&(&a.0 - &b.0)))
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations: returns the singular
/// values, descending, and the matching left singular vectors for every
/// nonzero singular value.
///
/// Columns are rotated pairwise until all are mutually orthogonal; the
/// column norms are then the singular values.
pub(crate) fn jacobi_svd(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    const MAX_SWEEPS: usize = 60;
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dotc(&a.column(j));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let x = a[(r, i)];
                    let y = a[(r, j)] * phase.conj();
                    a[(r, i)] = x * c - y * s;
                    a[(r, j)] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = (0..cols).map(|j| (a.column(j).norm(), j)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    let sigma: Vec<f64> = order.iter().map(|(n, _)| *n).collect();
    let nonzero: Vec<usize> = order.iter().filter(|(n, _)| *n > 0.0).map(|(_, j)| *j).collect();
    let u = DMatrix::from_fn(rows, nonzero.len(), |r, k| {
        let j = nonzero[k];
        a[(r, j)] / sigma[k]
    });
    (sigma, u)
}

/// Orthonormal basis of the column space of an arbitrary (possibly
/// rectangular) matrix, as the columns of a `rows × k` matrix.
///
/// Columns are left singular vectors ordered by decreasing singular value;
/// `k` counts singular values above `eps_rank · σ_max`.
pub fn range_basis_of(m: &DMatrix<Complex64>, tol: &ToleranceConfig) -> DMatrix<Complex64> {
    let rows = m.nrows();
    if m.ncols() == 0 || m.iter().all(|z| *z == ZERO) {
        return DMatrix::zeros(rows, 0);
    }
    let (sigma, u) = jacobi_svd(m);
    let cutoff = tol.eps_rank * sigma[0];
    let k = sigma.iter().take_while(|s| **s > cutoff).count();
    u.columns(0, k).into_owned()
}

/// Orthonormal vectors spanning the range of `m`; empty for the zero matrix.
pub fn orthonormal_range_basis(m: &ComplexMatrix, tol: &ToleranceConfig) -> Vec<Ket> {
    let b = range_basis_of(&m.0, tol);
    b.column_iter().map(|c| c.into_owned()).collect()
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    Ok(hermitian_eigh(m, tol)?.0)
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors of a
/// Hermitian matrix.
pub fn hermitian_eigh(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(Vec<f64>, Vec<Ket>)> {
    let residual = m.hermitian_residual();
    if residual > tol.eps_structural {
        return Err(Error::NotHermitian { residual });
    }
    Ok(eigh_unchecked(&m.hermitian_part().0))
}

/// Hermitian eigensolver on a matrix already known to be Hermitian.
pub(crate) fn eigh_unchecked(m: &DMatrix<Complex64>) -> (Vec<f64>, Vec<Ket>) {
    if m.nrows() == 0 {
        return (Vec::new(), Vec::new());
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, vectors)
}

/// Singular values of an arbitrary matrix, descending.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s = jacobi_svd(m).0;
    s.truncate(m.nrows().min(m.ncols()));
    s
}

pub(crate) fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub(crate) fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub(crate) fn random_ket<R: Rng>(dim: usize, rng: &mut R) -> Ket {
    DVector::from_fn(dim, |_, _| complex_gaussian(rng))
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn haar_unitary<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            ONE
        }
    });
    q * DMatrix::from_diagonal(&phases)
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix
/// with the diagonal phases of `R` pushed into `Q`. Deterministic in `seed`.
pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::Domain("unitary dimension must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed);
    Ok(ComplexMatrix(haar_unitary(dim, &mut rng)))
}

/// Unit vector along `v`; errors on the zero vector.
pub fn normalize(v: &Ket) -> Result<Ket> {
    let n = v.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
    }
    Ok(v.unscale(n))
}

/// A ket from real components.
pub fn real_ket(components: &[f64]) -> Ket {
    DVector::from_iterator(
        components.len(),
        components.iter().map(|&x| Complex64::new(x, 0.0)),
    )
}

/// Standard basis vector `e_i` in dimension `dim`.
pub fn basis_ket(dim: usize, i: usize) -> Ket {
    let mut v = DVector::from_element(dim, ZERO);
    v[i] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn tolerance_defaults_are_ordered() {
        assert!(ToleranceConfig::default().validate().is_ok());
        assert!(ToleranceConfig::new(1e-9, 1e-8, 1e-8).is_err());
        assert!(ToleranceConfig::new(1.5, 1e-8, 1e-10).is_err());
        assert!(ToleranceConfig::new(1e-9, 0.0, 1e-10).is_err());
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        let rows = vec![vec![ONE, ZERO], vec![ONE]];
        assert!(matches!(ComplexMatrix::from_rows(&rows), Err(Error::Shape(_))));
        let m = DMatrix::from_element(2, 3, ONE);
        assert!(matches!(ComplexMatrix::from_dmatrix(m), Err(Error::Shape(_))));
        let m = DMatrix::from_element(2, 2, Complex64::new(f64::NAN, 0.0));
        assert!(ComplexMatrix::from_dmatrix(m).is_err());
    }

    #[test]
    fn range_basis_of_diagonal_projector() {
        let m = ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0, 0.0]);
        let basis = orthonormal_range_basis(&m, &tol());
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(v[2].norm() + v[3].norm(), 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(basis[0].dotc(&basis[1]).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn range_basis_of_zero_is_empty() {
        assert!(orthonormal_range_basis(&ComplexMatrix::zeros(3), &tol()).is_empty());
    }

    #[test]
    fn range_basis_of_rank_one() {
        let psi = real_ket(&[0.6, 0.8]);
        let m = ComplexMatrix::outer(&psi, &psi);
        let basis = orthonormal_range_basis(&m, &tol());
        assert_eq!(basis.len(), 1);
        // oracle: the ket itself, already normalized; equal up to a phase
        let overlap = basis[0].dotc(&psi).norm();
        assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_of_simple_hermitians() {
        let d = ComplexMatrix::from_diagonal(&[0.36, 0.36]);
        let ev = hermitian_eigenvalues(&d, &tol()).unwrap();
        assert_abs_diff_eq!(ev[0], 0.36, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 0.36, epsilon = 1e-14);

        let x = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ev = hermitian_eigenvalues(&x, &tol()).unwrap();
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_of_example4_compression() {
        // By hand: the upper-left 2x2 block of q is (s1² + s2²)·I = 0.36·I.
        let (s1, s2, s3) = (0.6, 0.0, 0.8);
        let c = ComplexMatrix::from_real_rows(&[
            vec![s1 * s1 + s2 * s2, 0.0],
            vec![0.0, s1 * s1 + s2 * s2],
        ])
        .unwrap();
        let ev = hermitian_eigenvalues(&c, &tol()).unwrap();
        assert_abs_diff_eq!(ev[0], 1.0 - s3 * s3, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 1.0 - s3 * s3, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_reject_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitian_eigenvalues(&m, &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn random_unitary_contract() {
        let u1 = random_unitary(1, 3).unwrap();
        assert_abs_diff_eq!(u1.get(0, 0).norm(), 1.0, epsilon = 1e-14);

        let u = random_unitary(4, 7).unwrap();
        assert!(u.unitary_residual() <= 1e-9);
        assert_eq!(u, random_unitary(4, 7).unwrap());
        assert_ne!(u, random_unitary(4, 8).unwrap());

        assert!(matches!(random_unitary(0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn residual_examples() {
        let m = random_unitary(3, 1).unwrap();
        assert_eq!(residual(&m, &m).unwrap(), 0.0);
        let r = residual(&ComplexMatrix::identity(2), &ComplexMatrix::zeros(2)).unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-15);
        let r = residual(
            &ComplexMatrix::from_diagonal(&[1.0, 0.0]),
            &ComplexMatrix::from_diagonal(&[0.0, 1.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(
            residual(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn jacobi_svd_known_values() {
        let m = ComplexMatrix::from_diagonal(&[2.0, 0.0, 3.0]);
        let s = singular_values(m.as_dmatrix());
        assert_abs_diff_eq!(s[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[2], 0.0, epsilon = 1e-15);

        // u·diag(4, 1, 0.5)·v has those singular values
        let u = random_unitary(3, 1).unwrap();
        let v = random_unitary(3, 2).unwrap();
        let m = &(&u * &ComplexMatrix::from_diagonal(&[1.0, 4.0, 0.5])) * &v;
        let s = singular_values(m.as_dmatrix());
        for (a, b) in s.iter().zip([4.0, 1.0, 0.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        // rectangular: a 2x3 with orthogonal rows of norms 2 and 1
        let r = DMatrix::from_row_slice(2, 3, &[
            Complex64::new(2.0, 0.0), ZERO, ZERO,
            ZERO, Complex64::new(0.0, 1.0), ZERO,
        ]);
        let s = singular_values(&r);
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn jacobi_range_basis_of_rotated_line() {
        // complex rank-one projector in dimension 7
        let u = random_unitary(7, 34).unwrap();
        let psi: Ket = u.as_dmatrix().column(0).into_owned();
        let m = ComplexMatrix::outer(&psi, &psi);
        let basis = range_basis_of(m.as_dmatrix(), &tol());
        assert_eq!(basis.ncols(), 1);
        assert!(frobenius(&(&basis * basis.adjoint() - m.as_dmatrix())) < 1e-14);
    }

    #[test]
    fn qr_reconstructs_ginibre() {
        let mut rng = seeded_rng(17);
        for dim in 1..=6 {
            let g = ginibre(dim, dim, &mut rng);
            let qr = g.clone().qr();
            assert!(frobenius(&(qr.q() * qr.r() - &g)) < 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(normalize(&real_ket(&[0.0, 0.0])).is_err());
        let v = normalize(&real_ket(&[2.0, 0.0])).unwrap();
        assert_abs_diff_eq!(v[0].re, 1.0, epsilon = 1e-15);
    }
}
