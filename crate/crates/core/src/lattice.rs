//! The projection lattice of a finite-dimensional Hilbert space.
//!
//! A [`Projection`] is a validated Hermitian idempotent. Order, orthogonality
//! and commutation are decided on products of projections with the looser
//! `eps_exist` threshold; meet, join and complement return new projections.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{
    eigh_unchecked, frobenius, normalize, range_basis_of, residual, Complex64, ComplexMatrix, Ket,
    ToleranceConfig,
};

/// A self-adjoint projection operator together with an orthonormal basis of
/// its range. The rank is the number of basis columns.
#[derive(Debug, Clone)]
pub struct Projection {
    matrix: ComplexMatrix,
    basis: DMatrix<Complex64>,
}

impl PartialEq for Projection {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl Projection {
    /// Projector `B·B*` onto the span of the orthonormal columns of `basis`.
    pub(crate) fn from_orthonormal_basis(basis: DMatrix<Complex64>) -> Self {
        let matrix = ComplexMatrix::from_dmatrix(&basis * basis.adjoint())
            .expect("B·B* of a finite basis is square and finite");
        Self { matrix, basis }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_orthonormal_basis(DMatrix::zeros(dim, 0))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_orthonormal_basis(DMatrix::identity(dim, dim))
    }

    /// Diagonal projector onto the coordinates flagged in `mask`.
    pub fn coordinate(mask: &[bool]) -> Self {
        let dim = mask.len();
        let cols: Vec<usize> = (0..dim).filter(|&i| mask[i]).collect();
        let basis = DMatrix::from_fn(dim, cols.len(), |i, j| {
            if i == cols[j] {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::from_orthonormal_basis(basis)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `dim(pH)`.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    /// Orthonormal basis of the range as a `dim × rank` matrix.
    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Ket> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "projections act on spaces of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

/// Accepts `m` as a projection if it is Hermitian and idempotent within
/// `eps_structural`. The rank is read off the numerical range of `m`.
pub fn validate_projection(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Projection> {
    let herm = m.hermitian_residual();
    if herm > tol.eps_structural {
        return Err(Error::NotHermitian { residual: herm });
    }
    let idem = residual(&(m * m), m)?;
    if idem > tol.eps_structural {
        return Err(Error::NotIdempotent { residual: idem });
    }
    let basis = range_basis_of(m.as_dmatrix(), tol);
    let trace = m.trace().re;
    debug_assert!(
        (trace - basis.ncols() as f64).abs() <= 0.5,
        "rank {} disagrees with trace {trace}",
        basis.ncols()
    );
    Ok(Projection {
        matrix: m.clone(),
        basis,
    })
}

/// Projector onto the span of `vectors` in a space of dimension `dim`.
pub fn from_span(dim: usize, vectors: &[Ket], tol: &ToleranceConfig) -> Result<Projection> {
    if dim == 0 {
        return Err(Error::Shape("dimension must be positive".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::Shape(format!(
            "vector of length {} in a space of dimension {dim}",
            v.len()
        )));
    }
    let stacked = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
    Ok(Projection::from_orthonormal_basis(range_basis_of(
        &stacked, tol,
    )))
}

/// `|ψ⟩⟨ψ|` for the normalized `psi`.
pub fn rank1_from_ket(psi: &Ket) -> Result<Projection> {
    let unit = normalize(psi)?;
    let dim = unit.len();
    Ok(Projection::from_orthonormal_basis(DMatrix::from_column_slice(
        dim,
        1,
        unit.as_slice(),
    )))
}

/// `p′ = I − p`.
pub fn complement(p: &Projection) -> Projection {
    let dim = p.dim();
    let matrix = &ComplexMatrix::identity(dim) - p.matrix();
    // Range of I − p is the orthogonal complement of the range of p.
    let (values, vectors) = eigh_unchecked(p.matrix().hermitian_part().as_dmatrix());
    let cols: Vec<&Ket> = values
        .iter()
        .zip(&vectors)
        .take(dim - p.rank())
        .map(|(_, v)| v)
        .collect();
    let basis = DMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i]);
    Projection { matrix, basis }
}

/// `p ≤ q`, decided as `pq = p`.
pub fn leq(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<bool> {
    p.check_same_dim(q)?;
    Ok(residual(&(p.matrix() * q.matrix()), p.matrix())? <= tol.eps_exist)
}

/// `pq = 0`.
pub fn orthogonal(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<bool> {
    p.check_same_dim(q)?;
    Ok((p.matrix() * q.matrix()).frobenius_norm() <= tol.eps_exist)
}

/// `pq = qp`.
pub fn commutes(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<bool> {
    p.check_same_dim(q)?;
    let pq = p.matrix() * q.matrix();
    let qp = q.matrix() * p.matrix();
    Ok(residual(&pq, &qp)? <= tol.eps_exist)
}

/// `p ∧ q`: the projector onto `range(p) ∩ range(q) = ker(p′ + q′)`.
pub fn meet(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<Projection> {
    p.check_same_dim(q)?;
    let dim = p.dim();
    let two_minus = &ComplexMatrix::identity(dim).scale(2.0) - &(p.matrix() + q.matrix());
    let (values, vectors) = eigh_unchecked(two_minus.hermitian_part().as_dmatrix());
    let kernel: Vec<&Ket> = values
        .iter()
        .zip(&vectors)
        .filter(|(l, _)| l.abs() <= tol.eps_rank)
        .map(|(_, v)| v)
        .collect();
    let basis = DMatrix::from_fn(dim, kernel.len(), |i, j| kernel[j][i]);
    Ok(Projection::from_orthonormal_basis(basis))
}

/// `p ∨ q`: the projector onto `range(p) + range(q)`.
pub fn join(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<Projection> {
    p.check_same_dim(q)?;
    let mut vectors = p.basis_vectors();
    vectors.extend(q.basis_vectors());
    from_span(p.dim(), &vectors, tol)
}

/// `u·p·u*` for a unitary `u`.
pub fn conjugate(p: &Projection, u: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Projection> {
    if u.dim() != p.dim() {
        return Err(Error::Shape(format!(
            "unitary of dimension {} applied to a projection of dimension {}",
            u.dim(),
            p.dim()
        )));
    }
    let unitarity = u.unitary_residual();
    if unitarity > tol.eps_structural {
        return Err(Error::Domain(format!(
            "conjugating matrix is not unitary (residual {unitarity:.3e})"
        )));
    }
    let matrix = p.matrix().conjugate_by(u).hermitian_part();
    let conjugated = validate_projection(&matrix, tol)?;
    debug_assert_eq!(conjugated.rank(), p.rank());
    Ok(conjugated)
}

/// Frobenius norm of `pq − qp`; exposed for diagnostics.
pub fn commutator_norm(p: &Projection, q: &Projection) -> Result<f64> {
    p.check_same_dim(q)?;
    let c = &(p.matrix() * q.matrix()) - &(q.matrix() * p.matrix());
    Ok(frobenius(c.as_dmatrix()))
}
