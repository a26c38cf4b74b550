//! Transition probabilities between projections.
//!
//! `P(q|p)` exists exactly when the compression of `q` to the range of `p` is
//! a scalar multiple of the identity, i.e. when `pqp = r·p`; the scalar `r`
//! is then the transition probability. Existence is decided numerically on
//! the compression `C = B*·q·B` (with `B` an orthonormal basis of `pH`) and
//! confirmed on the full residual `‖pqp − r·p‖_F`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{
    eigh_unchecked, normalize, residual, singular_values, ComplexMatrix, Ket, ToleranceConfig,
};
use crate::lattice::{commutes, conjugate, leq, Projection};

/// Logical reading of a transition probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Classification {
    /// `P(q|p) = 1`, equivalently `p ≤ q`.
    Implies,
    /// `P(q|p) = 0`, equivalently `p ⊥ q`.
    Excludes,
    /// `0 < P(q|p) < 1`.
    Intermediate,
    /// `pqp` is not a multiple of `p`.
    NoTransition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionResult {
    pub exists: bool,
    /// `P(q|p)`, present only when it exists.
    pub value: Option<f64>,
    /// Candidate scalar `tr(C)/rank(p)`, computed whether or not it is meaningful.
    pub candidate: f64,
    /// `‖C − r̂·I‖_F`.
    pub residual_compression: f64,
    /// `‖pqp − r̂·p‖_F`.
    pub residual_algebraic: f64,
    /// Eigenvalues of `C`, ascending. These are the squared cosines of the
    /// principal angles from `pH` to `qH`.
    pub compression_spectrum: Vec<f64>,
    /// `max − min` of the compression spectrum.
    pub spread: f64,
    pub classification: Classification,
    /// Set when a decisive residual falls within two decades above its
    /// threshold; such a pair sits close to the existence boundary.
    pub ambiguous: bool,
    pub rank_p: usize,
    pub rank_q: usize,
}

impl TransitionResult {
    pub fn is_intermediate(&self) -> bool {
        self.classification == Classification::Intermediate
    }
}

/// Both directions of a pair, with the symmetry verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub forward: TransitionResult,
    pub backward: TransitionResult,
    pub symmetric_ok: bool,
}

/// `tr(pq)/tr(p)` together with whether it is actually a transition probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEstimate {
    pub value: f64,
    pub is_meaningful: bool,
}

/// Dimension constraints on the existence of `P(q|p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Feasibility {
    /// A nonzero `P(q|p)` needs `rank(q) ≥ rank(p)`.
    pub nonzero_possible: bool,
    /// `0 < P(q|p) < 1` additionally needs `rank(q′) ≥ rank(p)`.
    pub nontrivial_possible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictionReport {
    pub holds: bool,
    pub value_p1: f64,
    pub value_p2: Option<f64>,
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub holds: bool,
    pub original: TransitionResult,
    pub conjugated: TransitionResult,
}

/// Agreement threshold for values obtained along two numerical routes.
pub(crate) fn agreement(tol: &ToleranceConfig) -> f64 {
    10.0 * tol.eps_exist
}

fn classify(exists: bool, value: f64, tol: &ToleranceConfig) -> Classification {
    if !exists {
        Classification::NoTransition
    } else if value >= 1.0 - tol.eps_exist {
        Classification::Implies
    } else if value <= tol.eps_exist {
        Classification::Excludes
    } else {
        Classification::Intermediate
    }
}

/// Compression `B*·q·B` of `q` to the range of `p`.
pub fn compression(p: &Projection, q: &Projection) -> Result<ComplexMatrix> {
    p.check_same_dim(q)?;
    if p.is_zero() {
        return Err(Error::ZeroProjection);
    }
    let b = p.basis();
    let c = b.adjoint() * q.matrix().as_dmatrix() * b;
    ComplexMatrix::from_dmatrix(c)
}

/// Decides whether `P(q|p)` exists and computes it.
pub fn transition_probability(
    p: &Projection,
    q: &Projection,
    tol: &ToleranceConfig,
) -> Result<TransitionResult> {
    let c = compression(p, q)?;
    let k = p.rank();
    let kf = k as f64;
    let candidate = c.trace().re / kf;

    let scalar = ComplexMatrix::identity(k).scale(candidate);
    let residual_compression = residual(&c, &scalar)?;
    let pqp = &(p.matrix() * q.matrix()) * p.matrix();
    let residual_algebraic = residual(&pqp, &p.matrix().scale(candidate))?;

    let (spectrum, _) = eigh_unchecked(c.hermitian_part().as_dmatrix());
    let spread = spectrum.last().unwrap() - spectrum.first().unwrap();

    let bound = tol.eps_exist * kf;
    let exists =
        residual_compression <= bound && residual_algebraic <= bound && spread <= tol.eps_exist;
    let ambiguous = (bound..=100.0 * bound).contains(&residual_compression)
        || (tol.eps_exist..=100.0 * tol.eps_exist).contains(&spread);

    let value = exists.then(|| candidate.clamp(0.0, 1.0));
    let classification = classify(exists, candidate.clamp(0.0, 1.0), tol);
    Ok(TransitionResult {
        exists,
        value,
        candidate,
        residual_compression,
        residual_algebraic,
        compression_spectrum: spectrum,
        spread,
        classification,
        ambiguous,
        rank_p: k,
        rank_q: q.rank(),
    })
}

/// `⟨ψ|q|ψ⟩` for the normalized `psi`; the transition probability from the
/// line through `psi`, which always exists.
pub fn transition_rank1(psi: &Ket, q: &Projection) -> Result<f64> {
    if psi.len() != q.dim() {
        return Err(Error::Shape(format!(
            "ket of length {} against a projection of dimension {}",
            psi.len(),
            q.dim()
        )));
    }
    let psi = normalize(psi)?;
    Ok(psi.dotc(&q.matrix().apply(&psi)).re)
}

/// Computes `P(q|p)` and `P(p|q)`; if both exist they must agree.
pub fn symmetry_report(
    p: &Projection,
    q: &Projection,
    tol: &ToleranceConfig,
) -> Result<ClassificationReport> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::ZeroProjection);
    }
    let forward = transition_probability(p, q, tol)?;
    let backward = transition_probability(q, p, tol)?;
    let symmetric_ok = match (forward.value, backward.value) {
        (Some(a), Some(b)) => (a - b).abs() <= agreement(tol),
        _ => true,
    };
    Ok(ClassificationReport {
        forward,
        backward,
        symmetric_ok,
    })
}

/// `tr(pq)/tr(p)`. Defined for every nonzero `p`, but a transition
/// probability only when `P(q|p)` exists.
pub fn trace_estimate(p: &Projection, q: &Projection) -> Result<f64> {
    p.check_same_dim(q)?;
    if p.is_zero() {
        return Err(Error::ZeroProjection);
    }
    Ok((p.matrix() * q.matrix()).trace().re / p.matrix().trace().re)
}

/// The trace estimate paired with the existence flag that gives it meaning.
pub fn assess_trace_estimate(
    p: &Projection,
    q: &Projection,
    tol: &ToleranceConfig,
) -> Result<TraceEstimate> {
    let value = trace_estimate(p, q)?;
    let is_meaningful = transition_probability(p, q, tol)?.exists;
    Ok(TraceEstimate {
        value,
        is_meaningful,
    })
}

/// Rank constraints: `dim(pH) ≤ dim(pqH) ≤ dim(qH)` whenever `P(q|p) ≠ 0`,
/// and the same for `q′` whenever `P(q|p) ≠ 1`.
pub fn rank_feasible(p: &Projection, q: &Projection) -> Result<Feasibility> {
    p.check_same_dim(q)?;
    if p.is_zero() {
        return Err(Error::ZeroProjection);
    }
    let (rp, rq, dim) = (p.rank(), q.rank(), p.dim());
    let nonzero_possible = rq >= rp;
    let nontrivial_possible = nonzero_possible && dim - rq >= rp;
    // rank(p) ≥ 2 with room for both q and q′ forces dim ≥ 4
    debug_assert!(!(nontrivial_possible && rp > 1) || dim >= 4);
    Ok(Feasibility {
        nonzero_possible,
        nontrivial_possible,
    })
}

/// Implies / Excludes / Intermediate / NoTransition for the pair.
pub fn classify_logical(
    p: &Projection,
    q: &Projection,
    tol: &ToleranceConfig,
) -> Result<Classification> {
    let result = transition_probability(p, q, tol)?;
    // commuting projections admit only the classical outcomes
    debug_assert!(!(result.is_intermediate() && commutes(p, q, tol)?));
    Ok(result.classification)
}

/// Checks that `P(q|p2) = P(q|p1)` for `0 ≠ p2 ≤ p1` when `P(q|p1)` exists.
pub fn restriction_check(
    p1: &Projection,
    p2: &Projection,
    q: &Projection,
    tol: &ToleranceConfig,
) -> Result<RestrictionReport> {
    if p2.is_zero() {
        return Err(Error::ZeroProjection);
    }
    if !leq(p2, p1, tol)? {
        return Err(Error::PreconditionViolated("p2 is not below p1".into()));
    }
    let outer = transition_probability(p1, q, tol)?;
    let value_p1 = outer
        .value
        .ok_or_else(|| Error::PreconditionViolated("P(q|p1) does not exist".into()))?;
    let inner = transition_probability(p2, q, tol)?;
    let difference = inner.value.map(|v| (v - value_p1).abs());
    Ok(RestrictionReport {
        holds: difference.is_some_and(|d| d <= agreement(tol)),
        value_p1,
        value_p2: inner.value,
        difference,
    })
}

/// Checks `P(uqu*|upu*) = P(q|p)`, including agreement of the existence flags.
pub fn unitary_invariance_check(
    p: &Projection,
    q: &Projection,
    u: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<InvarianceReport> {
    let original = transition_probability(p, q, tol)?;
    let conjugated =
        transition_probability(&conjugate(p, u, tol)?, &conjugate(q, u, tol)?, tol)?;
    let holds = match (original.value, conjugated.value) {
        (Some(a), Some(b)) => (a - b).abs() <= agreement(tol),
        (None, None) => true,
        _ => false,
    };
    Ok(InvarianceReport {
        holds,
        original,
        conjugated,
    })
}

/// Squared cosines of the principal angles from `pH` to `qH`, ascending,
/// padded with zeros to length `rank(p)`. Computed from the singular values
/// of `B_p*·B_q`, independently of the compression eigensolve.
pub fn principal_cosines_squared(p: &Projection, q: &Projection) -> Result<Vec<f64>> {
    p.check_same_dim(q)?;
    let overlap = p.basis().adjoint() * q.basis();
    let mut cos2: Vec<f64> = singular_values(&overlap).iter().map(|s| s * s).collect();
    cos2.truncate(p.rank());
    cos2.resize(p.rank(), 0.0);
    cos2.sort_by(f64::total_cmp);
    Ok(cos2)
}
