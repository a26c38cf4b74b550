//! Constructors for the worked example pairs and for randomized families
//! obtained from them.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::kernel::{
    haar_unitary, normalize, random_ket, seeded_rng, ComplexMatrix, Ket, ToleranceConfig,
};
use crate::lattice::{conjugate, from_span, rank1_from_ket, validate_projection, Projection};
use crate::transition::{transition_probability, Classification};

/// Real parameters on the unit sphere, `s1² + s2² + s3² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example4Params {
    s1: f64,
    s2: f64,
    s3: f64,
}

impl Example4Params {
    pub fn new(s1: f64, s2: f64, s3: f64, tol: &ToleranceConfig) -> Result<Self> {
        let norm = s1 * s1 + s2 * s2 + s3 * s3;
        if !norm.is_finite() || (norm - 1.0).abs() > tol.eps_structural {
            return Err(Error::Domain(format!(
                "parameters must satisfy s1² + s2² + s3² = 1, got {norm}"
            )));
        }
        Ok(Self { s1, s2, s3 })
    }

    /// Point on the sphere at polar angle `theta` (from the s3 axis) and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            s1: theta.sin() * phi.cos(),
            s2: theta.sin() * phi.sin(),
            s3: theta.cos(),
        }
    }

    pub fn s(&self) -> (f64, f64, f64) {
        (self.s1, self.s2, self.s3)
    }

    /// `1 − s3²`.
    pub fn predicted_value(&self) -> f64 {
        1.0 - self.s3 * self.s3
    }
}

/// `p = diag(1, 1, 0, 0)` and the 4×4 projection `q` with
///
/// ```text
///  s1²+s2²   0        s1·s3   −s2·s3
///  0         s1²+s2²  s2·s3    s1·s3
///  s1·s3     s2·s3    s3²      0
/// −s2·s3     s1·s3    0        s3²
/// ```
///
/// for which `pqp = (1 − s3²)·p`.
pub fn example4(params: &Example4Params, tol: &ToleranceConfig) -> Result<(Projection, Projection)> {
    let (s1, s2, s3) = params.s();
    let a = s1 * s1 + s2 * s2;
    let c = s3 * s3;
    let q = ComplexMatrix::from_real_rows(&[
        vec![a, 0.0, s1 * s3, -s2 * s3],
        vec![0.0, a, s2 * s3, s1 * s3],
        vec![s1 * s3, s2 * s3, c, 0.0],
        vec![-s2 * s3, s1 * s3, 0.0, c],
    ])?;
    let p = ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0, 0.0]);
    Ok((validate_projection(&p, tol)?, validate_projection(&q, tol)?))
}

/// `(|ψ⟩⟨ψ|, |φ⟩⟨φ|)`; both transition probabilities equal `|⟨ψ|φ⟩|²`.
pub fn rank1_pair(psi: &Ket, phi: &Ket) -> Result<(Projection, Projection)> {
    if psi.len() != phi.len() {
        return Err(Error::Shape(format!(
            "kets of lengths {} and {}",
            psi.len(),
            phi.len()
        )));
    }
    Ok((rank1_from_ket(psi)?, rank1_from_ket(phi)?))
}

/// `|⟨ψ|φ⟩|²` after normalization.
pub fn overlap_probability(psi: &Ket, phi: &Ket) -> Result<f64> {
    Ok(normalize(psi)?.dotc(&normalize(phi)?).norm_sqr())
}

/// Classification of a pair of coordinate projections from their masks:
/// containment gives `Implies`, disjointness `Excludes`, anything else
/// `NoTransition`.
pub fn mask_classification(mask_p: &[bool], mask_q: &[bool]) -> Classification {
    let overlap = mask_p.iter().zip(mask_q).any(|(a, b)| *a && *b);
    let contained = mask_p.iter().zip(mask_q).all(|(a, b)| !*a || *b);
    if contained {
        Classification::Implies
    } else if !overlap {
        Classification::Excludes
    } else {
        Classification::NoTransition
    }
}

/// Diagonal projections that overlap without containment, hence admit no
/// transition probability.
pub fn nonexistence_pair_commuting(
    dim: usize,
    mask_p: &[bool],
    mask_q: &[bool],
) -> Result<(Projection, Projection)> {
    if dim == 0 || mask_p.len() != dim || mask_q.len() != dim {
        return Err(Error::Shape(format!(
            "masks of lengths {} and {} for dimension {dim}",
            mask_p.len(),
            mask_q.len()
        )));
    }
    if !mask_p.iter().any(|&b| b) {
        return Err(Error::Domain("p must be nonzero".into()));
    }
    match mask_classification(mask_p, mask_q) {
        Classification::Implies => Err(Error::Domain(
            "mask_p is contained in mask_q, so P(q|p) = 1 exists".into(),
        )),
        Classification::Excludes => Err(Error::Domain(
            "masks are disjoint, so P(q|p) = 0 exists".into(),
        )),
        _ => Ok((Projection::coordinate(mask_p), Projection::coordinate(mask_q))),
    }
}

const ASYMMETRIC_ATTEMPTS: usize = 100;

/// A line `p` and a projection `q` of rank `2 ..= dim − 1` such that
/// `P(q|p)` exists but `P(p|q)` does not.
pub fn asymmetric_pair(dim: usize, seed: u64, tol: &ToleranceConfig) -> Result<(Projection, Projection)> {
    if dim < 3 {
        return Err(Error::Domain(format!(
            "asymmetric pairs need dimension at least 3, got {dim}"
        )));
    }
    let mut rng = seeded_rng(seed);
    for _ in 0..ASYMMETRIC_ATTEMPTS {
        let p = rank1_from_ket(&random_ket(dim, &mut rng))?;
        let rank_q = rng.random_range(2..dim);
        let span: Vec<Ket> = (0..rank_q).map(|_| random_ket(dim, &mut rng)).collect();
        let q = from_span(dim, &span, tol)?;
        if q.rank() != rank_q {
            continue;
        }
        let backward = transition_probability(&q, &p, tol)?;
        if backward.spread > 100.0 * tol.eps_exist {
            return Ok((p, q));
        }
    }
    Err(Error::Domain(format!(
        "no asymmetric pair found in {ASYMMETRIC_ATTEMPTS} attempts"
    )))
}

/// `n` copies of `(upu*, uqu*)` for independent Haar unitaries `u`.
pub fn conjugated_family(
    p: &Projection,
    q: &Projection,
    seed: u64,
    n: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<(Projection, Projection)>> {
    if p.dim() != q.dim() {
        return Err(Error::Shape(format!(
            "projections of dimension {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    let mut rng = seeded_rng(seed);
    (0..n)
        .map(|_| {
            let mut member = seeded_rng(rng.next_u64());
            let u = ComplexMatrix::from_dmatrix(haar_unitary(p.dim(), &mut member))?;
            Ok((conjugate(p, &u, tol)?, conjugate(q, &u, tol)?))
        })
        .collect()
}

/// Haar-random projection of the given rank, deterministic in `seed`.
pub fn random_projection(dim: usize, rank: usize, seed: u64, tol: &ToleranceConfig) -> Result<Projection> {
    if rank > dim {
        return Err(Error::Domain(format!("rank {rank} exceeds dimension {dim}")));
    }
    let mask: Vec<bool> = (0..dim).map(|i| i < rank).collect();
    let u = crate::kernel::random_unitary(dim, seed)?;
    conjugate(&Projection::coordinate(&mask), &u, tol)
}

/// Two simultaneously diagonalizable projections: random coordinate masks
/// (`p` nonzero) rotated by a common Haar unitary. Returns the masks too.
pub fn random_commuting_pair(
    dim: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<(Projection, Projection, Vec<bool>, Vec<bool>)> {
    let mut rng = seeded_rng(seed);
    let mut mask_p: Vec<bool> = (0..dim).map(|_| rng.random_bool(0.5)).collect();
    if !mask_p.iter().any(|&b| b) {
        mask_p[rng.random_range(0..dim)] = true;
    }
    let mask_q: Vec<bool> = (0..dim).map(|_| rng.random_bool(0.5)).collect();
    let u = ComplexMatrix::from_dmatrix(haar_unitary(dim, &mut rng))?;
    let p = conjugate(&Projection::coordinate(&mask_p), &u, tol)?;
    let q = conjugate(&Projection::coordinate(&mask_q), &u, tol)?;
    Ok((p, q, mask_p, mask_q))
}

/// Embeds a projection into a larger space as the upper-left block.
pub fn embed(p: &Projection, dim: usize, tol: &ToleranceConfig) -> Result<Projection> {
    if dim < p.dim() {
        return Err(Error::Shape(format!(
            "cannot embed dimension {} into {dim}",
            p.dim()
        )));
    }
    let small = p.matrix().as_dmatrix();
    let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
        if i < p.dim() && j < p.dim() {
            small[(i, j)]
        } else {
            crate::kernel::Complex64::new(0.0, 0.0)
        }
    });
    validate_projection(&ComplexMatrix::from_dmatrix(m)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{basis_ket, real_ket, residual};
    use crate::lattice::leq;
    use crate::transition::{symmetry_report, transition_probability};
    use approx::assert_abs_diff_eq;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn example4_values() {
        let t = tol();
        let (p, q) = example4(&Example4Params::new(0.6, 0.0, 0.8, &t).unwrap(), &t).unwrap();
        let r = transition_probability(&p, &q, &t).unwrap();
        assert_abs_diff_eq!(r.value.unwrap(), 0.36, epsilon = 1e-12);
        assert_eq!(q.rank(), 2);

        let (p, q) = example4(&Example4Params::new(1.0, 0.0, 0.0, &t).unwrap(), &t).unwrap();
        assert!(residual(p.matrix(), q.matrix()).unwrap() == 0.0);
        assert_eq!(transition_probability(&p, &q, &t).unwrap().value, Some(1.0));

        let (p, q) = example4(&Example4Params::new(0.0, 0.0, 1.0, &t).unwrap(), &t).unwrap();
        assert_eq!(*q.matrix(), ComplexMatrix::from_diagonal(&[0.0, 0.0, 1.0, 1.0]));
        assert_eq!(transition_probability(&p, &q, &t).unwrap().value, Some(0.0));

        assert!(matches!(
            Example4Params::new(1.0, 1.0, 1.0, &t),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn example4_entries_match_closed_form() {
        let t = tol();
        let (s1, s2, s3) = (0.48, 0.36, 0.8);
        let (_, q) = example4(&Example4Params::new(s1, s2, s3, &t).unwrap(), &t).unwrap();
        let m = q.matrix();
        let re = |i, j| m.get(i, j).re;
        assert_eq!(re(0, 0), s1 * s1 + s2 * s2);
        assert_eq!(re(1, 1), s1 * s1 + s2 * s2);
        assert_eq!(re(0, 2), s1 * s3);
        assert_eq!(re(0, 3), -s2 * s3);
        assert_eq!(re(1, 2), s2 * s3);
        assert_eq!(re(1, 3), s1 * s3);
        assert_eq!(re(2, 2), s3 * s3);
        assert_eq!(re(3, 3), s3 * s3);
        assert_eq!(re(3, 0), -s2 * s3);
        assert_eq!(re(2, 3), 0.0);
        assert!(m.as_dmatrix().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn rank1_pair_examples() {
        let t = tol();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (psi, phi) = (real_ket(&[1.0, 0.0]), real_ket(&[h, h]));
        let (p, q) = rank1_pair(&psi, &phi).unwrap();
        let rep = symmetry_report(&p, &q, &t).unwrap();
        assert_abs_diff_eq!(rep.forward.value.unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.backward.value.unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap_probability(&psi, &phi).unwrap(), 0.5, epsilon = 1e-15);

        let (p, q) = rank1_pair(&phi, &phi).unwrap();
        assert_abs_diff_eq!(transition_probability(&p, &q, &t).unwrap().value.unwrap(), 1.0, epsilon = 1e-12);
        let (p, q) = rank1_pair(&basis_ket(3, 0), &basis_ket(3, 2)).unwrap();
        assert_eq!(transition_probability(&p, &q, &t).unwrap().value, Some(0.0));

        assert!(rank1_pair(&real_ket(&[0.0, 0.0]), &phi).is_err());
        assert!(rank1_pair(&basis_ket(3, 0), &phi).is_err());
    }

    #[test]
    fn commuting_generator() {
        let t = tol();
        let m = |s: &str| s.chars().map(|c| c == '1').collect::<Vec<_>>();
        let (p, q) = nonexistence_pair_commuting(4, &m("1100"), &m("0110")).unwrap();
        assert_eq!(
            transition_probability(&p, &q, &t).unwrap().classification,
            Classification::NoTransition
        );
        assert!(nonexistence_pair_commuting(4, &m("1000"), &m("1100")).is_err());
        assert!(nonexistence_pair_commuting(4, &m("1100"), &m("0011")).is_err());
        assert!(nonexistence_pair_commuting(4, &m("0000"), &m("0011")).is_err());
        assert!(nonexistence_pair_commuting(4, &m("110"), &m("0011")).is_err());
    }

    #[test]
    fn asymmetric_generator() {
        let t = tol();
        let p = Projection::coordinate(&[true, false, false]);
        let q = Projection::coordinate(&[true, true, false]);
        let rep = symmetry_report(&p, &q, &t).unwrap();
        assert_eq!(rep.forward.value, Some(1.0));
        assert!(!rep.backward.exists);

        for seed in 0..10 {
            let (p, q) = asymmetric_pair(3 + (seed as usize % 3), seed, &t).unwrap();
            assert_eq!(p.rank(), 1);
            assert!(q.rank() >= 2);
            assert!(!leq(&p, &q, &t).unwrap());
            let rep = symmetry_report(&p, &q, &t).unwrap();
            assert!(rep.forward.exists);
            assert!(!rep.backward.exists);
            assert!(rep.backward.spread > 100.0 * t.eps_exist);
        }
        assert!(asymmetric_pair(2, 0, &t).is_err());
    }

    #[test]
    fn conjugated_families() {
        let t = tol();
        let (p, q) = example4(&Example4Params::new(0.6, 0.0, 0.8, &t).unwrap(), &t).unwrap();
        assert!(conjugated_family(&p, &q, 1, 0, &t).unwrap().is_empty());
        let family = conjugated_family(&p, &q, 1, 10, &t).unwrap();
        assert_eq!(family.len(), 10);
        for (a, b) in &family {
            let r = transition_probability(a, b, &t).unwrap();
            assert_abs_diff_eq!(r.value.unwrap(), 0.36, epsilon = 1e-10);
        }
        let line = rank1_from_ket(&basis_ket(4, 0)).unwrap();
        for (a, b) in conjugated_family(&p, &line, 2, 5, &t).unwrap() {
            assert!(!transition_probability(&a, &b, &t).unwrap().exists);
        }
    }

    #[test]
    fn embedding_preserves_transition() {
        let t = tol();
        let (p, q) = example4(&Example4Params::new(0.6, 0.0, 0.8, &t).unwrap(), &t).unwrap();
        let (p6, q6) = (embed(&p, 6, &t).unwrap(), embed(&q, 6, &t).unwrap());
        assert_eq!(p6.rank(), 2);
        let r = transition_probability(&p6, &q6, &t).unwrap();
        assert_abs_diff_eq!(r.value.unwrap(), 0.36, epsilon = 1e-12);
        assert!(embed(&p, 3, &t).is_err());
    }
}
