use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use qlattice_core::generators::{
    example4, mask_classification, random_commuting_pair, random_projection, rank1_pair,
    Example4Params,
};
use qlattice_core::kernel::{
    hermitian_eigenvalues, orthonormal_range_basis, random_unitary, residual, Complex64,
    ComplexMatrix, Ket, ToleranceConfig,
};
use qlattice_core::lattice::{
    complement, conjugate, join, leq, meet, orthogonal, validate_projection, Projection,
};
use qlattice_core::states::{condition, evaluate, random_state, random_state_supported_in};
use qlattice_core::transition::{
    principal_cosines_squared, symmetry_report, trace_estimate, transition_probability,
    transition_rank1, Classification,
};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn ket_from(parts: &[(f64, f64)]) -> Ket {
    Ket::from_iterator(parts.len(), parts.iter().map(|&(a, b)| Complex64::new(a, b)))
}

/// Random projection of random rank in a random dimension up to 8.
fn projection_strategy() -> impl Strategy<Value = Projection> {
    (2usize..=8, any::<u64>(), 0.0f64..1.0).prop_map(|(dim, seed, frac)| {
        let rank = ((dim + 1) as f64 * frac) as usize;
        random_projection(dim, rank.min(dim), seed, &tol()).unwrap()
    })
}

/// Two random projections in a common dimension, ranks drawn independently.
fn pair_strategy() -> impl Strategy<Value = (Projection, Projection)> {
    (2usize..=8, any::<u64>(), any::<u64>(), 0usize..=8, 0usize..=8).prop_map(
        |(dim, s1, s2, r1, r2)| {
            let t = tol();
            (
                random_projection(dim, r1.min(dim), s1, &t).unwrap(),
                random_projection(dim, r2.min(dim), s2, &t).unwrap(),
            )
        },
    )
}

/// Conjugated `example4` pairs: every one has a transition probability.
fn existing_pair_strategy() -> impl Strategy<Value = (Projection, Projection, f64)> {
    (0.0f64..std::f64::consts::PI, 0.0f64..std::f64::consts::TAU, any::<u64>()).prop_map(
        |(theta, phi, seed)| {
            let t = tol();
            let params = Example4Params::from_angles(theta, phi);
            let (p, q) = example4(&params, &t).unwrap();
            let u = random_unitary(4, seed).unwrap();
            (
                conjugate(&p, &u, &t).unwrap(),
                conjugate(&q, &u, &t).unwrap(),
                params.predicted_value(),
            )
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn range_basis_is_orthonormal_and_spans(
        dim in 1usize..=8,
        cols in 1usize..=8,
        seed in any::<u64>(),
    ) {
        let t = tol();
        // rank-deficient rectangular product padded into a square matrix
        let u = random_unitary(dim, seed).unwrap();
        let v = random_unitary(dim, seed.wrapping_add(1)).unwrap();
        let keep = cols.min(dim);
        let d: Vec<f64> = (0..dim).map(|i| if i < keep { 1.0 + i as f64 } else { 0.0 }).collect();
        let m = &(&u * &ComplexMatrix::from_diagonal(&d)) * &v;
        let basis = orthonormal_range_basis(&m, &t);
        prop_assert_eq!(basis.len(), keep);
        let b = nalgebra::DMatrix::from_fn(dim, keep, |i, j| basis[j][i]);
        let gram = b.adjoint() * &b;
        let eye = nalgebra::DMatrix::<Complex64>::identity(keep, keep);
        prop_assert!((gram - eye).norm() <= t.eps_structural);
        let reproj = &b * b.adjoint() * m.as_dmatrix();
        prop_assert!((reproj - m.as_dmatrix()).norm() <= t.eps_structural * m.frobenius_norm());
    }

    #[test]
    fn random_unitaries_are_unitary(dim in 1usize..=8, seed in any::<u64>()) {
        let u = random_unitary(dim, seed).unwrap();
        prop_assert!(u.unitary_residual() <= tol().eps_structural);
        let uu = &u.adjoint() * &u;
        prop_assert!(residual(&uu, &ComplexMatrix::identity(dim)).unwrap() <= tol().eps_structural);
    }

    #[test]
    fn eigenvalues_sum_to_trace(dim in 1usize..=8, seed in any::<u64>()) {
        let u = random_unitary(dim, seed).unwrap();
        let m = (&u + &u.adjoint()).scale(0.5);
        let ev = hermitian_eigenvalues(&m, &tol()).unwrap();
        prop_assert_eq!(ev.len(), dim);
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let sum: f64 = ev.iter().sum();
        prop_assert!((sum - m.trace().re).abs() <= tol().eps_structural * dim as f64);
    }

    #[test]
    fn order_characterizations_agree((p, q) in pair_strategy()) {
        let t = tol();
        let pq = p.matrix() * q.matrix();
        let qp = q.matrix() * p.matrix();
        let pqp = &pq * p.matrix();
        let qpq = &qp * q.matrix();
        let pm = p.matrix();
        let forms = [
            residual(&pq, pm).unwrap(),
            residual(&qp, pm).unwrap(),
            residual(&pqp, pm).unwrap(),
            residual(&qpq, pm).unwrap(),
        ];
        let verdicts: Vec<bool> = forms.iter().map(|r| *r <= t.eps_exist).collect();
        prop_assert!(verdicts.iter().all(|v| *v == verdicts[0]), "{:?}", forms);
        prop_assert_eq!(leq(&p, &q, &t).unwrap(), verdicts[0]);
    }

    #[test]
    fn nested_order_and_antisymmetry(dim in 2usize..=8, seed in any::<u64>(), a in 0usize..=8, b in 0usize..=8) {
        let t = tol();
        let (small, big) = (a.min(b).min(dim), a.max(b).min(dim));
        let u = random_unitary(dim, seed).unwrap();
        let mask = |k: usize| (0..dim).map(|i| i < k).collect::<Vec<_>>();
        let p = conjugate(&Projection::coordinate(&mask(small)), &u, &t).unwrap();
        let q = conjugate(&Projection::coordinate(&mask(big)), &u, &t).unwrap();
        prop_assert!(leq(&p, &q, &t).unwrap());
        if leq(&q, &p, &t).unwrap() {
            prop_assert!(residual(p.matrix(), q.matrix()).unwrap() <= 10.0 * t.eps_exist);
        }
        if small == 0 {
            prop_assert!(p.is_zero());
        } else {
            let r = transition_probability(&p, &q, &t).unwrap();
            prop_assert_eq!(r.classification, Classification::Implies);
        }
    }

    #[test]
    fn orthogonality_is_order_below_complement((p, q) in pair_strategy()) {
        let t = tol();
        prop_assert_eq!(orthogonal(&p, &q, &t).unwrap(), leq(&p, &complement(&q), &t).unwrap());
        prop_assert!(orthogonal(&p, &complement(&p), &t).unwrap());
    }

    #[test]
    fn meet_join_bounds_and_de_morgan((p, q) in pair_strategy()) {
        let t = tol();
        let m = meet(&p, &q, &t).unwrap();
        let j = join(&p, &q, &t).unwrap();
        prop_assert!(leq(&m, &p, &t).unwrap() && leq(&m, &q, &t).unwrap());
        prop_assert!(leq(&p, &j, &t).unwrap() && leq(&q, &j, &t).unwrap());
        let dual = complement(&meet(&complement(&p), &complement(&q), &t).unwrap());
        prop_assert!(residual(j.matrix(), dual.matrix()).unwrap() <= t.eps_structural);
        prop_assert!(residual(complement(&complement(&p)).matrix(), p.matrix()).unwrap() <= t.eps_structural);
    }

    #[test]
    fn conjugation_revalidates(p in projection_strategy(), seed in any::<u64>()) {
        let t = tol();
        let u = random_unitary(p.dim(), seed).unwrap();
        let c = conjugate(&p, &u, &t).unwrap();
        prop_assert_eq!(c.rank(), p.rank());
        prop_assert!(validate_projection(c.matrix(), &t).is_ok());
    }

    #[test]
    fn complement_rule((p, q, value) in existing_pair_strategy()) {
        let t = tol();
        let r = transition_probability(&p, &q, &t).unwrap();
        prop_assert!(r.exists);
        prop_assert!((r.value.unwrap() - value).abs() <= 1e-8);
        let rc = transition_probability(&p, &complement(&q), &t).unwrap();
        prop_assert!(rc.exists);
        prop_assert!((r.value.unwrap() + rc.value.unwrap() - 1.0).abs() <= 10.0 * t.eps_exist);
    }

    #[test]
    fn existing_pairs_are_symmetric_and_trace_consistent((p, q, _) in existing_pair_strategy()) {
        let t = tol();
        let rep = symmetry_report(&p, &q, &t).unwrap();
        prop_assert!(rep.symmetric_ok);
        if let (Some(a), Some(b)) = (rep.forward.value, rep.backward.value) {
            prop_assert!((a - b).abs() <= 10.0 * t.eps_exist);
        }
        let est = trace_estimate(&p, &q).unwrap();
        prop_assert!((rep.forward.value.unwrap() - est).abs() <= 10.0 * t.eps_exist);
    }

    #[test]
    fn transition_invariants_on_random_pairs((p, q) in pair_strategy()) {
        let t = tol();
        prop_assume!(!p.is_zero());
        let r = transition_probability(&p, &q, &t).unwrap();
        // invariants of the result type
        if r.exists {
            let v = r.value.unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(r.residual_algebraic <= t.eps_exist * p.rank() as f64);
            prop_assert!(r.spread <= t.eps_exist);
            prop_assert!((v - trace_estimate(&p, &q).unwrap()).abs() <= 10.0 * t.eps_exist);
            if v > t.eps_exist {
                prop_assert!(q.rank() >= p.rank());
            }
            prop_assert_eq!(v >= 1.0 - t.eps_exist, leq(&p, &q, &t).unwrap());
            prop_assert_eq!(v <= t.eps_exist, orthogonal(&p, &q, &t).unwrap());
        } else {
            prop_assert!(r.value.is_none());
        }
        prop_assert_eq!(r.exists, r.spread <= t.eps_exist);
        // compression spectrum = squared principal cosines
        let cos2 = principal_cosines_squared(&p, &q).unwrap();
        prop_assert_eq!(cos2.len(), r.compression_spectrum.len());
        for (a, b) in cos2.iter().zip(&r.compression_spectrum) {
            prop_assert!((a - b).abs() <= 1e-10, "{:?} vs {:?} ranks {} {}", cos2, r.compression_spectrum, p.rank(), q.rank());
        }
        if p.rank() == 1 {
            prop_assert!(r.exists);
            let psi = p.basis_vectors().remove(0);
            prop_assert!((transition_rank1(&psi, &q).unwrap() - r.value.unwrap()).abs() <= t.eps_exist);
        }
    }

    #[test]
    fn commuting_pairs_are_never_intermediate(dim in 1usize..=8, seed in any::<u64>()) {
        let t = tol();
        let (p, q, mp, mq) = random_commuting_pair(dim, seed, &t).unwrap();
        let c = transition_probability(&p, &q, &t).unwrap().classification;
        prop_assert_ne!(c, Classification::Intermediate);
        prop_assert_eq!(c, mask_classification(&mp, &mq));
    }

    #[test]
    fn rank1_pairs_are_symmetric(
        dim in 2usize..=6,
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12),
    ) {
        let psi = ket_from(&raw[..dim]);
        let phi = ket_from(&raw[6..6 + dim]);
        prop_assume!(psi.norm() > 1e-3 && phi.norm() > 1e-3);
        let (p, q) = rank1_pair(&psi, &phi).unwrap();
        let rep = symmetry_report(&p, &q, &tol()).unwrap();
        prop_assert!(rep.symmetric_ok && rep.forward.exists && rep.backward.exists);
    }

    #[test]
    fn state_additivity(dim in 2usize..=8, seed in any::<u64>(), split in 0usize..=8) {
        let t = tol();
        let k = split.min(dim);
        let u = random_unitary(dim, seed).unwrap();
        let p = conjugate(&Projection::coordinate(&(0..dim).map(|i| i < k).collect::<Vec<_>>()), &u, &t).unwrap();
        let q = conjugate(&Projection::coordinate(&(0..dim).map(|i| i == dim - 1 && k < dim).collect::<Vec<_>>()), &u, &t).unwrap();
        prop_assert!(orthogonal(&p, &q, &t).unwrap());
        let sum = validate_projection(&(p.matrix() + q.matrix()), &t).unwrap();
        let mu = random_state(dim, seed ^ 1).unwrap();
        let lhs = evaluate(&mu, &sum).unwrap();
        let rhs = evaluate(&mu, &p).unwrap() + evaluate(&mu, &q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 10.0 * t.eps_structural);
    }

    #[test]
    fn conditioning_is_idempotent(p in projection_strategy(), seed in any::<u64>()) {
        let t = tol();
        prop_assume!(!p.is_zero());
        let mu = random_state(p.dim(), seed).unwrap();
        let once = condition(&mu, &p, &t).unwrap();
        let twice = condition(&once, &p, &t).unwrap();
        prop_assert!(residual(once.rho(), twice.rho()).unwrap() <= t.eps_structural);
        prop_assert!((evaluate(&once, &p).unwrap() - 1.0).abs() <= t.eps_exist);
    }

    #[test]
    fn null_events_annihilate_products(p in projection_strategy(), seed in any::<u64>()) {
        let t = tol();
        prop_assume!(!p.is_zero() && p.rank() < p.dim());
        let mu = random_state_supported_in(&complement(&p), seed).unwrap();
        prop_assert!(evaluate(&mu, &p).unwrap() <= t.eps_exist);
        let x = random_unitary(p.dim(), seed ^ 7).unwrap().scale(2.5);
        let xp = &x * p.matrix();
        prop_assert!(mu.expectation(&xp).unwrap().norm() <= t.eps_exist * x.frobenius_norm());
    }
}

#[test]
fn outcome_is_independent_of_the_initial_state() {
    let t = tol();
    let params = Example4Params::new(0.6, 0.0, 0.8, &t).unwrap();
    let (p, q) = example4(&params, &t).unwrap();
    let values: Vec<f64> = (0..50)
        .map(|seed| {
            let mu = random_state(4, seed).unwrap();
            assert!(evaluate(&mu, &p).unwrap() > t.eps_exist);
            evaluate(&condition(&mu, &p, &t).unwrap(), &q).unwrap()
        })
        .collect();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo <= 10.0 * t.eps_exist);
    assert_abs_diff_eq!(lo, 0.36, epsilon = 1e-10);
}
