//! Randomized property battery.
//!
//! Trials are independent and seeded from `(seed, trial index)`, so they run
//! in parallel while the aggregated report stays in trial order.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use qlattice_core::generators::{
    asymmetric_pair, embed, example4, mask_classification, random_commuting_pair, random_projection,
    Example4Params,
};
use qlattice_core::kernel::{basis_ket, random_unitary, residual};
use qlattice_core::lattice::{
    commutes, complement, conjugate, from_span, join, leq, meet, orthogonal, rank1_from_ket,
};
use qlattice_core::states::{condition, defining_property_check, evaluate, random_state};
use qlattice_core::transition::{
    assess_trace_estimate, principal_cosines_squared, rank_feasible, restriction_check,
    transition_probability, unitary_invariance_check,
};
use qlattice_core::{Classification, Complex64, Error, Ket, Projection, Result, ToleranceConfig};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const PROPERTIES: [&str; 15] = [
    "family_prediction",
    "symmetry",
    "trace_consistency",
    "complement_rule",
    "unitary_invariance",
    "rank_monotonicity",
    "restriction",
    "defining_property",
    "value_characterizations",
    "equiangularity",
    "commuting_classification",
    "state_axioms",
    "lattice_laws",
    "distributivity_witness",
    "execution",
];

const MAX_LISTED_FAILURES: usize = 50;
const DEFINING_SAMPLES: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertySummary {
    pub name: String,
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    pub worst_residual: f64,
    pub first_failure: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    /// `None` for suite-level checks.
    pub trial: Option<usize>,
    pub family: String,
    pub property: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub regime: String,
    pub passed: bool,
    pub total_checks: usize,
    pub total_failures: usize,
    pub families: BTreeMap<String, usize>,
    pub properties: Vec<PropertySummary>,
    pub failures: Vec<FailureRecord>,
}

impl SuiteReport {
    pub fn property(&self, name: &str) -> Option<&PropertySummary> {
        self.properties.iter().find(|p| p.name == name)
    }
}

struct Check {
    property: &'static str,
    passed: bool,
    residual: f64,
    detail: String,
}

struct TrialOutcome {
    family: &'static str,
    checks: Vec<Check>,
}

enum Expectation {
    Values { forward: f64, backward: f64 },
    Class(Classification),
    Asymmetric,
    Unknown,
}

fn families(dim: usize) -> Vec<&'static str> {
    let mut f = Vec::new();
    if dim >= 4 {
        f.push("example4");
    }
    f.extend(["rank1", "generic", "commuting"]);
    if dim >= 3 {
        f.push("asymmetric");
    }
    f
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = seed ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn random_line(dim: usize, rng: &mut ChaCha8Rng, tol: &ToleranceConfig) -> Result<(Projection, Ket)> {
    let p = random_projection(dim, 1, rng.next_u64(), tol)?;
    let psi = p.basis_vectors().remove(0);
    Ok((p, psi))
}

fn build_pair(
    family: &str,
    dim: usize,
    rng: &mut ChaCha8Rng,
    tol: &ToleranceConfig,
) -> Result<(Projection, Projection, Expectation)> {
    Ok(match family {
        "example4" => {
            let params = Example4Params::from_angles(rng.random::<f64>() * PI, rng.random::<f64>() * 2.0 * PI);
            let (p, q) = example4(&params, tol)?;
            let u = random_unitary(dim, rng.next_u64())?;
            let p = conjugate(&embed(&p, dim, tol)?, &u, tol)?;
            let q = conjugate(&embed(&q, dim, tol)?, &u, tol)?;
            let v = params.predicted_value();
            (p, q, Expectation::Values { forward: v, backward: v })
        }
        "rank1" => {
            let (p, psi) = random_line(dim, rng, tol)?;
            let (q, phi) = random_line(dim, rng, tol)?;
            let v = psi.dotc(&phi).norm_sqr();
            (p, q, Expectation::Values { forward: v, backward: v })
        }
        "generic" => {
            let rank_p = rng.random_range(1..=dim);
            let rank_q = rng.random_range(0..=dim);
            let p = random_projection(dim, rank_p, rng.next_u64(), tol)?;
            let q = random_projection(dim, rank_q, rng.next_u64(), tol)?;
            (p, q, Expectation::Unknown)
        }
        "commuting" => {
            let (p, q, mp, mq) = random_commuting_pair(dim, rng.next_u64(), tol)?;
            (p, q, Expectation::Class(mask_classification(&mp, &mq)))
        }
        "asymmetric" => {
            let (p, q) = asymmetric_pair(dim, rng.next_u64(), tol)?;
            (p, q, Expectation::Asymmetric)
        }
        other => return Err(Error::Domain(format!("unknown family {other}"))),
    })
}

fn push(checks: &mut Vec<Check>, property: &'static str, passed: bool, residual: f64, detail: impl FnOnce() -> String) {
    checks.push(Check {
        property,
        passed,
        residual,
        detail: if passed { String::new() } else { detail() },
    });
}

fn check_pair(
    p: &Projection,
    q: &Projection,
    expect: &Expectation,
    rng: &mut ChaCha8Rng,
    tol: &ToleranceConfig,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let dim = p.dim();
    let eps = tol.eps_exist;
    let agree = 10.0 * eps;
    let r = transition_probability(p, q, tol)?;
    let back = if q.is_zero() {
        None
    } else {
        Some(transition_probability(q, p, tol)?)
    };
    let back_value = back.as_ref().and_then(|b| b.value);

    match expect {
        Expectation::Values { forward, backward } => {
            let dev = match (r.value, back_value) {
                (Some(a), Some(b)) => (a - forward).abs().max((b - backward).abs()),
                _ => f64::INFINITY,
            };
            push(checks, "family_prediction", dev <= agree, dev, || {
                format!("expected {forward} both ways, got {:?} / {:?}", r.value, back_value)
            });
        }
        Expectation::Class(c) => push(checks, "family_prediction", r.classification == *c, 0.0, || {
            format!("expected {c:?}, got {:?}", r.classification)
        }),
        Expectation::Asymmetric => {
            let ok = r.exists && back.as_ref().is_some_and(|b| !b.exists);
            push(checks, "family_prediction", ok, 0.0, || {
                format!("forward exists {}, backward {:?}", r.exists, back_value)
            });
        }
        Expectation::Unknown => {}
    }

    if let (Some(a), Some(b)) = (r.value, back_value) {
        let d = (a - b).abs();
        push(checks, "symmetry", d <= agree, d, || format!("P(q|p) = {a}, P(p|q) = {b}"));
    }

    let te = assess_trace_estimate(p, q, tol)?;
    let flag_ok = te.is_meaningful == r.exists;
    let d = r.value.map_or(0.0, |v| (v - te.value).abs());
    push(checks, "trace_consistency", flag_ok && d <= agree, d, || {
        format!("value {:?}, trace estimate {}, is_meaningful {}", r.value, te.value, te.is_meaningful)
    });

    if let Some(v) = r.value {
        let rc = transition_probability(p, &complement(q), tol)?;
        let d = rc.value.map_or(f64::INFINITY, |w| (v + w - 1.0).abs());
        push(checks, "complement_rule", d <= agree, d, || {
            format!("P(q|p) = {v}, P(q′|p) = {:?}", rc.value)
        });
    }

    let u = random_unitary(dim, rng.next_u64())?;
    let inv = unitary_invariance_check(p, q, &u, tol)?;
    let d = match (inv.original.value, inv.conjugated.value) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => 0.0,
    };
    push(checks, "unitary_invariance", inv.holds, d, || {
        format!("{:?} became {:?}", inv.original.value, inv.conjugated.value)
    });

    let feas = rank_feasible(p, q)?;
    let nonzero = r.value.is_some_and(|v| v > eps);
    let strict = r.value.is_some_and(|v| v > eps && v < 1.0 - eps);
    let mono_ok = !(nonzero && q.rank() < p.rank())
        && !(strict && p.rank() > 1 && dim < 4)
        && (!nonzero || feas.nonzero_possible)
        && (!strict || feas.nontrivial_possible);
    push(checks, "rank_monotonicity", mono_ok, 0.0, || {
        format!("value {:?} with rank(p) = {}, rank(q) = {}, dim {dim}", r.value, p.rank(), q.rank())
    });

    if r.exists {
        let k = p.rank();
        let m = rng.random_range(1..=k);
        let w = random_unitary(k, rng.next_u64())?;
        let rotated = p.basis() * w.as_dmatrix();
        let vectors: Vec<Ket> = (0..m).map(|j| rotated.column(j).into_owned()).collect();
        let p2 = from_span(dim, &vectors, tol)?;
        let rc = restriction_check(p, &p2, q, tol)?;
        push(checks, "restriction", rc.holds, rc.difference.unwrap_or(f64::INFINITY), || {
            format!("P(q|p1) = {}, P(q|p2) = {:?} for rank(p2) = {m}", rc.value_p1, rc.value_p2)
        });
    }

    let dp = defining_property_check(p, q, DEFINING_SAMPLES, rng.next_u64(), tol)?;
    push(checks, "defining_property", dp.holds, dp.max_deviation, || {
        format!(
            "exists {}, samples in [{}, {}], witnesses {} / {}",
            dp.exists, dp.sample_min, dp.sample_max, dp.witness_low, dp.witness_high
        )
    });

    let below = leq(p, q, tol)?;
    let orth = orthogonal(p, q, tol)?;
    let one = r.value.is_some_and(|v| v >= 1.0 - eps);
    let zero = r.value.is_some_and(|v| v <= eps);
    push(checks, "value_characterizations", one == below && zero == orth, 0.0, || {
        format!("value {:?}, p ≤ q {below}, pq = 0 {orth}", r.value)
    });

    let cos2 = principal_cosines_squared(p, q)?;
    let d = cos2
        .iter()
        .zip(&r.compression_spectrum)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let flag = r.exists == (r.spread <= eps);
    push(checks, "equiangularity", flag && d <= eps, d, || {
        format!("exists {}, spread {}, angle mismatch {d}", r.exists, r.spread)
    });

    if commutes(p, q, tol)? {
        push(checks, "commuting_classification", r.classification != Classification::Intermediate, 0.0, || {
            format!("commuting pair classified {:?}", r.classification)
        });
    }

    let mu = random_state(dim, rng.next_u64())?;
    let pc = complement(p);
    let mut worst = (evaluate(&mu, p)? + evaluate(&mu, &pc)? - 1.0).abs();
    if orth {
        let j = join(p, q, tol)?;
        worst = worst.max((evaluate(&mu, &j)? - evaluate(&mu, p)? - evaluate(&mu, q)?).abs());
    }
    if evaluate(&mu, p)? > eps {
        let cond = condition(&mu, p, tol)?;
        worst = worst.max((evaluate(&cond, p)? - 1.0).abs());
        if let Some(v) = r.value {
            worst = worst.max((evaluate(&cond, q)? - v).abs());
        }
    }
    push(checks, "state_axioms", worst <= agree, worst, || format!("state axiom residual {worst}"));

    let qc = complement(q);
    let j = join(p, q, tol)?;
    let m = meet(p, q, tol)?;
    let mut res = residual(j.matrix(), complement(&meet(&pc, &qc, tol)?).matrix())?;
    res = res.max(residual(m.matrix(), complement(&join(&pc, &qc, tol)?).matrix())?);
    res = res.max(residual(complement(&pc).matrix(), p.matrix())?);
    let w = random_unitary(p.rank().max(1), rng.next_u64())?;
    let p_alt = if p.is_zero() {
        Projection::zero(dim)
    } else {
        let rotated = p.basis() * w.as_dmatrix();
        let vectors: Vec<Ket> = (0..p.rank()).map(|j| rotated.column(j).into_owned()).collect();
        from_span(dim, &vectors, tol)?
    };
    let mut laws = leq(p, &p_alt, tol)? && leq(&p_alt, p, tol)?;
    res = res.max(residual(p.matrix(), p_alt.matrix())?);
    if below && leq(q, p, tol)? {
        res = res.max(residual(p.matrix(), q.matrix())?);
    }
    laws &= leq(&m, p, tol)? && leq(&m, q, tol)? && leq(p, &j, tol)? && leq(q, &j, tol)?;
    laws &= orth == leq(p, &qc, tol)?;
    push(checks, "lattice_laws", laws && res <= eps, res, || {
        format!("order/bounds hold {laws}, worst residual {res}")
    });
    Ok(())
}

fn run_trial(cfg: &SuiteConfig, trial: usize, tol: &ToleranceConfig) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
    let fams = families(cfg.dim);
    let family = fams[trial % fams.len()];
    let mut checks = Vec::new();
    let outcome = build_pair(family, cfg.dim, &mut rng, tol)
        .and_then(|(p, q, expect)| check_pair(&p, &q, &expect, &mut rng, tol, &mut checks));
    if let Err(e) = outcome {
        push(&mut checks, "execution", false, 0.0, || e.to_string());
    } else {
        push(&mut checks, "execution", true, 0.0, String::new);
    }
    TrialOutcome { family, checks }
}

/// `a ∧ (b ∨ c) = a` but `(a ∧ b) ∨ (a ∧ c) = 0` for the lines through `e1`,
/// `(e1 + e2)/√2` and `e2`, optionally rotated by `u`.
fn distributivity_witness(dim: usize, u: Option<&qlattice_core::ComplexMatrix>, tol: &ToleranceConfig) -> Result<Check> {
    let e1 = basis_ket(dim, 0);
    let e2 = basis_ket(dim, 1);
    let mut diag = e1.clone();
    diag[1] = Complex64::new(1.0, 0.0);
    let lines = [e1, diag.scale(FRAC_1_SQRT_2), e2]
        .iter()
        .map(|v| {
            let p = rank1_from_ket(v)?;
            match u {
                Some(u) => conjugate(&p, u, tol),
                None => Ok(p),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (a, b, c) = (&lines[0], &lines[1], &lines[2]);
    let lhs = meet(a, &join(b, c, tol)?, tol)?;
    let rhs = join(&meet(a, b, tol)?, &meet(a, c, tol)?, tol)?;
    let res = residual(lhs.matrix(), a.matrix())?.max(rhs.matrix().frobenius_norm());
    let gap = residual(lhs.matrix(), rhs.matrix())?;
    let passed = res <= tol.eps_exist && gap >= 0.5;
    Ok(Check {
        property: "distributivity_witness",
        passed,
        residual: res,
        detail: if passed {
            String::new()
        } else {
            format!("residual {res}, gap between the two sides {gap}")
        },
    })
}

pub fn run_suite(cfg: &SuiteConfig, tol: &ToleranceConfig) -> Result<SuiteReport> {
    if cfg.dim < 2 {
        return Err(Error::Domain(format!("suite dimension must be at least 2, got {}", cfg.dim)));
    }
    if cfg.trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    tol.validate()?;

    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t, tol))
        .collect();
    let u = random_unitary(cfg.dim, trial_seed(cfg.seed, usize::MAX))?;
    let witnesses = vec![
        distributivity_witness(cfg.dim, None, tol)?,
        distributivity_witness(cfg.dim, Some(&u), tol)?,
    ];

    let mut summaries: Vec<PropertySummary> = PROPERTIES
        .iter()
        .map(|name| PropertySummary {
            name: name.to_string(),
            checked: 0,
            passed: 0,
            failed: 0,
            worst_residual: 0.0,
            first_failure: None,
        })
        .collect();
    let mut families_seen = BTreeMap::new();
    let mut failures = Vec::new();
    let mut total_failures = 0;
    let mut total_checks = 0;
    let suite_level = TrialOutcome {
        family: "suite",
        checks: witnesses,
    };
    let indexed = outcomes
        .iter()
        .enumerate()
        .map(|(t, o)| (Some(t), o))
        .chain(std::iter::once((None, &suite_level)));
    for (trial, outcome) in indexed {
        if trial.is_some() {
            *families_seen.entry(outcome.family.to_string()).or_insert(0) += 1;
        }
        for check in &outcome.checks {
            let s = summaries
                .iter_mut()
                .find(|s| s.name == check.property)
                .expect("every check names a listed property");
            total_checks += 1;
            s.checked += 1;
            if check.residual.is_finite() {
                s.worst_residual = s.worst_residual.max(check.residual);
            }
            if check.passed {
                s.passed += 1;
            } else {
                s.failed += 1;
                total_failures += 1;
                if s.first_failure.is_none() {
                    s.first_failure = trial;
                }
                if failures.len() < MAX_LISTED_FAILURES {
                    failures.push(FailureRecord {
                        trial,
                        family: outcome.family.to_string(),
                        property: check.property.to_string(),
                        detail: check.detail.clone(),
                    });
                }
            }
        }
    }
    Ok(SuiteReport {
        dim: cfg.dim,
        trials: cfg.trials,
        seed: cfg.seed,
        regime: if cfg.dim < 4 {
            "rank-1 transitions only: no intermediate transition from a projection of rank ≥ 2 below dimension 4".into()
        } else {
            "general".into()
        },
        passed: total_failures == 0,
        total_checks,
        total_failures,
        families: families_seen,
        properties: summaries,
        failures,
    })
}
