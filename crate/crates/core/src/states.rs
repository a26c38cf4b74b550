//! Linear states represented by density matrices.
//!
//! Covers evaluation `μ(x) = tr(ρx)`, conditioning `μ_p(x) = μ(pxp)/μ(p)`,
//! Monte-Carlo verification that `P(q|p)` fixes `μ(q)` on every state with
//! `μ(p) = 1`, and a machine-checked certificate that no dispersion-free
//! linear state exists.
//!
//! States on the lattice that do not extend linearly (possible in dimension
//! two) are not representable here.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    eigh_unchecked, ginibre, residual, seeded_rng, Complex64, ComplexMatrix, ToleranceConfig,
};
use crate::lattice::{orthogonal, rank1_from_ket, Projection};
use crate::transition::{agreement, compression, transition_probability};

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    rho: ComplexMatrix,
}

impl DensityState {
    /// Validates `rho` as a density matrix, then removes rounding dust by
    /// clipping negative eigenvalues and renormalizing the trace.
    pub fn new(rho: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let herm = rho.hermitian_residual();
        if herm > tol.eps_structural {
            return Err(Error::NotDensity(format!(
                "not Hermitian (residual {herm:.3e})"
            )));
        }
        let dim = rho.dim();
        let trace = rho.trace().re;
        if (trace - 1.0).abs() > tol.eps_structural * dim as f64 {
            return Err(Error::NotDensity(format!("trace is {trace}, expected 1")));
        }
        let h = rho.hermitian_part();
        let (values, vectors) = eigh_unchecked(h.as_dmatrix());
        let min = values[0];
        if min < -tol.eps_structural {
            return Err(Error::NotDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        let cleaned = if min < 0.0 {
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            for (l, v) in values.iter().zip(&vectors) {
                if *l > 0.0 {
                    m += (v * v.adjoint()).map(|z| z * *l);
                }
            }
            ComplexMatrix::from_dmatrix(m)?
        } else {
            h
        };
        Ok(Self::from_psd(cleaned))
    }

    /// Normalizes an operator known to be positive semidefinite and nonzero.
    fn from_psd(m: ComplexMatrix) -> Self {
        let t = m.trace().re;
        Self {
            rho: m.hermitian_part().scale(1.0 / t),
        }
    }

    /// The vector state `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &crate::kernel::Ket) -> Result<Self> {
        Ok(Self {
            rho: rank1_from_ket(psi)?.matrix().clone(),
        })
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            rho: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `tr(ρx)` for an arbitrary bounded operator `x`.
    pub fn expectation(&self, x: &ComplexMatrix) -> Result<Complex64> {
        Ok(self.rho.try_mul(x)?.trace())
    }
}

/// `μ(p) = tr(ρp)`, clamped to `[0, 1]`.
pub fn evaluate(mu: &DensityState, p: &Projection) -> Result<f64> {
    Ok(mu.expectation(p.matrix())?.re.clamp(0.0, 1.0))
}

/// The conditioned state `x ↦ μ(pxp)/μ(p)`, i.e. `pρp / tr(pρp)`.
pub fn condition(mu: &DensityState, p: &Projection, tol: &ToleranceConfig) -> Result<DensityState> {
    let probability = evaluate(mu, p)?;
    if probability <= tol.eps_exist {
        return Err(Error::ConditioningOnNull { probability });
    }
    let prp = &(p.matrix() * mu.rho()) * p.matrix();
    Ok(DensityState::from_psd(prp))
}

fn random_supported<R: Rng>(p: &Projection, rng: &mut R) -> Result<DensityState> {
    if p.is_zero() {
        return Err(Error::ZeroProjection);
    }
    let k = p.rank();
    // random rank between 1 and k so that impure and nearly pure states both occur
    let cols = rng.random_range(1..=k);
    let g = ginibre(k, cols, rng);
    let b = p.basis();
    let m = b * (&g * g.adjoint()) * b.adjoint();
    Ok(DensityState::from_psd(ComplexMatrix::from_dmatrix(m)?))
}

/// A random density matrix with `μ(p) = 1`, deterministic in `seed`.
pub fn random_state_supported_in(p: &Projection, seed: u64) -> Result<DensityState> {
    random_supported(p, &mut seeded_rng(seed))
}

/// A random full-rank density matrix on the whole space.
pub fn random_state(dim: usize, seed: u64) -> Result<DensityState> {
    random_state_supported_in(&Projection::identity(dim), seed)
}

/// Outcome of sampling `μ(q)` over states with `μ(p) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefiningPropertyReport {
    pub exists: bool,
    pub value: Option<f64>,
    pub n_samples: usize,
    pub sample_min: f64,
    pub sample_max: f64,
    /// Largest `|μ(q) − P(q|p)|` over samples and witnesses; zero when the
    /// transition probability does not exist.
    pub max_deviation: f64,
    /// `μ(q)` for the pure state on the bottom eigenvector of the compression.
    pub witness_low: f64,
    /// `μ(q)` for the pure state on the top eigenvector of the compression.
    pub witness_high: f64,
    pub holds: bool,
}

/// Checks that `μ(q)` is pinned to `P(q|p)` on states supported in `pH`, or,
/// when `P(q|p)` does not exist, exhibits two such states that disagree.
pub fn defining_property_check(
    p: &Projection,
    q: &Projection,
    n_samples: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<DefiningPropertyReport> {
    if n_samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    let result = transition_probability(p, q, tol)?;
    let mut rng = seeded_rng(seed);
    let samples = (0..n_samples)
        .map(|_| evaluate(&random_supported(p, &mut rng)?, q))
        .collect::<Result<Vec<f64>>>()?;

    // extreme states: eigenvectors of the compression at its smallest and
    // largest eigenvalue, lifted back into pH
    let c = compression(p, q)?;
    let (_, vectors) = eigh_unchecked(c.hermitian_part().as_dmatrix());
    let lift = |v: &crate::kernel::Ket| DensityState::pure(&(p.basis() * v));
    let witness_low = evaluate(&lift(vectors.first().unwrap())?, q)?;
    let witness_high = evaluate(&lift(vectors.last().unwrap())?, q)?;

    let sample_min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let sample_max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (max_deviation, holds) = match result.value {
        Some(v) => {
            let dev = samples
                .iter()
                .chain([&witness_low, &witness_high])
                .map(|s| (s - v).abs())
                .fold(0.0, f64::max);
            (dev, dev <= agreement(tol))
        }
        None => (0.0, witness_high - witness_low > tol.eps_exist),
    };
    Ok(DefiningPropertyReport {
        exists: result.exists,
        value: result.value,
        n_samples,
        sample_min,
        sample_max,
        max_deviation,
        witness_low,
        witness_high,
        holds,
    })
}

/// One checked claim in an exclusion certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Claim {
    /// The `p_i` are rank one and pairwise orthogonal.
    BasisOrthogonal,
    /// `Σ p_i = I`.
    BasisResolvesIdentity,
    /// `P(q_i|p_i)` exists and equals `value`.
    PartnerTransition { index: usize, value: f64 },
    /// Every state with `μ(p_i) = 1` has `μ(q_i) = P(q_i|p_i)`.
    ForcedValue { index: usize },
    /// `P(q_i|p_i) ∉ {0, 1}`, so a dispersion-free μ cannot have `μ(p_i) = 1`.
    Vanishes { index: usize },
    /// Additivity over the orthogonal `p_i`: `μ(I) = Σ μ(p_i) = 0`.
    Additivity,
    /// `μ(I) = 1` for every state.
    Normalization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub step: usize,
    pub claim: Claim,
    pub statement: String,
    /// Worst residual observed while checking the claim.
    pub measured: f64,
    pub verified: bool,
}

/// Finite proof that no dispersion-free linear state exists in dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionCertificate {
    pub dim: usize,
    pub seed: u64,
    pub basis_projectors: Vec<Projection>,
    pub partners: Vec<Projection>,
    pub partner_values: Vec<f64>,
    pub derivation: Vec<DerivationStep>,
    pub contradiction: String,
}

const CONTRADICTION: &str = "0 = Σμ(pᵢ) = μ(I) = 1";
const MIN_MARGIN: f64 = 0.01;
const STATE_SAMPLES: usize = 8;

impl ExclusionCertificate {
    /// Re-runs every claim of the derivation against the stored projections.
    pub fn verify(&self, tol: &ToleranceConfig) -> Result<()> {
        if self.basis_projectors.len() != self.dim || self.partners.len() != self.dim {
            return Err(Error::Certificate {
                step: 0,
                reason: "certificate does not list one basis projector and partner per dimension"
                    .into(),
            });
        }
        for step in &self.derivation {
            let checked = self.check_claim(&step.claim, tol)?;
            if !checked.1 {
                return Err(Error::Certificate {
                    step: step.step,
                    reason: format!("{} (residual {:.3e})", step.statement, checked.0),
                });
            }
        }
        let covered = |pred: &dyn Fn(&Claim) -> bool| self.derivation.iter().any(|s| pred(&s.claim));
        let complete = covered(&|c| matches!(c, Claim::BasisOrthogonal))
            && covered(&|c| matches!(c, Claim::BasisResolvesIdentity))
            && covered(&|c| matches!(c, Claim::Additivity))
            && covered(&|c| matches!(c, Claim::Normalization))
            && (0..self.dim).all(|i| {
                covered(&|c| matches!(c, Claim::Vanishes { index } if *index == i))
                    && covered(&|c| matches!(c, Claim::PartnerTransition { index, .. } if *index == i))
            });
        if !complete {
            return Err(Error::Certificate {
                step: self.derivation.len(),
                reason: "derivation does not cover every basis projector".into(),
            });
        }
        Ok(())
    }

    /// Returns `(worst residual, passed)` for a single claim.
    fn check_claim(&self, claim: &Claim, tol: &ToleranceConfig) -> Result<(f64, bool)> {
        let dim = self.dim;
        Ok(match claim {
            Claim::BasisOrthogonal => {
                let mut worst = 0.0f64;
                let mut ok = self.basis_projectors.iter().all(|p| p.rank() == 1);
                for (i, a) in self.basis_projectors.iter().enumerate() {
                    for b in &self.basis_projectors[i + 1..] {
                        worst = worst.max((a.matrix() * b.matrix()).frobenius_norm());
                        ok &= orthogonal(a, b, tol)?;
                    }
                }
                (worst, ok)
            }
            Claim::BasisResolvesIdentity => {
                let sum = self
                    .basis_projectors
                    .iter()
                    .fold(ComplexMatrix::zeros(dim), |acc, p| &acc + p.matrix());
                let r = residual(&sum, &ComplexMatrix::identity(dim))?;
                (r, r <= tol.eps_structural)
            }
            Claim::PartnerTransition { index, value } => {
                let r = transition_probability(
                    &self.basis_projectors[*index],
                    &self.partners[*index],
                    tol,
                )?;
                match r.value {
                    Some(v) => {
                        let dev = (v - value).abs().max((v - self.partner_values[*index]).abs());
                        (dev, dev <= tol.eps_structural)
                    }
                    None => (r.residual_compression, false),
                }
            }
            Claim::ForcedValue { index } => {
                let p = &self.basis_projectors[*index];
                let q = &self.partners[*index];
                let value = self.partner_values[*index];
                let mut worst = 0.0f64;
                for s in 0..STATE_SAMPLES as u64 {
                    let seed = self.sample_seed(*index, s);
                    let supported = random_state_supported_in(p, seed)?;
                    let conditioned = condition(&random_state(dim, seed ^ 0xA5A5)?, p, tol)?;
                    for mu in [supported, conditioned] {
                        worst = worst.max((evaluate(&mu, q)? - value).abs());
                    }
                }
                (worst, worst <= agreement(tol))
            }
            Claim::Vanishes { index } => {
                let v = self.partner_values[*index];
                let margin = v.min(1.0 - v);
                (margin, margin >= MIN_MARGIN)
            }
            Claim::Additivity => {
                let mut worst = 0.0f64;
                for s in 0..STATE_SAMPLES as u64 {
                    let mu = random_state(dim, self.sample_seed(dim, s))?;
                    let sum = self
                        .basis_projectors
                        .iter()
                        .map(|p| mu.expectation(p.matrix()).map(|z| z.re))
                        .sum::<Result<f64>>()?;
                    let whole = mu.expectation(&ComplexMatrix::identity(dim))?.re;
                    worst = worst.max((sum - whole).abs());
                }
                (worst, worst <= 10.0 * tol.eps_structural)
            }
            Claim::Normalization => {
                let mut worst = 0.0f64;
                for s in 0..STATE_SAMPLES as u64 {
                    let mu = random_state(dim, self.sample_seed(dim + 1, s))?;
                    worst = worst.max((evaluate(&mu, &Projection::identity(dim))? - 1.0).abs());
                }
                (worst, worst <= tol.eps_structural)
            }
        })
    }

    fn sample_seed(&self, slot: usize, sample: u64) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add((slot as u64) << 32)
            .wrapping_add(sample)
    }
}

/// Builds and verifies the certificate: standard basis lines `p_i`, partners
/// `q_i` on `(e_i + e_{i+1 mod dim})/√2` with `P(q_i|p_i) = 1/2`. The seed
/// drives the random states used to re-check each claim.
pub fn deterministic_exclusion_certificate(
    dim: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<ExclusionCertificate> {
    if dim < 2 {
        return Err(Error::Domain(
            "dimension must be at least 2; in dimension 1 every transition probability is 0 or 1"
                .into(),
        ));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let basis_projectors = (0..dim)
        .map(|i| rank1_from_ket(&crate::kernel::basis_ket(dim, i)))
        .collect::<Result<Vec<_>>>()?;
    let partners = (0..dim)
        .map(|i| {
            let mut v = crate::kernel::basis_ket(dim, i).scale(h);
            v[(i + 1) % dim] += Complex64::new(h, 0.0);
            rank1_from_ket(&v)
        })
        .collect::<Result<Vec<_>>>()?;
    let partner_values = basis_projectors
        .iter()
        .zip(&partners)
        .map(|(p, q)| {
            transition_probability(p, q, tol)?
                .value
                .ok_or(Error::Certificate {
                    step: 0,
                    reason: "partner transition probability does not exist".into(),
                })
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut claims: Vec<(Claim, String)> = vec![
        (
            Claim::BasisOrthogonal,
            format!("p_1, …, p_{dim} are pairwise orthogonal rank-one projections"),
        ),
        (
            Claim::BasisResolvesIdentity,
            format!("p_1 + … + p_{dim} = I"),
        ),
    ];
    for (i, v) in partner_values.iter().enumerate() {
        let n = i + 1;
        claims.push((
            Claim::PartnerTransition { index: i, value: *v },
            format!("P(q_{n}|p_{n}) exists and equals {v:.12}"),
        ));
        claims.push((
            Claim::ForcedValue { index: i },
            format!("every state μ with μ(p_{n}) = 1 has μ(q_{n}) = {v:.12}"),
        ));
        claims.push((
            Claim::Vanishes { index: i },
            format!(
                "a dispersion-free μ with μ(p_{n}) = 1 would give μ(q_{n}) = {v:.12} ∉ {{0, 1}}, hence μ(p_{n}) = 0"
            ),
        ));
    }
    claims.push((
        Claim::Additivity,
        "additivity over the orthogonal p_i gives μ(I) = Σμ(p_i) = 0".into(),
    ));
    claims.push((Claim::Normalization, "every state has μ(I) = 1".into()));

    let mut cert = ExclusionCertificate {
        dim,
        seed,
        basis_projectors,
        partners,
        partner_values,
        derivation: Vec::with_capacity(claims.len()),
        contradiction: CONTRADICTION.to_string(),
    };
    for (step, (claim, statement)) in claims.into_iter().enumerate() {
        let (measured, verified) = cert.check_claim(&claim, tol)?;
        cert.derivation.push(DerivationStep {
            step: step + 1,
            claim,
            statement,
            measured,
            verified,
        });
    }
    cert.verify(tol)?;
    Ok(cert)
}
