use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qlattice_core::generators::{
    asymmetric_pair, conjugated_family, example4, mask_classification, nonexistence_pair_commuting,
    overlap_probability, rank1_pair, Example4Params,
};
use qlattice_core::kernel::residual;
use qlattice_core::lattice::{commutes, validate_projection};
use qlattice_core::states::deterministic_exclusion_certificate;
use qlattice_core::transition::{
    assess_trace_estimate, principal_cosines_squared, rank_feasible, symmetry_report,
    transition_probability, transition_rank1,
};
use qlattice_core::{Classification, Complex64, Error, Ket, Projection, ToleranceConfig, TransitionResult};
use serde_json::{json, Value};

use crate::certificate::{read_certificate, CertificateFile, DIM2_NOTE};
use crate::error::{CliError, CliResult};
use crate::matrix_file::{read_matrix, read_projection, write_matrix, LoadedMatrix};
use crate::report::{InputRecord, Report};

fn input(role: &str, m: &LoadedMatrix) -> InputRecord {
    InputRecord {
        role: role.to_string(),
        path: m.path.clone(),
        label: m.label.clone(),
        sha256: m.sha256.clone(),
    }
}

fn describe(r: &TransitionResult) -> String {
    match r.value {
        Some(v) => format!("exists, value {v:.12} ({:?})", r.classification),
        None => format!("does not exist (compression spread {:.3e})", r.spread),
    }
}

pub fn check(file: &Path, tol: &ToleranceConfig, report: &mut Report, log: &mut String) -> CliResult<()> {
    let loaded = read_matrix(file)?;
    report.inputs.push(input("matrix", &loaded));
    let m = &loaded.matrix;
    let hermitian_residual = m.hermitian_residual();
    let idempotent_residual = residual(&(m * m), m)?;
    match validate_projection(m, tol) {
        Ok(p) => {
            report.results = json!({
                "valid": true,
                "dim": p.dim(),
                "rank": p.rank(),
                "hermitian_residual": hermitian_residual,
                "idempotent_residual": idempotent_residual,
            });
            let _ = writeln!(log, "{}: valid projection, dim {}, rank {}", loaded.path, p.dim(), p.rank());
            Ok(())
        }
        Err(e) => {
            let err = CliError::Core(e);
            report.results = json!({
                "valid": false,
                "dim": m.dim(),
                "reason": err.kind(),
                "hermitian_residual": hermitian_residual,
                "idempotent_residual": idempotent_residual,
            });
            let _ = writeln!(log, "{}: not a projection: {err}", loaded.path);
            Err(err)
        }
    }
}

pub fn tp(
    p_path: &Path,
    q_path: &Path,
    tol: &ToleranceConfig,
    report: &mut Report,
    log: &mut String,
) -> CliResult<()> {
    let (lp, p) = read_projection(p_path, tol)?;
    report.inputs.push(input("p", &lp));
    let (lq, q) = read_projection(q_path, tol)?;
    report.inputs.push(input("q", &lq));
    if p.dim() != q.dim() {
        return Err(Error::Shape(format!("p has dimension {} but q has dimension {}", p.dim(), q.dim())).into());
    }
    let forward = transition_probability(&p, &q, tol)?;
    let (backward, symmetric_ok) = if q.is_zero() {
        (None, None)
    } else {
        let s = symmetry_report(&p, &q, tol)?;
        (Some(s.backward), Some(s.symmetric_ok))
    };
    let trace = assess_trace_estimate(&p, &q, tol)?;
    let feasibility = rank_feasible(&p, &q)?;
    report.results = json!({
        "dim": p.dim(),
        "rank_p": p.rank(),
        "rank_q": q.rank(),
        "exists": forward.exists,
        "value": forward.value,
        "classification": forward.classification,
        "compression_spectrum": forward.compression_spectrum,
        "forward": forward,
        "backward": backward,
        "symmetric_ok": symmetric_ok,
        "feasibility": feasibility,
        "trace_estimate": trace,
        "principal_cosines_squared": principal_cosines_squared(&p, &q)?,
        "commutes": commutes(&p, &q, tol)?,
    });
    let _ = writeln!(log, "P(q|p) {}", describe(&forward));
    match &backward {
        Some(b) => {
            let _ = writeln!(log, "P(p|q) {}", describe(b));
        }
        None => {
            let _ = writeln!(log, "P(p|q) undefined: q = 0");
        }
    }
    let _ = writeln!(
        log,
        "tr(pq)/tr(p) = {:.12}{}",
        trace.value,
        if trace.is_meaningful { "" } else { " (not a transition probability)" }
    );
    Ok(())
}

/// Parses `"1,0"` or `"0.5:0.5,1"` (`re:im`) into a ket.
pub fn parse_ket(text: &str) -> CliResult<Ket> {
    let bad = |why: String| CliError::Parameter(format!("cannot parse vector {text:?}: {why}"));
    let entries = text
        .split(',')
        .map(|item| {
            let item = item.trim();
            let (re, im) = item.split_once(':').unwrap_or((item, "0"));
            let re: f64 = re.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let im: f64 = im.trim().parse().map_err(|e| bad(format!("{e}")))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(bad("non-finite component".into()));
            }
            Ok(Complex64::new(re, im))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Ket::from_vec(entries))
}

/// Parses `"1100"` or `"1,1,0,0"`.
pub fn parse_mask(text: &str) -> CliResult<Vec<bool>> {
    text.chars()
        .filter(|c| *c != ',' && !c.is_whitespace())
        .map(|c| match c {
            '1' => Ok(true),
            '0' => Ok(false),
            _ => Err(CliError::Parameter(format!("mask {text:?} may only contain 0 and 1"))),
        })
        .collect()
}

fn write_pair(out_dir: &Path, stem: &str, p: &Projection, q: &Projection, log: &mut String) -> CliResult<Value> {
    let mut files = Vec::new();
    for (role, m) in [("p", p), ("q", q)] {
        let path = out_dir.join(format!("{stem}_{role}.json"));
        let sha256 = write_matrix(&path, m.matrix(), Some(role))?;
        let _ = writeln!(log, "wrote {}", path.display());
        files.push(json!({ "role": role, "path": path.display().to_string(), "sha256": sha256 }));
    }
    Ok(Value::Array(files))
}

fn matches_value(r: &TransitionResult, expected: f64, tol: &ToleranceConfig) -> bool {
    r.value.is_some_and(|v| (v - expected).abs() <= 10.0 * tol.eps_exist)
}

pub enum GenRequest {
    Example4 { s1: f64, s2: f64, s3: f64 },
    Rank1 { psi: String, phi: String },
    Commuting { mask_p: String, mask_q: String },
    Asymmetric { dim: usize, seed: u64 },
    Conjugate { p: PathBuf, q: PathBuf, seed: u64, n: usize },
}

pub fn gen(
    request: &GenRequest,
    out_dir: &Path,
    tol: &ToleranceConfig,
    report: &mut Report,
    log: &mut String,
) -> CliResult<()> {
    let (results, ok) = match request {
        GenRequest::Example4 { s1, s2, s3 } => {
            let params = Example4Params::new(*s1, *s2, *s3, tol)?;
            let (p, q) = example4(&params, tol)?;
            let predicted = params.predicted_value();
            let computed = transition_probability(&p, &q, tol)?;
            let ok = matches_value(&computed, predicted, tol);
            let _ = writeln!(log, "example4: predicted P(q|p) = {predicted:.12}");
            let files = write_pair(out_dir, "example4", &p, &q, log)?;
            (
                json!({
                    "generator": "example4",
                    "params": { "s1": s1, "s2": s2, "s3": s3 },
                    "files": files,
                    "predicted": { "exists": true, "value": predicted },
                    "computed": computed,
                    "prediction_ok": ok,
                }),
                ok,
            )
        }
        GenRequest::Rank1 { psi, phi } => {
            let (psi, phi) = (parse_ket(psi)?, parse_ket(phi)?);
            let (p, q) = rank1_pair(&psi, &phi)?;
            let predicted = overlap_probability(&psi, &phi)?;
            let s = symmetry_report(&p, &q, tol)?;
            let ok = matches_value(&s.forward, predicted, tol)
                && matches_value(&s.backward, predicted, tol)
                && s.symmetric_ok;
            let _ = writeln!(log, "rank1: predicted P(q|p) = P(p|q) = {predicted:.12}");
            let files = write_pair(out_dir, "rank1", &p, &q, log)?;
            (
                json!({
                    "generator": "rank1",
                    "files": files,
                    "predicted": { "exists": true, "value": predicted, "backward_value": predicted },
                    "computed": s.forward,
                    "computed_backward": s.backward,
                    "prediction_ok": ok,
                }),
                ok,
            )
        }
        GenRequest::Commuting { mask_p, mask_q } => {
            let (mp, mq) = (parse_mask(mask_p)?, parse_mask(mask_q)?);
            let (p, q) = nonexistence_pair_commuting(mp.len(), &mp, &mq)?;
            let predicted = mask_classification(&mp, &mq);
            let computed = transition_probability(&p, &q, tol)?;
            let ok = computed.classification == predicted && predicted == Classification::NoTransition;
            let _ = writeln!(log, "commuting: predicted {predicted:?}");
            let files = write_pair(out_dir, "commuting", &p, &q, log)?;
            (
                json!({
                    "generator": "commuting",
                    "params": { "mask_p": mp, "mask_q": mq },
                    "files": files,
                    "predicted": { "exists": false, "classification": predicted },
                    "computed": computed,
                    "prediction_ok": ok,
                }),
                ok,
            )
        }
        GenRequest::Asymmetric { dim, seed } => {
            let (p, q) = asymmetric_pair(*dim, *seed, tol)?;
            let psi = p.basis_vectors().remove(0);
            let predicted = transition_rank1(&psi, &q)?;
            let forward = transition_probability(&p, &q, tol)?;
            let backward = transition_probability(&q, &p, tol)?;
            let ok = matches_value(&forward, predicted, tol) && !backward.exists;
            let _ = writeln!(log, "asymmetric: predicted P(q|p) = {predicted:.12}, P(p|q) absent");
            let files = write_pair(out_dir, "asymmetric", &p, &q, log)?;
            (
                json!({
                    "generator": "asymmetric",
                    "params": { "dim": dim, "seed": seed },
                    "files": files,
                    "predicted": { "exists": true, "value": predicted, "backward_exists": false },
                    "computed": forward,
                    "computed_backward": backward,
                    "prediction_ok": ok,
                }),
                ok,
            )
        }
        GenRequest::Conjugate { p, q, seed, n } => {
            let (lp, pp) = read_projection(p, tol)?;
            report.inputs.push(input("p", &lp));
            let (lq, qq) = read_projection(q, tol)?;
            report.inputs.push(input("q", &lq));
            let original = transition_probability(&pp, &qq, tol)?;
            let family = conjugated_family(&pp, &qq, *seed, *n, tol)?;
            let mut members = Vec::with_capacity(family.len());
            let mut ok = true;
            for (i, (cp, cq)) in family.iter().enumerate() {
                let r = transition_probability(cp, cq, tol)?;
                let member_ok = r.exists == original.exists
                    && r.classification == original.classification
                    && original.value.is_none_or(|v| matches_value(&r, v, tol));
                ok &= member_ok;
                let files = write_pair(out_dir, &format!("conjugate_{}", i + 1), cp, cq, log)?;
                members.push(json!({ "index": i + 1, "files": files, "computed": r, "prediction_ok": member_ok }));
            }
            let _ = writeln!(log, "conjugate: {} pairs, each predicted to match P(q|p) {}", n, describe(&original));
            (
                json!({
                    "generator": "conjugate",
                    "params": { "seed": seed, "n": n },
                    "predicted": {
                        "exists": original.exists,
                        "value": original.value,
                        "classification": original.classification,
                    },
                    "members": members,
                    "prediction_ok": ok,
                }),
                ok,
            )
        }
    };
    report.results = results;
    if ok {
        Ok(())
    } else {
        Err(CliError::Verification(
            "a generated pair does not match its predicted transition probability".into(),
        ))
    }
}

pub fn demo_no_deterministic(
    dim: usize,
    seed: u64,
    out: Option<&Path>,
    tol: &ToleranceConfig,
    report: &mut Report,
    log: &mut String,
) -> CliResult<()> {
    let cert = deterministic_exclusion_certificate(dim, seed, tol)?;
    let default_path = PathBuf::from(format!("no_deterministic_dim{dim}.json"));
    let path = out.unwrap_or(&default_path);
    let text = CertificateFile::from_certificate(&cert).to_json();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
    let _ = writeln!(log, "wrote {}", path.display());

    let (stored, sha256) = read_certificate(path)?;
    let reloaded = stored.to_certificate(tol, &path.display().to_string())?;
    if reloaded != cert {
        return Err(CliError::Verification("certificate changed on reload".into()));
    }
    reloaded.verify(tol)?;
    let _ = writeln!(
        log,
        "certificate verified: {} claims, contradiction {}",
        cert.derivation.len(),
        cert.contradiction
    );
    let mut results = json!({
        "certificate_file": path.display().to_string(),
        "sha256": sha256,
        "dim": dim,
        "seed": seed,
        "scope": stored.scope,
        "partner_values": cert.partner_values,
        "derivation": cert.derivation,
        "contradiction": cert.contradiction,
        "verified": true,
    });
    if dim == 2 {
        results["note"] = json!(DIM2_NOTE);
        let _ = writeln!(log, "note: {DIM2_NOTE}");
    }
    report.results = results;
    Ok(())
}
