//! On-disk form of an exclusion certificate.

use std::path::Path;

use qlattice_core::lattice::validate_projection;
use qlattice_core::states::DerivationStep;
use qlattice_core::{ExclusionCertificate, ToleranceConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::matrix_file::{sha256_hex, MatrixFile};

pub const LINEAR_SCOPE: &str = "linear states (density matrices)";
pub const DIM2_NOTE: &str = "in dimension 2 the exclusion covers linear states only; \
non-linear states on the projection lattice of a qubit are not excluded by this certificate";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub dim: usize,
    pub seed: u64,
    pub scope: String,
    pub basis_projectors: Vec<MatrixFile>,
    pub partners: Vec<MatrixFile>,
    pub partner_values: Vec<f64>,
    pub derivation: Vec<DerivationStep>,
    pub contradiction: String,
}

impl CertificateFile {
    pub fn from_certificate(cert: &ExclusionCertificate) -> Self {
        let files = |ps: &[qlattice_core::Projection], stem: &str| {
            ps.iter()
                .enumerate()
                .map(|(i, p)| MatrixFile::from_matrix(p.matrix(), Some(&format!("{stem}_{}", i + 1))))
                .collect()
        };
        CertificateFile {
            dim: cert.dim,
            seed: cert.seed,
            scope: LINEAR_SCOPE.to_string(),
            basis_projectors: files(&cert.basis_projectors, "p"),
            partners: files(&cert.partners, "q"),
            partner_values: cert.partner_values.clone(),
            derivation: cert.derivation.clone(),
            contradiction: cert.contradiction.clone(),
        }
    }

    /// Rebuilds the certificate, revalidating every stored projection.
    pub fn to_certificate(&self, tol: &ToleranceConfig, origin: &str) -> CliResult<ExclusionCertificate> {
        let load = |fs: &[MatrixFile]| {
            fs.iter()
                .map(|f| Ok(validate_projection(&f.to_matrix(origin)?, tol)?))
                .collect::<CliResult<Vec<_>>>()
        };
        Ok(ExclusionCertificate {
            dim: self.dim,
            seed: self.seed,
            basis_projectors: load(&self.basis_projectors)?,
            partners: load(&self.partners)?,
            partner_values: self.partner_values.clone(),
            derivation: self.derivation.clone(),
            contradiction: self.contradiction.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates serialize");
        s.push('\n');
        s
    }
}

/// Reads a certificate file; returns it with the SHA-256 of its bytes.
pub fn read_certificate(path: &Path) -> CliResult<(CertificateFile, String)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let file = serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    Ok((file, sha256_hex(&bytes)))
}
