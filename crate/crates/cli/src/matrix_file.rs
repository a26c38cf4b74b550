//! JSON matrix files: `{"dim": n, "label": "...", "entries": [[[re, im], ...], ...]}`.

use std::path::Path;

use qlattice_core::lattice::validate_projection;
use qlattice_core::{Complex64, ComplexMatrix, Projection, ToleranceConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix, label: Option<&str>) -> Self {
        let n = m.dim();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = m.get(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        MatrixFile {
            dim: n,
            label: label.map(str::to_string),
            entries,
        }
    }

    /// Checks the declared shape and converts to a matrix. `origin` names the
    /// source in error messages.
    pub fn to_matrix(&self, origin: &str) -> CliResult<ComplexMatrix> {
        let parse = |reason: String| CliError::Parse {
            path: origin.to_string(),
            reason,
        };
        if self.dim == 0 {
            return Err(parse("dim must be at least 1".into()));
        }
        if self.entries.len() != self.dim {
            return Err(parse(format!(
                "dim is {} but entries has {} rows",
                self.dim,
                self.entries.len()
            )));
        }
        let mut rows = Vec::with_capacity(self.dim);
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != self.dim {
                return Err(parse(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    self.dim
                )));
            }
            if row.iter().flatten().any(|x| !x.is_finite()) {
                return Err(parse(format!("row {i} contains a non-finite entry")));
            }
            rows.push(row.iter().map(|&[re, im]| Complex64::new(re, im)).collect());
        }
        ComplexMatrix::from_rows(&rows).map_err(|e| parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("matrix files always serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            reason: e.to_string(),
        })
    }
}

/// Contents of a file read from disk, with its SHA-256.
#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub path: String,
    pub label: Option<String>,
    pub sha256: String,
    pub matrix: ComplexMatrix,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_matrix(path: &Path) -> CliResult<LoadedMatrix> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let origin = path.display().to_string();
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse {
        path: origin.clone(),
        reason: e.to_string(),
    })?;
    let file = MatrixFile::parse(text, &origin)?;
    let matrix = file.to_matrix(&origin)?;
    Ok(LoadedMatrix {
        path: origin,
        label: file.label,
        sha256: sha256_hex(&bytes),
        matrix,
    })
}

pub fn read_projection(path: &Path, tol: &ToleranceConfig) -> CliResult<(LoadedMatrix, Projection)> {
    let loaded = read_matrix(path)?;
    let p = validate_projection(&loaded.matrix, tol)?;
    Ok((loaded, p))
}

/// Writes the file and returns the SHA-256 of what was written.
pub fn write_matrix(path: &Path, m: &ComplexMatrix, label: Option<&str>) -> CliResult<String> {
    let text = MatrixFile::from_matrix(m, label).to_json();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_shape_mismatch() {
        let f = MatrixFile::parse(r#"{"dim":2,"entries":[[[1,0],[0,0]]]}"#, "t").unwrap();
        assert!(matches!(f.to_matrix("t"), Err(CliError::Parse { .. })));
        let f = MatrixFile::parse(r#"{"dim":2,"entries":[[[1,0],[0,0]],[[0,0]]]}"#, "t").unwrap();
        assert!(matches!(f.to_matrix("t"), Err(CliError::Parse { .. })));
    }

    #[test]
    fn rejects_unknown_fields_and_truncation() {
        assert!(MatrixFile::parse(r#"{"dim":1,"entries":[[[1,0]]],"x":1}"#, "t").is_err());
        assert!(MatrixFile::parse(r#"{"dim":1,"entries":[[[1,0]"#, "t").is_err());
    }

    #[test]
    fn label_is_optional() {
        let f = MatrixFile::parse(r#"{"dim":1,"entries":[[[1.0,0.0]]]}"#, "t").unwrap();
        assert_eq!(f.label, None);
        assert_eq!(f.to_json(), "{\"dim\":1,\"entries\":[[[1.0,0.0]]]}\n");
    }

    #[test]
    fn exact_round_trip() {
        let u = qlattice_core::kernel::random_unitary(5, 9).unwrap();
        let text = MatrixFile::from_matrix(&u, Some("u")).to_json();
        let back = MatrixFile::parse(&text, "t").unwrap().to_matrix("t").unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(u.get(i, j).re.to_bits(), back.get(i, j).re.to_bits());
                assert_eq!(u.get(i, j).im.to_bits(), back.get(i, j).im.to_bits());
            }
        }
    }
}
