//! CSV emission and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use squeezeprobe::states::{HBAR, K_B};

use crate::config::RunConfig;
use crate::error::CliError;

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub rows: usize,
}

/// Writes `header` and `rows` to `dir/name` and returns the file's digest.
pub fn write_csv<I>(dir: &Path, name: &str, header: &[&str], rows: I) -> Result<FileRecord, CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let path = dir.join(name);
    let csv_err = |source| CliError::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    let mut count = 0;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
        count += 1;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: path.clone(),
        source: e.into_error(),
    })?;
    std::fs::write(&path, &bytes).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(FileRecord {
        name: name.to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        rows: count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    #[serde(rename = "hbar_J_s")]
    pub hbar: f64,
    #[serde(rename = "k_B_J_per_K")]
    pub k_b: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { hbar: HBAR, k_b: K_B }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived {
    pub omega0_rad_s: f64,
    #[serde(rename = "omegaQ_rad_s")]
    pub omega_q_rad_s: f64,
    #[serde(rename = "nuQ_Hz")]
    pub nu_q_hz: f64,
    pub polarization_factor: f64,
}

/// Everything needed to reproduce and verify a run. No timestamps or host
/// details, so identical inputs give identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub order: u8,
    pub config: RunConfig,
    pub constants: Constants,
    pub derived: Derived,
    pub diagnostics: serde_json::Value,
    pub files: Vec<FileRecord>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1e-5, 78.82e6, -3.5e-300, 1.0 / 3.0, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.5), "0.5");
    }

    #[test]
    fn csv_digest_matches_content() {
        let dir = tempfile::tempdir().unwrap();
        let rec = write_csv(dir.path(), "t.csv", &["a_s", "b"], vec![vec!["1.0".into(), "2.5".into()]])
            .unwrap();
        let bytes = std::fs::read(dir.path().join("t.csv")).unwrap();
        assert_eq!(bytes, b"a_s,b\n1.0,2.5\n");
        assert_eq!(rec.sha256, hex::encode(Sha256::digest(&bytes)));
        assert_eq!(rec.rows, 1);
    }
}
