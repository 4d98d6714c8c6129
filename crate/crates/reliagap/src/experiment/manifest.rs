//! Run provenance: what was run, on which data, with which outcome files.

use chrono::Utc;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use super::{SweepConfig, SweepOutcome};
use crate::error::Result;

/// Identity of the table a run consumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataProvenance {
    /// File path, or a `synthetic:` tag for generated data.
    pub source: String,
    /// Hex SHA-256 of the file bytes; empty for generated data.
    pub sha256: String,
    pub n_rows: usize,
    pub group_counts: [usize; 2],
    pub label_prevalence: f64,
}

/// Per-fold training summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Everything needed to audit or replay a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub created_utc: String,
    pub tool: String,
    pub config: SweepConfig,
    pub config_hash: String,
    pub jobs: Option<usize>,
    pub data: DataProvenance,
    pub folds: Vec<FoldSummary>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(outcome: &SweepOutcome, data: DataProvenance, jobs: Option<usize>) -> RunManifest {
        RunManifest {
            created_utc: Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            tool: format!("reliagap {}", env!("CARGO_PKG_VERSION")),
            config: outcome.config.clone(),
            config_hash: outcome.config.hash(),
            jobs,
            data,
            folds: outcome
                .folds
                .iter()
                .map(|f| FoldSummary {
                    fold: f.fold,
                    train_rows: f.train_rows,
                    test_rows: f.test_rows.len(),
                    iterations: f.iterations,
                    grad_norm: f.grad_norm,
                })
                .collect(),
            outputs: Vec::new(),
        }
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(format!("{:x}", h.finalize()))
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;
    use crate::experiment::{preset_by_name, run_sweep};

    #[test]
    fn manifest_round_trips_and_hashes() {
        let ds = generate_synthetic(300, 0.3, (0.5, 0.4), 5).unwrap();
        let mut preset = preset_by_name("all-features").unwrap();
        preset.sigma2_values = vec![1.0];
        let config = crate::experiment::SweepConfig::new(preset, vec![0.0, 0.1], 2, 9);
        let outcome = run_sweep(&ds, &config, None).unwrap();
        let data = DataProvenance {
            source: "synthetic:test".into(),
            sha256: String::new(),
            n_rows: ds.n_rows(),
            group_counts: ds.group_counts(),
            label_prevalence: 0.5,
        };
        let mut manifest = RunManifest::new(&outcome, data, Some(2));
        manifest.outputs = vec!["results.csv".into()];

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        write_manifest(&path, &manifest).unwrap();
        let loaded = load_manifest(&path).unwrap();
        assert_eq!(loaded, manifest);
        assert_eq!(loaded.config_hash, config.hash());
        assert_eq!(loaded.folds.len(), 2);

        let digest = sha256_file(&path).unwrap();
        assert_eq!(digest.len(), 64);
        assert_eq!(digest, sha256_file(&path).unwrap());
    }
}
