//! Standardization, the logistic risk model, and fold-model persistence.

mod logistic;
mod scaler;

pub use logistic::{
    fit_logistic, fit_logistic_from, predict_labels, predict_scores, ConvergenceReport, FitOptions,
    LogisticModel, LogisticObjective,
};
pub use scaler::{apply_scaler, fit_scaler, Scaler};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Dense row-major matrix of standardized feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n_rows * n_cols, "matrix buffer size mismatch");
        FeatureMatrix { n_rows, n_cols, values }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }
}

/// One fold's fitted scaler and model, with its convergence record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldModel {
    pub fold: usize,
    pub scaler: Scaler,
    pub model: LogisticModel,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// All fold models of a run, tied to the fit settings and data they came
/// from so a later run can refuse mismatched reuse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub fit_hash: String,
    pub data_sha256: String,
    pub n_folds: usize,
    pub folds: Vec<FoldModel>,
}

pub fn save_models(path: &Path, bundle: &ModelBundle) -> Result<()> {
    let text = serde_json::to_string_pretty(bundle)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_models(path: &Path) -> Result<ModelBundle> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
