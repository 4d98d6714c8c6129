//! Per-column standardization fitted on training rows only.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::model::FeatureMatrix;

/// Column-wise standardization parameters.
///
/// Numeric columns carry `(mean, stddev)` with the population standard
/// deviation (divide by n); categorical columns pass through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub columns: Vec<Option<(f64, f64)>>,
}

impl Scaler {
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Maps one raw value into scaled space.
    pub fn scale(&self, col: usize, value: f64) -> f64 {
        match self.columns[col] {
            Some((mean, std)) => (value - mean) / std,
            None => value,
        }
    }

    /// Inverse of [`Scaler::scale`].
    pub fn unscale(&self, col: usize, value: f64) -> f64 {
        match self.columns[col] {
            Some((mean, std)) => value * std + mean,
            None => value,
        }
    }
}

/// Fits standardization parameters on the given dataset (the training split).
///
/// A numeric column that is constant has no scale and is rejected.
pub fn fit_scaler(train: &Dataset) -> Result<Scaler> {
    let n = train.n_rows() as f64;
    let mut columns = Vec::with_capacity(train.n_features());
    for (col, spec) in train.schema().features.iter().enumerate() {
        match spec.kind {
            FeatureKind::CategoricalBinary => columns.push(None),
            FeatureKind::NumericInteger => {
                let values = train.column(col);
                let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
                let var =
                    values.iter().map(|&v| (v as f64 - mean) * (v as f64 - mean)).sum::<f64>() / n;
                if var == 0.0 {
                    return Err(Error::ConstantColumn { column: spec.name.clone() });
                }
                columns.push(Some((mean, var.sqrt())));
            }
        }
    }
    Ok(Scaler { columns })
}

/// Applies a fitted scaler to every row of a dataset.
pub fn apply_scaler(scaler: &Scaler, ds: &Dataset) -> Result<FeatureMatrix> {
    if scaler.n_columns() != ds.n_features() {
        return Err(Error::invalid(format!(
            "scaler has {} columns, dataset has {}",
            scaler.n_columns(),
            ds.n_features()
        )));
    }
    let mut values = Vec::with_capacity(ds.n_rows() * ds.n_features());
    for row in 0..ds.n_rows() {
        for col in 0..ds.n_features() {
            values.push(scaler.scale(col, ds.feature(row, col) as f64));
        }
    }
    Ok(FeatureMatrix::new(ds.n_rows(), ds.n_features(), values))
}
