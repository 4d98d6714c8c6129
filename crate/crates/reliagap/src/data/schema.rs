//! Column schema for the recidivism feature table.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    CategoricalBinary,
    NumericInteger,
}

/// One input column: its kind, whether noise may touch it, and the floor used
/// when clamped perturbation is requested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    pub perturbable: bool,
    pub minimum: Option<i64>,
}

impl FeatureSpec {
    fn categorical(name: &str, perturbable: bool) -> Self {
        FeatureSpec { name: name.into(), kind: FeatureKind::CategoricalBinary, perturbable, minimum: None }
    }

    fn numeric(name: &str, minimum: i64) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::NumericInteger,
            perturbable: true,
            minimum: Some(minimum),
        }
    }
}

/// Input columns plus the label and group column names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub features: Vec<FeatureSpec>,
    pub label: String,
    pub group: String,
}

impl DatasetSchema {
    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }
}

/// The canonical thirteen-feature recidivism schema.
///
/// The protected columns (`race`, `sex_race`) and the age one-hots are never
/// perturbed; `race` doubles as the group column. Numeric floors (18 for age,
/// 0 for the count features) apply only when a noise spec asks for clamping.
pub fn canonical_schema() -> DatasetSchema {
    DatasetSchema {
        features: vec![
            FeatureSpec::categorical("sex", true),
            FeatureSpec::categorical("race", false),
            FeatureSpec::categorical("sex_race", false),
            FeatureSpec::categorical("charge_misdemeanor", true),
            FeatureSpec::categorical("charge_felony", true),
            FeatureSpec::categorical("age_lt25", false),
            FeatureSpec::categorical("age_25_45", false),
            FeatureSpec::categorical("age_gt45", false),
            FeatureSpec::numeric("age", 18),
            FeatureSpec::numeric("juv_fel_count", 0),
            FeatureSpec::numeric("juv_misd_count", 0),
            FeatureSpec::numeric("juv_other_count", 0),
            FeatureSpec::numeric("priors_count", 0),
        ],
        label: "two_year_recid".into(),
        group: "race".into(),
    }
}

/// Mapping from source-file column names to canonical ones, stored as a flat
/// JSON object.
pub type SchemaMap = HashMap<String, String>;

pub fn load_schema_map(path: &Path) -> Result<SchemaMap> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
