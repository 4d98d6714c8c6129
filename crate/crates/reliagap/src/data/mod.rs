//! Feature table loading, validation, fold assignment and synthesis.

mod folds;
mod schema;
mod synthetic;

pub use folds::{assign_folds, FoldAssignment};
pub use schema::{canonical_schema, load_schema_map, DatasetSchema, FeatureKind, FeatureSpec, SchemaMap};
pub use synthetic::generate_synthetic;

use std::path::Path;

use crate::error::{Error, Result};

/// Integer-coded feature table with binary labels and a binary group column.
///
/// Rows are subjects. The group values are a read-only copy of the schema's
/// group feature; labels and group membership are never perturbed.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: DatasetSchema,
    features: Vec<i64>,
    labels: Vec<u8>,
    groups: Vec<u8>,
}

impl Dataset {
    /// Validates and assembles a dataset from row-major feature values.
    pub fn new(schema: DatasetSchema, features: Vec<i64>, labels: Vec<u8>) -> Result<Self> {
        let width = schema.n_features();
        if width == 0 {
            return Err(Error::invalid("schema has no features"));
        }
        if features.len() % width != 0 {
            return Err(Error::invalid(format!(
                "feature buffer length {} is not a multiple of the schema width {}",
                features.len(),
                width
            )));
        }
        let n_rows = features.len() / width;
        if n_rows == 0 {
            return Err(Error::invalid("dataset has no rows"));
        }
        if labels.len() != n_rows {
            return Err(Error::invalid(format!(
                "label count {} does not match row count {}",
                labels.len(),
                n_rows
            )));
        }
        for (i, &y) in labels.iter().enumerate() {
            if y > 1 {
                return Err(Error::invalid(format!("label {y} in row {i} is not binary")));
            }
        }
        for (col, spec) in schema.features.iter().enumerate() {
            for row in 0..n_rows {
                let v = features[row * width + col];
                match spec.kind {
                    FeatureKind::CategoricalBinary => {
                        if v != 0 && v != 1 {
                            return Err(Error::invalid(format!(
                                "row {row}, column {}: value {v} is not binary",
                                spec.name
                            )));
                        }
                    }
                    FeatureKind::NumericInteger => {
                        if let Some(min) = spec.minimum {
                            if v < min {
                                return Err(Error::invalid(format!(
                                    "row {row}, column {}: value {v} is below the minimum {min}",
                                    spec.name
                                )));
                            }
                        }
                    }
                }
            }
        }
        let group_col = schema
            .feature_index(&schema.group)
            .ok_or_else(|| Error::invalid(format!("group column {} is not a feature", schema.group)))?;
        let groups = (0..n_rows).map(|row| features[row * width + group_col] as u8).collect();
        Ok(Dataset { schema, features, labels, groups })
    }

    /// Assembles a perturbed copy without re-validating minima or binary
    /// ranges; noise is allowed to push values outside them.
    pub(crate) fn from_perturbed(template: &Dataset, features: Vec<i64>) -> Dataset {
        debug_assert_eq!(features.len(), template.features.len());
        Dataset {
            schema: template.schema.clone(),
            features,
            labels: template.labels.clone(),
            groups: template.groups.clone(),
        }
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.n_features()
    }

    pub fn feature(&self, row: usize, col: usize) -> i64 {
        self.features[row * self.n_features() + col]
    }

    /// Values of one feature column, in row order.
    pub fn column(&self, col: usize) -> Vec<i64> {
        (0..self.n_rows()).map(|row| self.feature(row, col)).collect()
    }

    pub fn feature_values(&self) -> &[i64] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn groups(&self) -> &[u8] {
        &self.groups
    }

    /// Row indices belonging to the given group, in row order.
    pub fn group_rows(&self, group: u8) -> Vec<usize> {
        (0..self.n_rows()).filter(|&row| self.groups[row] == group).collect()
    }

    pub fn group_counts(&self) -> [usize; 2] {
        let ones = self.groups.iter().filter(|&&g| g == 1).count();
        [self.n_rows() - ones, ones]
    }

    /// Copies the selected rows into a new dataset.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::invalid("subset selects no rows"));
        }
        let width = self.n_features();
        let mut features = Vec::with_capacity(rows.len() * width);
        let mut labels = Vec::with_capacity(rows.len());
        let mut groups = Vec::with_capacity(rows.len());
        for &row in rows {
            if row >= self.n_rows() {
                return Err(Error::invalid(format!("row index {row} out of range")));
            }
            features.extend_from_slice(&self.features[row * width..(row + 1) * width]);
            labels.push(self.labels[row]);
            groups.push(self.groups[row]);
        }
        Ok(Dataset { schema: self.schema.clone(), features, labels, groups })
    }
}

fn parse_integer_cell(raw: &str) -> Option<i64> {
    let v: f64 = raw.trim().parse().ok()?;
    let rounded = v.round();
    if (v - rounded).abs() > 1e-9 || !rounded.is_finite() {
        return None;
    }
    Some(rounded as i64)
}

/// Loads a header-addressed CSV into a validated dataset.
///
/// `remap` translates source column names to canonical ones before lookup;
/// columns outside the schema are ignored.
pub fn load_dataset(path: &Path, schema: &DatasetSchema, remap: Option<&SchemaMap>) -> Result<Dataset> {
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| {
            let h = h.trim();
            remap.and_then(|m| m.get(h)).cloned().unwrap_or_else(|| h.to_string())
        })
        .collect();

    let mut column_of = Vec::with_capacity(schema.n_features() + 1);
    for spec in &schema.features {
        let idx = headers
            .iter()
            .position(|h| *h == spec.name)
            .ok_or_else(|| Error::data(&display, format!("missing column {}", spec.name)))?;
        column_of.push(idx);
    }
    let label_idx = headers
        .iter()
        .position(|h| *h == schema.label)
        .ok_or_else(|| Error::data(&display, format!("missing column {}", schema.label)))?;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        for (spec, &idx) in schema.features.iter().zip(&column_of) {
            let raw = record.get(idx).ok_or_else(|| {
                Error::data(&display, format!("row {row_no}: missing value for {}", spec.name))
            })?;
            let value = parse_integer_cell(raw).ok_or_else(|| {
                Error::data(&display, format!("row {row_no}, column {}: {raw:?} is not an integer", spec.name))
            })?;
            features.push(value);
        }
        let raw = record
            .get(label_idx)
            .ok_or_else(|| Error::data(&display, format!("row {row_no}: missing label")))?;
        let value = parse_integer_cell(raw)
            .filter(|&v| v == 0 || v == 1)
            .ok_or_else(|| Error::data(&display, format!("row {row_no}: label {raw:?} is not binary")))?;
        labels.push(value as u8);
    }

    Dataset::new(schema.clone(), features, labels)
        .map_err(|e| Error::data(&display, e.to_string()))
}

/// Writes a dataset with canonical headers; `load_dataset` round-trips it.
pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = ds.schema.features.iter().map(|f| f.name.as_str()).collect();
    header.push(&ds.schema.label);
    writer.write_record(&header)?;
    for row in 0..ds.n_rows() {
        let mut record: Vec<String> =
            (0..ds.n_features()).map(|col| ds.feature(row, col).to_string()).collect();
        record.push(ds.labels[row].to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_csv(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        path
    }

    const HEADER: &str = "sex,race,sex_race,charge_misdemeanor,charge_felony,age_lt25,age_25_45,age_gt45,age,juv_fel_count,juv_misd_count,juv_other_count,priors_count,two_year_recid";

    #[test]
    fn loads_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!(
            "{HEADER}\n1,1,1,0,1,0,1,0,34,0,0,1,3,1\n0,0,0,1,0,1,0,0,21,1,0,0,0,0\n"
        );
        let path = tiny_csv(&dir, "t.csv", &body);
        let ds = load_dataset(&path, &canonical_schema(), None).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.groups(), &[1, 0]);
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.feature(0, ds.schema().feature_index("age").unwrap()), 34);

        let out = dir.path().join("rt.csv");
        save_dataset(&out, &ds).unwrap();
        let back = load_dataset(&out, &canonical_schema(), None).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn remaps_source_headers() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!(
            "{}\n1,1,1,0,1,0,1,0,34,0,0,1,3,1\n",
            HEADER.replace("charge_misdemeanor", "c_charge_degree_M").replace("age_lt25", "age_cat_under25")
        );
        let path = tiny_csv(&dir, "t.csv", &body);
        let mut map = SchemaMap::new();
        map.insert("c_charge_degree_M".into(), "charge_misdemeanor".into());
        map.insert("age_cat_under25".into(), "age_lt25".into());
        let ds = load_dataset(&path, &canonical_schema(), Some(&map)).unwrap();
        assert_eq!(ds.n_rows(), 1);
    }

    #[test]
    fn float_coded_integers_are_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("{HEADER}\n1.0,1.0,1.0,0.0,1.0,0.0,1.0,0.0,34.0,0.0,0.0,1.0,3.0,1.0\n");
        let path = tiny_csv(&dir, "t.csv", &body);
        let ds = load_dataset(&path, &canonical_schema(), None).unwrap();
        assert_eq!(ds.feature(0, 12), 3);
    }

    #[test]
    fn rejects_bad_cells() {
        let dir = tempfile::tempdir().unwrap();
        for (name, row) in [
            ("nonbinary", "2,1,1,0,1,0,1,0,34,0,0,1,3,1"),
            ("fractional", "1,1,1,0,1,0,1,0,34.5,0,0,1,3,1"),
            ("below-minimum", "1,1,1,0,1,0,1,0,17,0,0,1,3,1"),
            ("bad-label", "1,1,1,0,1,0,1,0,34,0,0,1,3,7"),
        ] {
            let path = tiny_csv(&dir, &format!("{name}.csv"), &format!("{HEADER}\n{row}\n"));
            let err = load_dataset(&path, &canonical_schema(), None).unwrap_err();
            assert!(matches!(err, Error::Data { .. }), "{name}: {err}");
        }
    }

    #[test]
    fn rejects_missing_column() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("{}\n1,1,1,0,1,0,1,0,34,0,0,1,1\n", HEADER.replace("priors_count,", ""));
        let path = tiny_csv(&dir, "t.csv", &body);
        let err = load_dataset(&path, &canonical_schema(), None).unwrap_err();
        assert!(err.to_string().contains("priors_count"));
    }

    #[test]
    fn subset_copies_rows() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!(
            "{HEADER}\n1,1,1,0,1,0,1,0,34,0,0,1,3,1\n0,0,0,1,0,1,0,0,21,1,0,0,0,0\n0,1,0,1,0,0,0,1,50,0,0,0,9,1\n"
        );
        let path = tiny_csv(&dir, "t.csv", &body);
        let ds = load_dataset(&path, &canonical_schema(), None).unwrap();
        let sub = ds.subset(&[2, 0]).unwrap();
        assert_eq!(sub.n_rows(), 2);
        assert_eq!(sub.labels(), &[1, 1]);
        assert_eq!(sub.groups(), &[1, 1]);
        assert_eq!(sub.feature(0, 12), 9);
        assert!(ds.subset(&[]).is_err());
        assert!(ds.subset(&[3]).is_err());
    }
}
