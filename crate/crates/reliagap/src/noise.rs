//! Noise injection that turns a feature table into a synthetic second rater.
//!
//! A fraction `p` of each eligible column is altered: binary columns by
//! flipping, numeric columns by adding an integer-rounded draw from
//! `N(0, sigma2)`. The altered cells are an exact count, `round(p * n)`,
//! chosen uniformly without replacement, and counts are taken per group so
//! both groups receive the same noise rate. Protected and passthrough
//! columns, labels and group membership are never touched.

use rand::distributions::Bernoulli;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::seed;

fn default_true() -> bool {
    true
}

/// Full description of one synthetic rater.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Fraction of each eligible column to alter, in `[0, 1]`.
    pub p: f64,
    /// Variance of the additive noise on numeric columns.
    pub sigma2: f64,
    pub perturb_categorical: bool,
    pub perturb_numeric: bool,
    /// Clamp perturbed numeric cells to their schema minimum.
    pub apply_minima: bool,
    pub seed: u64,
    /// Draw the altered-cell count per group rather than over the whole column.
    #[serde(default = "default_true")]
    pub group_stratified: bool,
    /// Alter each cell independently with probability `p` instead of hitting
    /// an exact count; for sensitivity checks only.
    #[serde(default)]
    pub iid_sampling: bool,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) || !self.p.is_finite() {
            return Err(Error::invalid(format!("noise level {} must lie in [0, 1]", self.p)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid(format!("variance {} must be positive", self.sigma2)));
        }
        Ok(())
    }
}

/// Number of cells an exact-count pass alters.
pub fn exact_count(p: f64, len: usize) -> usize {
    (p * len as f64).round() as usize
}

fn chosen_positions(rng: &mut ChaCha20Rng, len: usize, p: f64, iid: bool) -> Vec<usize> {
    let mut positions: Vec<usize> = if iid {
        let coin = Bernoulli::new(p).expect("validated p");
        (0..len).filter(|_| coin.sample(rng)).collect()
    } else {
        rand::seq::index::sample(rng, len, exact_count(p, len)).into_vec()
    };
    positions.sort_unstable();
    positions
}

/// Flips an exact `round(p * len)` entries chosen uniformly without
/// replacement.
pub fn flip_binary_column(values: &[u8], p: f64, rng: &mut ChaCha20Rng) -> Vec<u8> {
    let mut out = values.to_vec();
    for i in chosen_positions(rng, values.len(), p, false) {
        out[i] = 1 - out[i];
    }
    out
}

/// Adds integer-rounded `N(0, sigma2)` draws to `round(p * len)` entries.
///
/// With a `minimum`, clamping applies to the altered cells only, after the
/// addition; untouched cells keep their original value.
pub fn perturb_numeric_column(
    values: &[i64],
    p: f64,
    sigma2: f64,
    minimum: Option<i64>,
    rng: &mut ChaCha20Rng,
) -> Vec<i64> {
    let normal = Normal::new(0.0, sigma2.sqrt()).expect("validated sigma2");
    let mut out = values.to_vec();
    for i in chosen_positions(rng, values.len(), p, false) {
        let mut v = out[i] + normal.sample(rng).round() as i64;
        if let Some(min) = minimum {
            v = v.max(min);
        }
        out[i] = v;
    }
    out
}

/// How many cells were selected in one `(column, group)` pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationEntry {
    pub column: String,
    /// `None` for a non-stratified whole-column pass.
    pub group: Option<u8>,
    pub selected: usize,
}

pub type PerturbationLog = Vec<PerturbationEntry>;

/// Applies the noise spec to every eligible column; see
/// [`perturb_dataset_logged`] for the audited variant.
pub fn perturb_dataset(ds: &Dataset, spec: &NoiseSpec) -> Result<Dataset> {
    perturb_dataset_logged(ds, spec).map(|(out, _)| out)
}

/// Applies the noise spec and reports the selected-cell counts per pass.
///
/// Column sub-streams derive from `(spec.seed, group, column)`, so the result
/// does not depend on iteration order and any pass can be reproduced alone.
pub fn perturb_dataset_logged(ds: &Dataset, spec: &NoiseSpec) -> Result<(Dataset, PerturbationLog)> {
    spec.validate()?;
    let width = ds.n_features();
    let mut features = ds.feature_values().to_vec();
    let mut log = Vec::new();

    let row_sets: Vec<(Option<u8>, Vec<usize>)> = if spec.group_stratified {
        vec![(Some(0), ds.group_rows(0)), (Some(1), ds.group_rows(1))]
    } else {
        vec![(None, (0..ds.n_rows()).collect())]
    };

    for (col, feature) in ds.schema().features.iter().enumerate() {
        let eligible = feature.perturbable
            && match feature.kind {
                FeatureKind::CategoricalBinary => spec.perturb_categorical,
                FeatureKind::NumericInteger => spec.perturb_numeric,
            };
        if !eligible {
            continue;
        }
        for (group, rows) in &row_sets {
            if rows.is_empty() {
                continue;
            }
            let mut rng =
                seed::stream(spec.seed, "noise-column", &[u64::from(group.unwrap_or(2)), col as u64]);
            let positions = chosen_positions(&mut rng, rows.len(), spec.p, spec.iid_sampling);
            log.push(PerturbationEntry {
                column: feature.name.clone(),
                group: *group,
                selected: positions.len(),
            });
            match feature.kind {
                FeatureKind::CategoricalBinary => {
                    for &i in &positions {
                        let at = rows[i] * width + col;
                        features[at] = 1 - features[at];
                    }
                }
                FeatureKind::NumericInteger => {
                    let normal = Normal::new(0.0, spec.sigma2.sqrt()).expect("validated sigma2");
                    let minimum = if spec.apply_minima { feature.minimum } else { None };
                    for &i in &positions {
                        let at = rows[i] * width + col;
                        let mut v = features[at] + normal.sample(&mut rng).round() as i64;
                        if let Some(min) = minimum {
                            v = v.max(min);
                        }
                        features[at] = v;
                    }
                }
            }
        }
    }
    Ok((Dataset::from_perturbed(ds, features), log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;

    fn spec(p: f64, sigma2: f64) -> NoiseSpec {
        NoiseSpec {
            p,
            sigma2,
            perturb_categorical: true,
            perturb_numeric: true,
            apply_minima: false,
            seed: 99,
            group_stratified: true,
            iid_sampling: false,
        }
    }

    #[test]
    fn flip_none_and_all() {
        let values = vec![0u8, 1, 1, 0, 1];
        let mut rng = seed::stream(1, "t", &[]);
        assert_eq!(flip_binary_column(&values, 0.0, &mut rng), values);
        let flipped = flip_binary_column(&values, 1.0, &mut rng);
        assert_eq!(flipped, vec![1, 0, 0, 1, 0]);
    }

    #[test]
    fn flip_hits_exact_count() {
        let values = vec![0u8; 1000];
        let mut rng = seed::stream(2, "t", &[]);
        let flipped = flip_binary_column(&values, 0.2, &mut rng);
        assert_eq!(flipped.iter().filter(|&&v| v == 1).count(), 200);
    }

    #[test]
    fn numeric_p_zero_is_identity() {
        let values = vec![3i64, 7, 0, 12];
        let mut rng = seed::stream(3, "t", &[]);
        assert_eq!(perturb_numeric_column(&values, 0.0, 5.0, None, &mut rng), values);
    }

    #[test]
    fn unit_variance_leaves_a_known_fraction_unchanged() {
        // About 38.3% of N(0,1) draws round to zero.
        let values = vec![0i64; 100_000];
        let mut rng = seed::stream(4, "t", &[]);
        let out = perturb_numeric_column(&values, 1.0, 1.0, None, &mut rng);
        let unchanged = out.iter().filter(|&&v| v == 0).count() as f64 / values.len() as f64;
        assert!((unchanged - 0.383).abs() < 0.01, "unchanged fraction {unchanged}");
    }

    #[test]
    fn clamping_applies_after_addition_only() {
        let values = vec![0i64; 2000];
        let mut rng = seed::stream(5, "t", &[]);
        let out = perturb_numeric_column(&values, 1.0, 10.0, Some(0), &mut rng);
        assert!(out.iter().all(|&v| v >= 0));
        assert!(out.iter().any(|&v| v > 0));
        // Half the mass would have gone negative; it sits at the floor now.
        let at_floor = out.iter().filter(|&&v| v == 0).count() as f64 / 2000.0;
        assert!(at_floor > 0.4, "floor fraction {at_floor}");
    }

    #[test]
    fn noise_mean_is_centered() {
        let values = vec![0i64; 50_000];
        let mut rng = seed::stream(6, "t", &[]);
        let out = perturb_numeric_column(&values, 1.0, 9.0, None, &mut rng);
        let mean = out.iter().map(|&v| v as f64).sum::<f64>() / out.len() as f64;
        let bound = 3.0 * 3.0 / (out.len() as f64).sqrt();
        assert!(mean.abs() < bound, "mean {mean} exceeds {bound}");
    }

    #[test]
    fn dataset_p_zero_is_bit_identical() {
        let ds = generate_synthetic(300, 0.34, (0.5, 0.35), 31).unwrap();
        let out = perturb_dataset(&ds, &spec(0.0, 1.0)).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn per_group_counts_are_exact() {
        let ds = generate_synthetic(2000, 0.34, (0.5, 0.35), 32).unwrap();
        let [n0, n1] = ds.group_counts();
        let (_, log) = perturb_dataset_logged(&ds, &spec(0.2, 1.0)).unwrap();
        // 8 perturbable columns, two passes each.
        assert_eq!(log.len(), 16);
        for entry in &log {
            let expected = match entry.group {
                Some(0) => exact_count(0.2, n0),
                Some(1) => exact_count(0.2, n1),
                _ => unreachable!(),
            };
            assert_eq!(entry.selected, expected, "{entry:?}");
        }
    }

    #[test]
    fn flip_counts_match_log_for_categorical_columns() {
        let ds = generate_synthetic(1500, 0.34, (0.5, 0.35), 33).unwrap();
        let (out, _) = perturb_dataset_logged(&ds, &spec(0.1, 1.0)).unwrap();
        let col = ds.schema().feature_index("sex").unwrap();
        for g in [0u8, 1] {
            let rows = ds.group_rows(g);
            let flipped =
                rows.iter().filter(|&&r| ds.feature(r, col) != out.feature(r, col)).count();
            assert_eq!(flipped, exact_count(0.1, rows.len()));
        }
    }

    #[test]
    fn protected_columns_are_untouched() {
        let ds = generate_synthetic(800, 0.34, (0.5, 0.35), 34).unwrap();
        let out = perturb_dataset(&ds, &spec(1.0, 10.0)).unwrap();
        for name in ["race", "sex_race", "age_lt25", "age_25_45", "age_gt45"] {
            let col = ds.schema().feature_index(name).unwrap();
            assert_eq!(ds.column(col), out.column(col), "{name}");
        }
        assert_eq!(ds.labels(), out.labels());
        assert_eq!(ds.groups(), out.groups());
    }

    #[test]
    fn feature_subset_switches_select_columns() {
        let ds = generate_synthetic(600, 0.34, (0.5, 0.35), 35).unwrap();
        let mut cat_only = spec(1.0, 10.0);
        cat_only.perturb_numeric = false;
        let out = perturb_dataset(&ds, &cat_only).unwrap();
        let age = ds.schema().feature_index("age").unwrap();
        let sex = ds.schema().feature_index("sex").unwrap();
        assert_eq!(ds.column(age), out.column(age));
        assert_ne!(ds.column(sex), out.column(sex));

        let mut num_only = spec(1.0, 10.0);
        num_only.perturb_categorical = false;
        let out = perturb_dataset(&ds, &num_only).unwrap();
        assert_eq!(ds.column(sex), out.column(sex));
        assert_ne!(ds.column(age), out.column(age));
    }

    #[test]
    fn minima_hold_for_all_numeric_columns() {
        let ds = generate_synthetic(700, 0.34, (0.5, 0.35), 36).unwrap();
        let mut clamped = spec(1.0, 10.0);
        clamped.apply_minima = true;
        let out = perturb_dataset(&ds, &clamped).unwrap();
        for feature in &ds.schema().features {
            if let Some(min) = feature.minimum {
                let col = ds.schema().feature_index(&feature.name).unwrap();
                assert!(out.column(col).iter().all(|&v| v >= min), "{}", feature.name);
            }
        }
    }

    #[test]
    fn same_spec_reproduces_identical_noise() {
        let ds = generate_synthetic(500, 0.34, (0.5, 0.35), 37).unwrap();
        let a = perturb_dataset(&ds, &spec(0.25, 5.0)).unwrap();
        let b = perturb_dataset(&ds, &spec(0.25, 5.0)).unwrap();
        assert_eq!(a, b);
        let mut other = spec(0.25, 5.0);
        other.seed = 100;
        assert_ne!(perturb_dataset(&ds, &other).unwrap(), a);
    }

    #[test]
    fn unstratified_mode_selects_whole_column_counts() {
        let ds = generate_synthetic(900, 0.34, (0.5, 0.35), 38).unwrap();
        let mut flat = spec(0.2, 1.0);
        flat.group_stratified = false;
        let (_, log) = perturb_dataset_logged(&ds, &flat).unwrap();
        assert_eq!(log.len(), 8);
        assert!(log.iter().all(|e| e.group.is_none() && e.selected == exact_count(0.2, 900)));
    }

    #[test]
    fn iid_mode_is_deterministic_and_near_rate() {
        let ds = generate_synthetic(2000, 0.34, (0.5, 0.35), 39).unwrap();
        let mut iid = spec(0.2, 1.0);
        iid.iid_sampling = true;
        let (a, log) = perturb_dataset_logged(&ds, &iid).unwrap();
        let (b, _) = perturb_dataset_logged(&ds, &iid).unwrap();
        assert_eq!(a, b);
        for entry in &log {
            let n = match entry.group {
                Some(g) => ds.group_counts()[g as usize],
                None => ds.n_rows(),
            } as f64;
            let rate = entry.selected as f64 / n;
            assert!((rate - 0.2).abs() < 0.06, "{entry:?}");
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s = spec(0.15, 5.0);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<NoiseSpec>(&text).unwrap(), s);
        // Older specs without the optional switches read back with defaults.
        let legacy: NoiseSpec = serde_json::from_str(
            r#"{"p":0.1,"sigma2":1.0,"perturb_categorical":true,"perturb_numeric":true,"apply_minima":false,"seed":3}"#,
        )
        .unwrap();
        assert!(legacy.group_stratified);
        assert!(!legacy.iid_sampling);
    }

    #[test]
    fn rejects_invalid_specs() {
        let ds = generate_synthetic(50, 0.34, (0.5, 0.35), 40).unwrap();
        assert!(perturb_dataset(&ds, &spec(-0.1, 1.0)).is_err());
        assert!(perturb_dataset(&ds, &spec(1.1, 1.0)).is_err());
        assert!(perturb_dataset(&ds, &spec(0.1, 0.0)).is_err());
        assert!(perturb_dataset(&ds, &spec(0.1, f64::NAN)).is_err());
    }
}
