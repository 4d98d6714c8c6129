//! Sweep orchestration: fit per fold, perturb, predict twice, score agreement.

mod curves;
mod manifest;

pub use curves::{
    aggregate, decompose_correction, gap_curves, AggregatedRow, CurvePoint, DecompositionPanel,
    GapCurve, GapPoint, Statistic,
};
pub use manifest::{
    load_manifest, sha256_file, write_manifest, DataProvenance, FoldSummary, RunManifest,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{assign_folds, Dataset};
use crate::error::{Error, Result};
use crate::irr::{
    confusion_from_pairs, icc_a1, kappa_decomposition, PairedBinary, PairedScores, DENOM_EPS,
};
use crate::model::{
    apply_scaler, fit_logistic, fit_scaler, predict_labels, predict_scores, FitOptions,
    LogisticModel, Scaler,
};
use crate::noise::{exact_count, perturb_dataset_logged, NoiseSpec};
use crate::seed;

/// Named combination of feature subsets, clamping and variance grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub perturb_categorical: bool,
    pub perturb_numeric: bool,
    pub apply_minima: bool,
    /// Empty for a variance-independent sweep (no numeric noise).
    pub sigma2_values: Vec<f64>,
}

/// The four shipped experiment presets.
pub fn builtin_presets() -> Vec<Preset> {
    let sigmas = vec![1.0, 5.0, 10.0];
    vec![
        Preset {
            name: "all-features".into(),
            perturb_categorical: true,
            perturb_numeric: true,
            apply_minima: false,
            sigma2_values: sigmas.clone(),
        },
        Preset {
            name: "all-features-minima".into(),
            perturb_categorical: true,
            perturb_numeric: true,
            apply_minima: true,
            sigma2_values: sigmas.clone(),
        },
        Preset {
            name: "numeric-only".into(),
            perturb_categorical: false,
            perturb_numeric: true,
            apply_minima: false,
            sigma2_values: sigmas,
        },
        Preset {
            name: "categorical-only".into(),
            perturb_categorical: true,
            perturb_numeric: false,
            apply_minima: false,
            sigma2_values: Vec::new(),
        },
    ]
}

pub fn preset_by_name(name: &str) -> Result<Preset> {
    builtin_presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::config(format!("unknown preset {name}")))
}

/// Evenly spaced noise grid, endpoints included.
pub fn p_grid(p_min: f64, p_max: f64, p_step: f64) -> Result<Vec<f64>> {
    if !(p_step > 0.0) || !(0.0..=1.0).contains(&p_min) || !(0.0..=1.0).contains(&p_max) || p_min > p_max
    {
        return Err(Error::config(format!(
            "invalid grid: p_min {p_min}, p_max {p_max}, p_step {p_step}"
        )));
    }
    let count = ((p_max - p_min) / p_step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| round10(p_min + i as f64 * p_step)).collect())
}

fn round10(v: f64) -> f64 {
    (v * 1e10).round() / 1e10
}

/// Everything a sweep depends on; hashing it names the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub preset: Preset,
    pub p_grid: Vec<f64>,
    pub n_folds: usize,
    pub base_seed: u64,
    pub reg_strength: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub threshold: f64,
    pub stratify_folds: bool,
    pub group_stratified_noise: bool,
    pub iid_sampling: bool,
}

impl SweepConfig {
    pub fn new(preset: Preset, p_grid: Vec<f64>, n_folds: usize, base_seed: u64) -> SweepConfig {
        SweepConfig {
            preset,
            p_grid,
            n_folds,
            base_seed,
            reg_strength: 1.0,
            tol: 1e-8,
            max_iter: 500,
            threshold: 0.5,
            stratify_folds: false,
            group_stratified_noise: true,
            iid_sampling: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() {
            return Err(Error::config("empty noise grid"));
        }
        if self.p_grid.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::config("noise levels must lie in [0, 1]"));
        }
        if !self.preset.perturb_categorical && !self.preset.perturb_numeric {
            return Err(Error::config("preset perturbs no feature subset"));
        }
        if self.preset.perturb_numeric && self.preset.sigma2_values.is_empty() {
            return Err(Error::config("numeric perturbation needs at least one variance"));
        }
        if self.preset.sigma2_values.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::config("variances must be positive"));
        }
        if !(0.0 < self.threshold && self.threshold < 1.0) {
            return Err(Error::config(format!("threshold {} must lie in (0, 1)", self.threshold)));
        }
        Ok(())
    }

    /// Hex SHA-256 of the serialized config.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        format!("{:x}", h.finalize())
    }

    /// Hash over only the fields that influence fold fitting, so models can
    /// be reused across presets and noise grids.
    pub fn fit_hash(&self) -> String {
        let key = (
            self.n_folds,
            self.base_seed,
            self.reg_strength.to_bits(),
            self.tol.to_bits(),
            self.max_iter,
            self.stratify_folds,
        );
        let text = serde_json::to_string(&key).expect("fit key serializes");
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        format!("{:x}", h.finalize())
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions { reg_strength: self.reg_strength, tol: self.tol, max_iter: self.max_iter }
    }

    /// Variance column of the sweep: the preset's variances, or a single
    /// variance-independent pass.
    pub fn sigma2_axis(&self) -> Vec<Option<f64>> {
        if self.preset.sigma2_values.is_empty() {
            vec![None]
        } else {
            self.preset.sigma2_values.iter().copied().map(Some).collect()
        }
    }
}

/// One fold's fitted state plus its held-out rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedFold {
    pub fold: usize,
    pub test_rows: Vec<usize>,
    pub train_rows: usize,
    pub scaler: Scaler,
    pub model: LogisticModel,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Splits, scales and fits every fold of the config.
pub fn fit_folds(ds: &Dataset, config: &SweepConfig) -> Result<Vec<FittedFold>> {
    config.validate()?;
    let assignment =
        assign_folds(ds.labels(), config.n_folds, config.base_seed, config.stratify_folds)?;
    (0..config.n_folds)
        .map(|fold| {
            let train_rows = assignment.train_rows(fold);
            let train = ds.subset(&train_rows)?;
            let scaler = fit_scaler(&train)?;
            let x = apply_scaler(&scaler, &train)?;
            let (model, report) = fit_logistic(&x, train.labels(), &config.fit_options())?;
            Ok(FittedFold {
                fold,
                test_rows: assignment.test_rows(fold),
                train_rows: train_rows.len(),
                scaler,
                model,
                iterations: report.iterations,
                grad_norm: report.grad_norm,
            })
        })
        .collect()
}

/// Group-wise agreement statistics of one sweep cell, each value real or
/// missing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupCellStats {
    pub group: u8,
    pub n_subjects: usize,
    pub ck: Option<f64>,
    pub pabak: Option<f64>,
    pub bias_index: Option<f64>,
    pub prevalence_index: Option<f64>,
    pub ck_bias_only: Option<f64>,
    pub ck_prevalence_only: Option<f64>,
    pub icc_a1: Option<f64>,
    /// Mean perturbed-rater score; at p = 0 this is the clean-model value.
    pub mean_score: Option<f64>,
    /// Positive rate of the perturbed-rater verdicts.
    pub prediction_prevalence: Option<f64>,
}

impl GroupCellStats {
    fn empty(group: u8) -> Self {
        GroupCellStats {
            group,
            n_subjects: 0,
            ck: None,
            pabak: None,
            bias_index: None,
            prevalence_index: None,
            ck_bias_only: None,
            ck_prevalence_only: None,
            icc_a1: None,
            mean_score: None,
            prediction_prevalence: None,
        }
    }
}

/// One `(preset, sigma2, p, fold)` evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub preset: String,
    pub sigma2: Option<f64>,
    pub p: f64,
    pub fold: usize,
    pub groups: [GroupCellStats; 2],
}

/// Evaluates one cell: perturb the fold's test rows, predict both versions
/// with the fold's model, and score group-wise agreement.
pub fn run_cell(
    ds: &Dataset,
    fold: &FittedFold,
    config: &SweepConfig,
    p: f64,
    sigma2: Option<f64>,
) -> Result<CellResult> {
    let test = ds.subset(&fold.test_rows)?;
    let noise_seed = seed::child_seed(
        config.base_seed,
        "cell-noise",
        &[fold.fold as u64, seed::p_fixed(p), sigma2.map(f64::to_bits).unwrap_or(0)],
    );
    let spec = NoiseSpec {
        p,
        sigma2: sigma2.unwrap_or(1.0),
        perturb_categorical: config.preset.perturb_categorical,
        perturb_numeric: config.preset.perturb_numeric,
        apply_minima: config.preset.apply_minima,
        seed: noise_seed,
        group_stratified: config.group_stratified_noise,
        iid_sampling: config.iid_sampling,
    };
    let (perturbed, log) = perturb_dataset_logged(&test, &spec)?;
    if !config.iid_sampling {
        for entry in &log {
            let rows = match entry.group {
                Some(g) => test.group_counts()[g as usize],
                None => test.n_rows(),
            };
            assert_eq!(
                entry.selected,
                exact_count(p, rows),
                "noise audit failed for column {} group {:?}",
                entry.column,
                entry.group
            );
        }
    }

    let x_orig = apply_scaler(&fold.scaler, &test)?;
    let x_pert = apply_scaler(&fold.scaler, &perturbed)?;
    let scores_orig = predict_scores(&fold.model, &x_orig)?;
    let scores_pert = predict_scores(&fold.model, &x_pert)?;
    let labels_orig = predict_labels(&scores_orig, config.threshold);
    let labels_pert = predict_labels(&scores_pert, config.threshold);

    let mut groups = [GroupCellStats::empty(0), GroupCellStats::empty(1)];
    for g in [0u8, 1] {
        let rows = test.group_rows(g);
        if rows.is_empty() {
            continue;
        }
        let verdicts = PairedBinary::new(
            rows.iter().map(|&r| (labels_orig[r], labels_pert[r])).collect(),
        )?;
        let matrix = confusion_from_pairs(&verdicts);
        let d = kappa_decomposition(&matrix);
        let identity_den = 1.0 - d.prevalence_index.powi(2) + d.bias_index.powi(2);
        if identity_den > DENOM_EPS {
            let reconstructed =
                (d.pabak - d.prevalence_index.powi(2) + d.bias_index.powi(2)) / identity_den;
            assert!(
                (d.ck - reconstructed).abs() < 1e-12,
                "kappa identity violated: {} vs {reconstructed}",
                d.ck
            );
        }
        let icc = match PairedScores::new(
            rows.iter().map(|&r| (scores_orig[r], scores_pert[r])).collect(),
        ) {
            Ok(scores) if scores.len() >= 2 => icc_a1(&scores)?,
            _ => None,
        };
        let nf = rows.len() as f64;
        groups[g as usize] = GroupCellStats {
            group: g,
            n_subjects: rows.len(),
            ck: Some(d.ck),
            pabak: Some(d.pabak),
            bias_index: Some(d.bias_index),
            prevalence_index: Some(d.prevalence_index),
            ck_bias_only: d.ck_bias_only,
            ck_prevalence_only: d.ck_prevalence_only,
            icc_a1: icc,
            mean_score: Some(rows.iter().map(|&r| scores_pert[r]).sum::<f64>() / nf),
            prediction_prevalence: Some(
                rows.iter().map(|&r| f64::from(labels_pert[r])).sum::<f64>() / nf,
            ),
        };
    }
    Ok(CellResult { preset: config.preset.name.clone(), sigma2, p, fold: fold.fold, groups })
}

/// A full sweep: fitted folds plus every cell in deterministic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub config: SweepConfig,
    pub folds: Vec<FittedFold>,
    pub cells: Vec<CellResult>,
}

impl SweepOutcome {
    pub fn fold_sizes(&self) -> Vec<usize> {
        self.folds.iter().map(|f| f.test_rows.len()).collect()
    }
}

/// Runs the whole grid. `jobs` bounds the worker threads; cells are computed
/// in parallel but reported in `(sigma2, p, fold)` order regardless.
pub fn run_sweep(ds: &Dataset, config: &SweepConfig, jobs: Option<usize>) -> Result<SweepOutcome> {
    let folds = fit_folds(ds, config)?;
    run_sweep_with_folds(ds, config, folds, jobs)
}

/// Same as [`run_sweep`] but on already-fitted folds (model reuse).
pub fn run_sweep_with_folds(
    ds: &Dataset,
    config: &SweepConfig,
    folds: Vec<FittedFold>,
    jobs: Option<usize>,
) -> Result<SweepOutcome> {
    config.validate()?;
    if folds.len() != config.n_folds {
        return Err(Error::config(format!(
            "{} folds supplied for a {}-fold config",
            folds.len(),
            config.n_folds
        )));
    }
    let mut params = Vec::new();
    for sigma2 in config.sigma2_axis() {
        for &p in &config.p_grid {
            for fold in &folds {
                params.push((p, sigma2, fold));
            }
        }
    }
    let evaluate = || {
        params
            .par_iter()
            .map(|&(p, sigma2, fold)| run_cell(ds, fold, config, p, sigma2))
            .collect::<Result<Vec<CellResult>>>()
    };
    let cells = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(evaluate),
        None => evaluate(),
    }?;
    Ok(SweepOutcome { config: config.clone(), folds, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;

    fn small_config(preset_name: &str) -> SweepConfig {
        let mut preset = preset_by_name(preset_name).unwrap();
        if !preset.sigma2_values.is_empty() {
            preset.sigma2_values = vec![1.0];
        }
        SweepConfig::new(preset, vec![0.0, 0.1, 0.2], 3, 1234)
    }

    fn small_dataset() -> Dataset {
        generate_synthetic(600, 0.34, (0.5, 0.35), 77).unwrap()
    }

    #[test]
    fn p_grid_spans_endpoints() {
        let grid = p_grid(0.0, 0.3, 0.01).unwrap();
        assert_eq!(grid.len(), 31);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[6], 0.06);
        assert_eq!(grid[30], 0.3);
        assert!(p_grid(0.3, 0.0, 0.01).is_err());
        assert!(p_grid(0.0, 0.3, 0.0).is_err());
    }

    #[test]
    fn fold_models_converge_and_partition() {
        let ds = small_dataset();
        let config = small_config("all-features");
        let folds = fit_folds(&ds, &config).unwrap();
        assert_eq!(folds.len(), 3);
        let total: usize = folds.iter().map(|f| f.test_rows.len()).sum();
        assert_eq!(total, ds.n_rows());
        for fold in &folds {
            assert!(fold.grad_norm <= config.tol);
            assert_eq!(fold.train_rows + fold.test_rows.len(), ds.n_rows());
        }
    }

    #[test]
    fn zero_noise_cell_is_perfect_agreement() {
        let ds = small_dataset();
        let config = small_config("all-features");
        let folds = fit_folds(&ds, &config).unwrap();
        let cell = run_cell(&ds, &folds[0], &config, 0.0, Some(1.0)).unwrap();
        for g in &cell.groups {
            assert!(g.n_subjects > 0);
            assert_eq!(g.ck, Some(1.0));
            assert_eq!(g.pabak, Some(1.0));
            assert_eq!(g.ck_bias_only, Some(1.0));
            assert_eq!(g.ck_prevalence_only, Some(1.0));
            assert_eq!(g.icc_a1, Some(1.0));
        }
    }

    #[test]
    fn group_subject_counts_cover_the_fold() {
        let ds = small_dataset();
        let config = small_config("all-features");
        let folds = fit_folds(&ds, &config).unwrap();
        for fold in &folds {
            let cell = run_cell(&ds, fold, &config, 0.2, Some(1.0)).unwrap();
            let total: usize = cell.groups.iter().map(|g| g.n_subjects).sum();
            assert_eq!(total, fold.test_rows.len());
        }
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let ds = small_dataset();
        let config = small_config("all-features");
        let a = run_sweep(&ds, &config, Some(2)).unwrap();
        let b = run_sweep(&ds, &config, Some(4)).unwrap();
        assert_eq!(a.cells, b.cells);
        let keys: Vec<(f64, usize)> = a.cells.iter().map(|c| (c.p, c.fold)).collect();
        let mut expected = Vec::new();
        for &p in &config.p_grid {
            for fold in 0..3 {
                expected.push((p, fold));
            }
        }
        assert_eq!(keys, expected);
    }

    #[test]
    fn categorical_preset_runs_without_variance() {
        let ds = small_dataset();
        let config = small_config("categorical-only");
        let outcome = run_sweep(&ds, &config, None).unwrap();
        assert!(outcome.cells.iter().all(|c| c.sigma2.is_none()));
        assert_eq!(outcome.cells.len(), 9);
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = small_config("all-features");
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.base_seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = small_config("all-features");
        config.p_grid.clear();
        assert!(config.validate().is_err());

        let mut config = small_config("all-features");
        config.preset.sigma2_values.clear();
        assert!(config.validate().is_err());

        let mut config = small_config("all-features");
        config.threshold = 1.0;
        assert!(config.validate().is_err());

        let mut config = small_config("categorical-only");
        config.preset.perturb_categorical = false;
        assert!(config.validate().is_err());
    }
}
