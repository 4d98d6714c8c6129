//! Command-line front end: `stats`, `fit`, `simulate`, `plot`, `manifest`.
//!
//! Option precedence is flags, then `--config` JSON, then built-in defaults.
//! `RELIAGAP_DATA` supplies the data file when `--data` is absent and
//! `RELIAGAP_OUT` the output root when `--out-dir` is absent.

use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::data::{canonical_schema, load_dataset, load_schema_map, Dataset};
use crate::error::{Error, Result};
use crate::experiment::{
    aggregate, decompose_correction, fit_folds, gap_curves, load_manifest, p_grid, preset_by_name,
    run_sweep_with_folds, sha256_file, write_manifest, DataProvenance, FittedFold, RunManifest,
    Statistic, SweepConfig, SweepOutcome,
};
use crate::irr::{
    anova_mean_squares, chance_agreement, confusion_from_pairs, icc_a1, kappa_decomposition,
    observed_agreement, PairedBinary, PairedScores,
};
use crate::model::{load_models, save_models, FoldModel, ModelBundle};
use crate::report::{
    decomposition_plot_name, gap_curve_plot, gap_plot_name, read_aggregated_csv, save_svg,
    write_aggregated_csv, write_results_csv, PlotSpec, Series,
};

const DEFAULT_DATA: &str = "data/compas-two-year.csv";
const DEFAULT_OUT: &str = "runs";
const DEFAULT_SEED: u64 = 1234;
const DEFAULT_FOLDS: usize = 5;

/// Entry point for the binary; returns the process exit code.
pub fn cli_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[derive(Parser)]
#[command(
    name = "reliagap",
    version,
    about = "Group-wise inter-rater reliability of binary classifiers under input perturbations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Agreement statistics for a two-column CSV of paired ratings
    Stats(StatsArgs),
    /// Fit per-fold models and save them for later reuse
    Fit(FitArgs),
    /// Run a perturbation sweep and write tables, models and manifest
    Simulate(SimulateArgs),
    /// Render SVG curves from a run directory's aggregated table
    Plot(PlotArgs),
    /// Print a run's provenance manifest
    Manifest(ManifestArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum StatsMode {
    /// Treat columns as binary verdicts; report the kappa family
    Binary,
    /// Treat columns as continuous scores; report the ANOVA family
    Score,
}

#[derive(Args)]
struct StatsArgs {
    /// Two-column CSV of paired ratings (header row optional)
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = StatsMode::Binary)]
    mode: StatsMode,
}

#[derive(Args)]
struct CommonArgs {
    /// Input table (CSV); falls back to RELIAGAP_DATA, then a default path
    #[arg(long)]
    data: Option<PathBuf>,
    /// JSON object mapping this tool's column names to the file's headers
    #[arg(long)]
    schema_map: Option<PathBuf>,
    /// JSON file with defaults for any option (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    reg_strength: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Stratify fold assignment by outcome label
    #[arg(long)]
    stratify_folds: bool,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Where to write the fitted model bundle
    #[arg(long, default_value = "models.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Experiment preset: all-features, all-features-minima, numeric-only,
    /// categorical-only
    #[arg(long)]
    preset: Option<String>,
    /// Noise variance; repeat to sweep several (overrides the preset's list)
    #[arg(long)]
    sigma2: Vec<f64>,
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    p_max: Option<f64>,
    #[arg(long)]
    p_step: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Output root; falls back to RELIAGAP_OUT, then ./runs
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Reuse a fitted model bundle instead of refitting
    #[arg(long)]
    models: Option<PathBuf>,
    /// Draw noise per row instead of hitting exact per-group counts
    #[arg(long)]
    iid_sampling: bool,
    /// Draw noise over the whole fold rather than per group
    #[arg(long)]
    unstratified_noise: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Run directory containing aggregated.csv
    #[arg(long)]
    run_dir: PathBuf,
}

#[derive(Args)]
struct ManifestArgs {
    /// Run directory containing manifest.json
    #[arg(long)]
    run_dir: PathBuf,
}

/// JSON mirror of the CLI options, all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    data: Option<PathBuf>,
    schema_map: Option<PathBuf>,
    preset: Option<String>,
    sigma2: Option<Vec<f64>>,
    p_min: Option<f64>,
    p_max: Option<f64>,
    p_step: Option<f64>,
    seed: Option<u64>,
    folds: Option<usize>,
    reg_strength: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    threshold: Option<f64>,
    stratify_folds: Option<bool>,
    group_stratified_noise: Option<bool>,
    iid_sampling: Option<bool>,
    out_dir: Option<PathBuf>,
    jobs: Option<usize>,
}

fn load_config_file(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::config(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::config(format!("bad config {}: {e}", path.display())))
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats(args) => stats(args),
        Command::Fit(args) => fit(args),
        Command::Simulate(args) => simulate(args),
        Command::Plot(args) => plot(&args.run_dir),
        Command::Manifest(args) => manifest(&args.run_dir),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "na".into())
}

/// Reads a two-column CSV of number pairs, skipping one non-numeric header
/// row if present.
fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::data(path.display().to_string(), format!("cannot open: {e}")))?;
    let mut pairs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::data(
                path.display().to_string(),
                format!("row {}: expected 2 columns, found {}", i + 1, record.len()),
            ));
        }
        let parsed = record[0].parse::<f64>().and_then(|a| Ok((a, record[1].parse::<f64>()?)));
        match parsed {
            Ok(pair) => pairs.push(pair),
            Err(_) if i == 0 => continue, // header row
            Err(_) => {
                return Err(Error::data(
                    path.display().to_string(),
                    format!("row {}: non-numeric rating", i + 1),
                ))
            }
        }
    }
    Ok(pairs)
}

fn stats(args: StatsArgs) -> Result<()> {
    let pairs = read_pairs(&args.input)?;
    match args.mode {
        StatsMode::Binary => {
            let binary: Vec<(u8, u8)> = pairs
                .iter()
                .map(|&(a, b)| {
                    let to_bit = |v: f64| match v {
                        v if v == 0.0 => Ok(0u8),
                        v if v == 1.0 => Ok(1u8),
                        v => Err(Error::invalid(format!(
                            "binary mode needs 0/1 ratings, found {v}"
                        ))),
                    };
                    Ok((to_bit(a)?, to_bit(b)?))
                })
                .collect::<Result<_>>()?;
            let ratings = PairedBinary::new(binary)?;
            let matrix = confusion_from_pairs(&ratings);
            let d = kappa_decomposition(&matrix);
            println!("n={}", ratings.len());
            println!("p_o={}", observed_agreement(&matrix));
            println!("p_c={}", chance_agreement(&matrix));
            println!("ck={}", d.ck);
            println!("pabak={}", d.pabak);
            println!("bi={}", d.bias_index);
            println!("pi={}", d.prevalence_index);
            println!("ck_bias_only={}", fmt_opt(d.ck_bias_only));
            println!("ck_prevalence_only={}", fmt_opt(d.ck_prevalence_only));
        }
        StatsMode::Score => {
            let scores = PairedScores::new(pairs)?;
            let anova = anova_mean_squares(&scores)?;
            println!("n={}", scores.len());
            println!("msr={}", anova.msr);
            println!("msc={}", anova.msc);
            println!("mse={}", anova.mse);
            println!("icc_a1={}", fmt_opt(icc_a1(&scores)?));
        }
    }
    Ok(())
}

/// Merged, fully-resolved sweep inputs.
struct Resolved {
    data_path: PathBuf,
    schema_map: Option<PathBuf>,
    config: SweepConfig,
    out_root: PathBuf,
    jobs: Option<usize>,
}

fn resolve(
    common: &CommonArgs,
    sim: Option<&SimulateArgs>,
    file: &ConfigFile,
) -> Result<Resolved> {
    let data_path = common
        .data
        .clone()
        .or_else(|| file.data.clone())
        .or_else(|| std::env::var_os("RELIAGAP_DATA").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA));
    let preset_name = sim
        .and_then(|s| s.preset.clone())
        .or_else(|| file.preset.clone())
        .unwrap_or_else(|| "all-features".into());
    let mut preset = preset_by_name(&preset_name)?;
    let sigma_override = match sim {
        Some(s) if !s.sigma2.is_empty() => Some(s.sigma2.clone()),
        _ => file.sigma2.clone(),
    };
    if let Some(sigmas) = sigma_override {
        preset.sigma2_values = sigmas;
    }
    let p_min = sim.and_then(|s| s.p_min).or(file.p_min).unwrap_or(0.0);
    let p_max = sim.and_then(|s| s.p_max).or(file.p_max).unwrap_or(0.3);
    let p_step = sim.and_then(|s| s.p_step).or(file.p_step).unwrap_or(0.01);
    let mut config = SweepConfig::new(
        preset,
        p_grid(p_min, p_max, p_step)?,
        common.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS),
        common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
    );
    if let Some(v) = common.reg_strength.or(file.reg_strength) {
        config.reg_strength = v;
    }
    if let Some(v) = common.tol.or(file.tol) {
        config.tol = v;
    }
    if let Some(v) = common.max_iter.or(file.max_iter) {
        config.max_iter = v;
    }
    if let Some(v) = sim.and_then(|s| s.threshold).or(file.threshold) {
        config.threshold = v;
    }
    config.stratify_folds = common.stratify_folds || file.stratify_folds.unwrap_or(false);
    config.iid_sampling =
        sim.map(|s| s.iid_sampling).unwrap_or(false) || file.iid_sampling.unwrap_or(false);
    if sim.map(|s| s.unstratified_noise).unwrap_or(false) {
        config.group_stratified_noise = false;
    } else if let Some(v) = file.group_stratified_noise {
        config.group_stratified_noise = v;
    }
    config.validate()?;
    let out_root = sim
        .and_then(|s| s.out_dir.clone())
        .or_else(|| file.out_dir.clone())
        .or_else(|| std::env::var_os("RELIAGAP_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok(Resolved {
        data_path,
        schema_map: common.schema_map.clone().or_else(|| file.schema_map.clone()),
        config,
        out_root,
        jobs: sim.and_then(|s| s.jobs).or(file.jobs),
    })
}

fn load_table(resolved: &Resolved) -> Result<Dataset> {
    if !resolved.data_path.is_file() {
        return Err(Error::data(
            resolved.data_path.display().to_string(),
            "data file not found; pass --data, set RELIAGAP_DATA, or place the file there",
        ));
    }
    let remap = match &resolved.schema_map {
        Some(path) => Some(load_schema_map(path)?),
        None => None,
    };
    load_dataset(&resolved.data_path, &canonical_schema(), remap.as_ref())
}

fn bundle_from_folds(
    folds: &[FittedFold],
    config: &SweepConfig,
    data_sha256: &str,
) -> ModelBundle {
    ModelBundle {
        fit_hash: config.fit_hash(),
        data_sha256: data_sha256.to_string(),
        n_folds: config.n_folds,
        folds: folds
            .iter()
            .map(|f| FoldModel {
                fold: f.fold,
                scaler: f.scaler.clone(),
                model: f.model.clone(),
                iterations: f.iterations,
                grad_norm: f.grad_norm,
            })
            .collect(),
    }
}

fn fit(args: FitArgs) -> Result<()> {
    let file = load_config_file(args.common.config.as_deref())?;
    let resolved = resolve(&args.common, None, &file)?;
    let ds = load_table(&resolved)?;
    let folds = fit_folds(&ds, &resolved.config)?;
    let sha = sha256_file(&resolved.data_path)?;
    save_models(&args.out, &bundle_from_folds(&folds, &resolved.config, &sha))?;
    println!("{}", args.out.display());
    Ok(())
}

/// Rebuilds fitted folds from a saved bundle, refusing mismatched reuse.
fn restore_folds(path: &Path, ds: &Dataset, config: &SweepConfig, sha: &str) -> Result<Vec<FittedFold>> {
    let bundle = load_models(path)?;
    if bundle.fit_hash != config.fit_hash() {
        return Err(Error::config(format!(
            "model bundle {} was fitted under different settings (seed, folds, or solver)",
            path.display()
        )));
    }
    if bundle.data_sha256 != sha {
        return Err(Error::config(format!(
            "model bundle {} was fitted on different data",
            path.display()
        )));
    }
    let assignment = crate::data::assign_folds(
        ds.labels(),
        config.n_folds,
        config.base_seed,
        config.stratify_folds,
    )?;
    let mut folds: Vec<FittedFold> = bundle
        .folds
        .into_iter()
        .map(|f| {
            let test_rows = assignment.test_rows(f.fold);
            FittedFold {
                fold: f.fold,
                train_rows: ds.n_rows() - test_rows.len(),
                test_rows,
                scaler: f.scaler,
                model: f.model,
                iterations: f.iterations,
                grad_norm: f.grad_norm,
            }
        })
        .collect();
    folds.sort_by_key(|f| f.fold);
    Ok(folds)
}

fn run_dir_name(config_hash: &str) -> String {
    format!("{}-{}", Utc::now().format("%Y%m%dT%H%M%SZ"), &config_hash[..8])
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let file = load_config_file(args.common.config.as_deref())?;
    let resolved = resolve(&args.common, Some(&args), &file)?;
    let ds = load_table(&resolved)?;
    let sha = sha256_file(&resolved.data_path)?;
    let folds = match &args.models {
        Some(path) => restore_folds(path, &ds, &resolved.config, &sha)?,
        None => fit_folds(&ds, &resolved.config)?,
    };
    let outcome = run_sweep_with_folds(&ds, &resolved.config, folds, resolved.jobs)?;
    write_run(&resolved, &outcome, &ds, &sha)
}

fn write_run(resolved: &Resolved, outcome: &SweepOutcome, ds: &Dataset, sha: &str) -> Result<()> {
    let config = &outcome.config;
    // Re-checks the corrected-agreement identity across every cell before
    // anything is written.
    for sigma2 in config.sigma2_axis() {
        decompose_correction(&outcome.cells, &config.preset.name, sigma2)?;
    }
    let run_dir = resolved.out_root.join(run_dir_name(&config.hash()));
    std::fs::create_dir_all(&run_dir)?;
    write_results_csv(&run_dir.join("results.csv"), &outcome.cells)?;
    write_aggregated_csv(&run_dir.join("aggregated.csv"), &aggregate(&outcome.cells))?;
    save_models(&run_dir.join("models.json"), &bundle_from_folds(&outcome.folds, config, sha))?;
    let mut manifest = RunManifest::new(
        outcome,
        DataProvenance {
            source: resolved.data_path.display().to_string(),
            sha256: sha.to_string(),
            n_rows: ds.n_rows(),
            group_counts: ds.group_counts(),
            label_prevalence: ds.labels().iter().map(|&l| f64::from(l)).sum::<f64>()
                / ds.n_rows().max(1) as f64,
        },
        resolved.jobs,
    );
    manifest.outputs = vec![
        "aggregated.csv".into(),
        "manifest.json".into(),
        "models.json".into(),
        "results.csv".into(),
    ];
    write_manifest(&run_dir.join("manifest.json"), &manifest)?;
    println!("{}", run_dir.display());
    Ok(())
}

/// Statistics drawn as two-group curves by `plot`.
const PLOTTED_STATS: [Statistic; 3] = [Statistic::Ck, Statistic::Pabak, Statistic::IccA1];

fn plot(run_dir: &Path) -> Result<()> {
    let rows = read_aggregated_csv(&run_dir.join("aggregated.csv"))?;
    if rows.is_empty() {
        return Err(Error::invalid("aggregated table is empty"));
    }
    let mut written = Vec::new();
    for curve in gap_curves(&rows) {
        if !PLOTTED_STATS.contains(&curve.statistic) {
            continue;
        }
        let name = gap_plot_name(&curve.preset, curve.statistic, curve.sigma2);
        save_svg(&run_dir.join(&name), &gap_curve_plot(&curve))?;
        written.push(name);
    }
    // Correction panels: the corrected statistic next to its single-factor
    // variants, one panel per group.
    let mut panels: BTreeSet<(String, u64)> = BTreeSet::new();
    for row in &rows {
        panels.insert((row.preset.clone(), row.sigma2.map(f64::to_bits).unwrap_or(0)));
    }
    let decomposition_stats = [
        Statistic::Ck,
        Statistic::Pabak,
        Statistic::CkBiasOnly,
        Statistic::CkPrevalenceOnly,
    ];
    for (preset, sigma_bits) in panels {
        let sigma2 = (sigma_bits != 0).then(|| f64::from_bits(sigma_bits));
        for group in [0u8, 1] {
            let series: Vec<Series> = decomposition_stats
                .iter()
                .map(|&stat| {
                    let si = Statistic::ALL.iter().position(|s| *s == stat).unwrap();
                    Series {
                        label: stat.name().into(),
                        points: rows
                            .iter()
                            .filter(|r| {
                                r.preset == preset
                                    && r.group == group
                                    && r.sigma2.map(f64::to_bits).unwrap_or(0) == sigma_bits
                            })
                            .map(|r| (r.p, r.values[si]))
                            .collect(),
                    }
                })
                .collect();
            if series.iter().all(|s| s.points.iter().all(|(_, v)| v.is_none())) {
                continue;
            }
            let title = match sigma2 {
                Some(s) => format!("agreement corrections, group {group} ({preset}, variance {s})"),
                None => format!("agreement corrections, group {group} ({preset})"),
            };
            let name = decomposition_plot_name(&preset, sigma2, group);
            save_svg(
                &run_dir.join(&name),
                &PlotSpec {
                    title,
                    x_label: "perturbation probability p".into(),
                    y_label: "agreement".into(),
                    series,
                },
            )?;
            written.push(name);
        }
    }
    // Keep the manifest's output list in sync when one is present.
    let manifest_path = run_dir.join("manifest.json");
    if manifest_path.is_file() {
        let mut manifest = load_manifest(&manifest_path)?;
        let mut outputs: BTreeSet<String> = manifest.outputs.drain(..).collect();
        outputs.extend(written.iter().cloned());
        manifest.outputs = outputs.into_iter().collect();
        write_manifest(&manifest_path, &manifest)?;
    }
    for name in &written {
        println!("{}", run_dir.join(name).display());
    }
    Ok(())
}

fn manifest(run_dir: &Path) -> Result<()> {
    let manifest = load_manifest(&run_dir.join("manifest.json"))?;
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(())
}
