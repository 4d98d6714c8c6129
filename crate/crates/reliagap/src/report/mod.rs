//! Result tables and plots. Output bytes are deterministic for a given
//! sweep, so reruns of the same config and seed diff clean.

mod svg;

pub use svg::{render_svg, save_svg, PlotSpec, Series};

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::{AggregatedRow, CellResult, GapCurve, Statistic};

/// Column order of the per-cell results table.
pub const RESULTS_HEADER: [&str; 15] = [
    "preset",
    "sigma2",
    "p",
    "fold",
    "group",
    "n_subjects",
    "ck",
    "pabak",
    "bias_index",
    "prevalence_index",
    "ck_bias_only",
    "ck_prevalence_only",
    "icc_a1",
    "mean_score",
    "prediction_prevalence",
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one row per `(cell, group)`, empty fields for undefined values.
pub fn write_results_csv(path: &Path, cells: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULTS_HEADER)?;
    for cell in cells {
        for g in &cell.groups {
            if g.n_subjects == 0 {
                continue;
            }
            w.write_record([
                cell.preset.clone(),
                fmt_opt(cell.sigma2),
                cell.p.to_string(),
                cell.fold.to_string(),
                g.group.to_string(),
                g.n_subjects.to_string(),
                fmt_opt(g.ck),
                fmt_opt(g.pabak),
                fmt_opt(g.bias_index),
                fmt_opt(g.prevalence_index),
                fmt_opt(g.ck_bias_only),
                fmt_opt(g.ck_prevalence_only),
                fmt_opt(g.icc_a1),
                fmt_opt(g.mean_score),
                fmt_opt(g.prediction_prevalence),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn aggregated_header() -> Vec<String> {
    let mut header = vec!["preset".into(), "sigma2".into(), "p".into(), "group".into()];
    for stat in Statistic::ALL {
        header.push(stat.name().into());
        header.push(format!("{}_folds", stat.name()));
    }
    header
}

/// Writes the fold-averaged table, one row per `(preset, sigma2, p, group)`.
pub fn write_aggregated_csv(path: &Path, rows: &[AggregatedRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(aggregated_header())?;
    for row in rows {
        let mut record = vec![
            row.preset.clone(),
            fmt_opt(row.sigma2),
            row.p.to_string(),
            row.group.to_string(),
        ];
        for i in 0..Statistic::ALL.len() {
            record.push(fmt_opt(row.values[i]));
            record.push(row.fold_counts[i].to_string());
        }
        w.write_record(record)?;
    }
    w.flush()?;
    Ok(())
}

fn data_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::data(path.display().to_string(), msg)
}

fn parse_opt(field: &str, path: &Path, what: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| data_err(path, format!("bad {what} value {field:?}")))
}

/// Reads a table written by [`write_aggregated_csv`].
pub fn read_aggregated_csv(path: &Path) -> Result<Vec<AggregatedRow>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| data_err(path, format!("cannot open: {e}")))?;
    let expected = aggregated_header();
    let got: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if got != expected {
        return Err(data_err(path, format!("unexpected header {got:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let mut values = [None; 9];
        let mut fold_counts = [0usize; 9];
        for i in 0..9 {
            values[i] = parse_opt(field(4 + 2 * i), path, Statistic::ALL[i].name())?;
            fold_counts[i] = field(5 + 2 * i)
                .parse()
                .map_err(|_| data_err(path, "bad fold count"))?;
        }
        rows.push(AggregatedRow {
            preset: field(0).to_string(),
            sigma2: parse_opt(field(1), path, "sigma2")?,
            p: field(2).parse().map_err(|_| data_err(path, "bad p value"))?,
            group: field(3).parse().map_err(|_| data_err(path, "bad group"))?,
            values,
            fold_counts,
        });
    }
    Ok(rows)
}

fn sigma_tag(sigma2: Option<f64>) -> String {
    match sigma2 {
        Some(s) => format!("sigma{s}"),
        None => "novariance".into(),
    }
}

/// File name for a two-group curve plot.
pub fn gap_plot_name(preset: &str, statistic: Statistic, sigma2: Option<f64>) -> String {
    format!("gap-{preset}-{}-{}.svg", statistic.name(), sigma_tag(sigma2))
}

/// File name for a correction-panel plot.
pub fn decomposition_plot_name(preset: &str, sigma2: Option<f64>, group: u8) -> String {
    format!("decomposition-{preset}-{}-group{group}.svg", sigma_tag(sigma2))
}

/// Renders one gap curve as a two-series plot over the noise grid.
pub fn gap_curve_plot(curve: &GapCurve) -> PlotSpec {
    let label = match curve.sigma2 {
        Some(s) => format!("{} ({}, variance {s})", curve.statistic.name(), curve.preset),
        None => format!("{} ({})", curve.statistic.name(), curve.preset),
    };
    PlotSpec {
        title: label,
        x_label: "perturbation probability p".into(),
        y_label: curve.statistic.name().into(),
        series: vec![
            Series {
                label: "group 0".into(),
                points: curve.points.iter().map(|pt| (pt.p, pt.group0)).collect(),
            },
            Series {
                label: "group 1".into(),
                points: curve.points.iter().map(|pt| (pt.p, pt.group1)).collect(),
            },
        ],
    }
}
