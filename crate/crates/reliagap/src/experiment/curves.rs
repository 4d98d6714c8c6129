//! Fold-averaged curves, group gaps and the partial-correction panels.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{CellResult, GroupCellStats};
use crate::error::{Error, Result};
use crate::irr::DENOM_EPS;

/// Per-cell statistics a sweep reports for each group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Ck,
    Pabak,
    BiasIndex,
    PrevalenceIndex,
    CkBiasOnly,
    CkPrevalenceOnly,
    IccA1,
    MeanScore,
    PredictionPrevalence,
}

impl Statistic {
    pub const ALL: [Statistic; 9] = [
        Statistic::Ck,
        Statistic::Pabak,
        Statistic::BiasIndex,
        Statistic::PrevalenceIndex,
        Statistic::CkBiasOnly,
        Statistic::CkPrevalenceOnly,
        Statistic::IccA1,
        Statistic::MeanScore,
        Statistic::PredictionPrevalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Ck => "ck",
            Statistic::Pabak => "pabak",
            Statistic::BiasIndex => "bias_index",
            Statistic::PrevalenceIndex => "prevalence_index",
            Statistic::CkBiasOnly => "ck_bias_only",
            Statistic::CkPrevalenceOnly => "ck_prevalence_only",
            Statistic::IccA1 => "icc_a1",
            Statistic::MeanScore => "mean_score",
            Statistic::PredictionPrevalence => "prediction_prevalence",
        }
    }

    pub fn from_name(name: &str) -> Option<Statistic> {
        Statistic::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl GroupCellStats {
    /// Field access by statistic, for generic aggregation.
    pub fn get(&self, stat: Statistic) -> Option<f64> {
        match stat {
            Statistic::Ck => self.ck,
            Statistic::Pabak => self.pabak,
            Statistic::BiasIndex => self.bias_index,
            Statistic::PrevalenceIndex => self.prevalence_index,
            Statistic::CkBiasOnly => self.ck_bias_only,
            Statistic::CkPrevalenceOnly => self.ck_prevalence_only,
            Statistic::IccA1 => self.icc_a1,
            Statistic::MeanScore => self.mean_score,
            Statistic::PredictionPrevalence => self.prediction_prevalence,
        }
    }
}

/// Fold-averaged statistics of one `(preset, sigma2, p, group)` point.
/// `fold_counts[i]` records how many folds contributed to `values[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedRow {
    pub preset: String,
    pub sigma2: Option<f64>,
    pub p: f64,
    pub group: u8,
    pub values: [Option<f64>; 9],
    pub fold_counts: [usize; 9],
}

fn sigma_key(sigma2: Option<f64>) -> u64 {
    sigma2.map(f64::to_bits).unwrap_or(0)
}

/// Averages cells over folds. Missing per-fold values are skipped, not
/// imputed; rows come out ordered by preset, variance, noise level, group.
pub fn aggregate(cells: &[CellResult]) -> Vec<AggregatedRow> {
    let mut acc: BTreeMap<(String, u64, u64, u8), ([f64; 9], [usize; 9])> = BTreeMap::new();
    for cell in cells {
        for g in &cell.groups {
            if g.n_subjects == 0 {
                continue;
            }
            let key = (cell.preset.clone(), sigma_key(cell.sigma2), cell.p.to_bits(), g.group);
            let entry = acc.entry(key).or_insert(([0.0; 9], [0; 9]));
            for (i, stat) in Statistic::ALL.into_iter().enumerate() {
                if let Some(v) = g.get(stat) {
                    entry.0[i] += v;
                    entry.1[i] += 1;
                }
            }
        }
    }
    acc.into_iter()
        .map(|((preset, sigma_bits, p_bits, group), (sums, counts))| {
            let mut values = [None; 9];
            for i in 0..9 {
                if counts[i] > 0 {
                    values[i] = Some(sums[i] / counts[i] as f64);
                }
            }
            AggregatedRow {
                preset,
                sigma2: (sigma_bits != 0).then(|| f64::from_bits(sigma_bits)),
                p: f64::from_bits(p_bits),
                group,
                values,
                fold_counts: counts,
            }
        })
        .collect()
}

/// One grid point of a two-group comparison curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub p: f64,
    pub group0: Option<f64>,
    pub group1: Option<f64>,
    /// `group0 - group1` where both sides exist.
    pub gap: Option<f64>,
    pub n_folds: [usize; 2],
}

/// A statistic traced over the noise grid for both groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub preset: String,
    pub statistic: Statistic,
    pub sigma2: Option<f64>,
    pub points: Vec<GapPoint>,
}

/// Pairs the two groups of each aggregated point into per-statistic curves.
pub fn gap_curves(rows: &[AggregatedRow]) -> Vec<GapCurve> {
    let mut panels: BTreeMap<(String, u64), BTreeMap<u64, [Option<usize>; 2]>> = BTreeMap::new();
    for (idx, row) in rows.iter().enumerate() {
        panels
            .entry((row.preset.clone(), sigma_key(row.sigma2)))
            .or_default()
            .entry(row.p.to_bits())
            .or_default()[row.group as usize] = Some(idx);
    }
    let mut curves = Vec::new();
    for ((preset, sigma_bits), by_p) in &panels {
        let sigma2 = (*sigma_bits != 0).then(|| f64::from_bits(*sigma_bits));
        for (si, stat) in Statistic::ALL.into_iter().enumerate() {
            let points = by_p
                .iter()
                .map(|(&p_bits, pair)| {
                    let value = |slot: Option<usize>| slot.and_then(|i| rows[i].values[si]);
                    let count =
                        |slot: Option<usize>| slot.map(|i| rows[i].fold_counts[si]).unwrap_or(0);
                    let (g0, g1) = (value(pair[0]), value(pair[1]));
                    GapPoint {
                        p: f64::from_bits(p_bits),
                        group0: g0,
                        group1: g1,
                        gap: g0.zip(g1).map(|(a, b)| a - b),
                        n_folds: [count(pair[0]), count(pair[1])],
                    }
                })
                .collect();
            curves.push(GapCurve { preset: preset.clone(), statistic: stat, sigma2, points });
        }
    }
    curves
}

/// One point of a correction-panel series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub mean: Option<f64>,
    pub n_folds: usize,
}

/// Chance-corrected agreement next to its single-correction variants, for
/// one group of one panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPanel {
    pub preset: String,
    pub sigma2: Option<f64>,
    pub group: u8,
    pub series: Vec<(Statistic, Vec<CurvePoint>)>,
}

const DECOMPOSITION_STATS: [Statistic; 4] =
    [Statistic::Ck, Statistic::Pabak, Statistic::CkBiasOnly, Statistic::CkPrevalenceOnly];

/// Builds both groups' correction panels for one `(preset, sigma2)` slice,
/// re-checking on every contributing cell that the corrected statistics
/// reassemble the plain chance-corrected value.
pub fn decompose_correction(
    cells: &[CellResult],
    preset: &str,
    sigma2: Option<f64>,
) -> Result<[DecompositionPanel; 2]> {
    let slice: Vec<&CellResult> = cells
        .iter()
        .filter(|c| c.preset == preset && sigma_key(c.sigma2) == sigma_key(sigma2))
        .collect();
    if slice.is_empty() {
        return Err(Error::invalid(format!(
            "no cells for preset {preset} at variance {sigma2:?}"
        )));
    }
    for cell in &slice {
        for g in &cell.groups {
            if let (Some(ck), Some(pabak), Some(bi), Some(pi)) =
                (g.ck, g.pabak, g.bias_index, g.prevalence_index)
            {
                let den = 1.0 - pi * pi + bi * bi;
                if den > DENOM_EPS {
                    let rebuilt = (pabak - pi * pi + bi * bi) / den;
                    assert!(
                        (ck - rebuilt).abs() < 1e-12,
                        "corrected agreement does not reassemble: {ck} vs {rebuilt}"
                    );
                }
            }
        }
    }
    let owned: Vec<CellResult> = slice.into_iter().cloned().collect();
    let rows = aggregate(&owned);
    let panel = |group: u8| DecompositionPanel {
        preset: preset.to_string(),
        sigma2,
        group,
        series: DECOMPOSITION_STATS
            .into_iter()
            .map(|stat| {
                let si = Statistic::ALL.iter().position(|s| *s == stat).unwrap();
                let points = rows
                    .iter()
                    .filter(|r| r.group == group)
                    .map(|r| CurvePoint { p: r.p, mean: r.values[si], n_folds: r.fold_counts[si] })
                    .collect();
                (stat, points)
            })
            .collect(),
    };
    Ok([panel(0), panel(1)])
}
