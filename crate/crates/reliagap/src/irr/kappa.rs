//! Chance-corrected agreement between two raters with binary verdicts.
//!
//! Counts are held as exact integers; division happens only in the final
//! expression of each statistic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominators at or below this magnitude mark a statistic as undefined.
pub const DENOM_EPS: f64 = 1e-12;

/// Cross-classification of two raters' binary verdicts on the same subjects.
///
/// `a` counts subjects both raters marked positive and `d` subjects both
/// marked negative. `b` counts subjects only the second rater marked positive,
/// `c` subjects only the first did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ConfusionMatrix2x2 {
    /// Builds a matrix from raw cell counts; at least one must be nonzero.
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if a == 0 && b == 0 && c == 0 && d == 0 {
            return Err(Error::invalid("confusion matrix has no subjects"));
        }
        Ok(ConfusionMatrix2x2 { a, b, c, d })
    }

    /// Total number of rated subjects.
    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    fn n_f(&self) -> f64 {
        self.n() as f64
    }

    /// Positive counts per rater: `(first, second)`.
    fn positives(&self) -> (u128, u128) {
        ((self.a + self.c) as u128, (self.a + self.b) as u128)
    }
}

/// Non-empty sequence of paired binary verdicts `(first, second)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedBinary(Vec<(u8, u8)>);

impl PairedBinary {
    pub fn new(pairs: Vec<(u8, u8)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("paired verdicts must be non-empty"));
        }
        for (i, &(r, s)) in pairs.iter().enumerate() {
            if r > 1 || s > 1 {
                return Err(Error::invalid(format!(
                    "pair {i} is ({r}, {s}); verdicts must be 0 or 1"
                )));
            }
        }
        Ok(PairedBinary(pairs))
    }

    pub fn from_slices(first: &[u8], second: &[u8]) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::invalid(format!(
                "rater lengths differ: {} vs {}",
                first.len(),
                second.len()
            )));
        }
        PairedBinary::new(first.iter().copied().zip(second.iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pairs(&self) -> &[(u8, u8)] {
        &self.0
    }
}

/// Tallies paired verdicts into a 2x2 matrix.
pub fn confusion_from_pairs(pairs: &PairedBinary) -> ConfusionMatrix2x2 {
    let mut m = ConfusionMatrix2x2 { a: 0, b: 0, c: 0, d: 0 };
    for &(r, s) in pairs.pairs() {
        match (r, s) {
            (1, 1) => m.a += 1,
            (0, 1) => m.b += 1,
            (1, 0) => m.c += 1,
            _ => m.d += 1,
        }
    }
    m
}

/// Fraction of subjects the raters agree on.
pub fn observed_agreement(m: &ConfusionMatrix2x2) -> f64 {
    (m.a + m.d) as f64 / m.n_f()
}

/// Agreement expected by chance from the raters' marginal positive rates.
pub fn chance_agreement(m: &ConfusionMatrix2x2) -> f64 {
    let n = m.n() as u128;
    let (r1, s1) = m.positives();
    let (r0, s0) = (n - r1, n - s1);
    (r1 * s1 + r0 * s0) as f64 / (n * n) as f64
}

/// Cohen's kappa: observed agreement corrected for chance agreement.
///
/// When chance agreement is exactly 1 (both raters unanimous in the same
/// direction), the statistic is defined as 1 if observed agreement is perfect
/// and 0 otherwise.
pub fn cohen_kappa(m: &ConfusionMatrix2x2) -> f64 {
    let n = m.n() as u128;
    let (r1, s1) = m.positives();
    let (r0, s0) = (n - r1, n - s1);
    if r1 * s1 + r0 * s0 == n * n {
        return if m.a + m.d == m.n() { 1.0 } else { 0.0 };
    }
    let po = observed_agreement(m);
    let pc = chance_agreement(m);
    (po - pc) / (1.0 - pc)
}

/// Prevalence-adjusted bias-adjusted kappa: `2 * p_o - 1`.
pub fn pabak(m: &ConfusionMatrix2x2) -> f64 {
    2.0 * observed_agreement(m) - 1.0
}

/// Difference between the raters' positive rates, `(b - c) / n`; positive when
/// the second rater marks positive more often than the first.
pub fn bias_index(m: &ConfusionMatrix2x2) -> f64 {
    (m.b as i128 - m.c as i128) as f64 / m.n_f()
}

/// Imbalance between shared positives and shared negatives, `(a - d) / n`.
pub fn prevalence_index(m: &ConfusionMatrix2x2) -> f64 {
    (m.a as i128 - m.d as i128) as f64 / m.n_f()
}

/// Cohen's kappa alongside the terms that separate it from PABAK.
///
/// The four quantities are tied together by the identity
/// `ck = (pabak - pi^2 + bi^2) / (1 - pi^2 + bi^2)`, so the distance between
/// `ck` and `pabak` is attributable to prevalence imbalance and rater bias.
/// The partial fields apply one correction at a time: `ck_bias_only` balances
/// only the disagreement cells (for unbiased raters it coincides with `ck`),
/// while `ck_prevalence_only` balances only the agreement cells (for unbiased
/// raters it coincides with `pabak`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaDecomposition {
    pub ck: f64,
    pub pabak: f64,
    pub bias_index: f64,
    pub prevalence_index: f64,
    /// `(pabak - pi^2) / (1 - pi^2)`; `None` when `1 - pi^2 <= 1e-12`.
    pub ck_bias_only: Option<f64>,
    /// `(pabak + bi^2) / (1 + bi^2)`.
    pub ck_prevalence_only: Option<f64>,
}

/// Computes kappa, PABAK, both indices and both partial corrections at once.
pub fn kappa_decomposition(m: &ConfusionMatrix2x2) -> KappaDecomposition {
    let pab = pabak(m);
    let bi = bias_index(m);
    let pi = prevalence_index(m);
    let bias_den = 1.0 - pi * pi;
    let prev_den = 1.0 + bi * bi;
    KappaDecomposition {
        ck: cohen_kappa(m),
        pabak: pab,
        bias_index: bi,
        prevalence_index: pi,
        ck_bias_only: (bias_den > DENOM_EPS).then(|| (pab - pi * pi) / bias_den),
        ck_prevalence_only: (prev_den > DENOM_EPS).then(|| (pab + bi * bi) / prev_den),
    }
}
