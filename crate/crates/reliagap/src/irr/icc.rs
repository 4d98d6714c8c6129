//! Intraclass correlation for two raters scoring the same subjects.
//!
//! The scores form an `n x 2` table: subjects are random rows, the two raters
//! fixed columns, one score per cell. ICC(A,1) from the two-way analysis of
//! variance measures absolute agreement of single scores, so a constant offset
//! between the raters lowers it even when the subject ordering is preserved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-empty sequence of paired real-valued scores `(first, second)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedScores(Vec<(f64, f64)>);

impl PairedScores {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("paired scores must be non-empty"));
        }
        for (i, &(r, s)) in pairs.iter().enumerate() {
            if !r.is_finite() || !s.is_finite() {
                return Err(Error::invalid(format!("pair {i} is ({r}, {s}); scores must be finite")));
            }
        }
        Ok(PairedScores(pairs))
    }

    pub fn from_slices(first: &[f64], second: &[f64]) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::invalid(format!(
                "rater lengths differ: {} vs {}",
                first.len(),
                second.len()
            )));
        }
        PairedScores::new(first.iter().copied().zip(second.iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.0
    }
}

/// Mean squares of the two-way, single-score-per-cell analysis of variance.
///
/// `msr` carries variation between subjects (rows), `msc` variation between
/// raters (columns), `mse` the residual interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaMeanSquares {
    pub msr: f64,
    pub msc: f64,
    pub mse: f64,
    pub n_subjects: usize,
    pub k_raters: usize,
}

/// Decomposes an `n x 2` score table into its three mean squares.
///
/// Requires at least two subjects, otherwise the row degrees of freedom
/// vanish.
///
/// ```
/// use reliagap::irr::{anova_mean_squares, PairedScores};
///
/// let scores = PairedScores::from_slices(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0]).unwrap();
/// let ms = anova_mean_squares(&scores).unwrap();
/// approx::assert_abs_diff_eq!(ms.msr, 10.0 / 3.0, epsilon = 1e-12);
/// approx::assert_abs_diff_eq!(ms.msc, 2.0, epsilon = 1e-12);
/// approx::assert_abs_diff_eq!(ms.mse, 0.0, epsilon = 1e-12);
/// ```
pub fn anova_mean_squares(scores: &PairedScores) -> Result<AnovaMeanSquares> {
    let n = scores.len();
    if n < 2 {
        return Err(Error::invalid("analysis of variance requires at least two subjects"));
    }
    let nf = n as f64;

    let mean_first = scores.pairs().iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_second = scores.pairs().iter().map(|p| p.1).sum::<f64>() / nf;
    // Columns have equal size, so the grand mean is the mean of column means.
    // Written this way, identical columns give exact zeros for msc and mse.
    let grand = (mean_first + mean_second) / 2.0;

    let mut ssr = 0.0;
    let mut sse = 0.0;
    for &(r, s) in scores.pairs() {
        let row_mean = (r + s) / 2.0;
        ssr += (row_mean - grand) * (row_mean - grand);
        let res_first = (r - row_mean) - (mean_first - grand);
        let res_second = (s - row_mean) - (mean_second - grand);
        sse += res_first * res_first + res_second * res_second;
    }
    ssr *= 2.0;
    let d_first = mean_first - grand;
    let d_second = mean_second - grand;
    let ssc = nf * (d_first * d_first + d_second * d_second);

    Ok(AnovaMeanSquares {
        msr: ssr / (nf - 1.0),
        msc: ssc,
        mse: sse / (nf - 1.0),
        n_subjects: n,
        k_raters: 2,
    })
}

/// ICC(A,1): two-way absolute agreement of single scores.
///
/// `(msr - mse) / (msr + mse + (2 / n) * (msc - mse))` for two raters. When
/// the denominator vanishes, an all-constant table is defined as perfect
/// agreement (`Some(1.0)`); any other degenerate table is undefined (`None`).
/// The raw value is returned unclamped.
///
/// ```
/// use reliagap::irr::{icc_a1, PairedScores};
///
/// let scores = PairedScores::from_slices(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0]).unwrap();
/// approx::assert_abs_diff_eq!(icc_a1(&scores).unwrap().unwrap(), 10.0 / 13.0, epsilon = 1e-12);
/// ```
pub fn icc_a1(scores: &PairedScores) -> Result<Option<f64>> {
    let ms = anova_mean_squares(scores)?;
    let n = ms.n_subjects as f64;
    let denom = ms.msr + ms.mse + (2.0 / n) * (ms.msc - ms.mse);
    if denom.abs() < 1e-12 {
        let first = scores.pairs()[0].0;
        let constant = scores.pairs().iter().all(|&(r, s)| r == first && s == first);
        return Ok(if constant { Some(1.0) } else { None });
    }
    Ok(Some((ms.msr - ms.mse) / denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    /// Textbook double summation over the full table; sse by subtraction from
    /// the total sum of squares rather than from residuals.
    fn oracle_mean_squares(pairs: &[(f64, f64)]) -> (f64, f64, f64) {
        let n = pairs.len() as f64;
        let k = 2.0;
        let grand = pairs.iter().map(|&(r, s)| r + s).sum::<f64>() / (n * k);
        let ssr = k
            * pairs
                .iter()
                .map(|&(r, s)| {
                    let rm = (r + s) / 2.0;
                    (rm - grand).powi(2)
                })
                .sum::<f64>();
        let cm1 = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let cm2 = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let ssc = n * ((cm1 - grand).powi(2) + (cm2 - grand).powi(2));
        let sst = pairs
            .iter()
            .map(|&(r, s)| (r - grand).powi(2) + (s - grand).powi(2))
            .sum::<f64>();
        let sse = sst - ssr - ssc;
        (ssr / (n - 1.0), ssc / (k - 1.0), sse / ((n - 1.0) * (k - 1.0)))
    }

    fn oracle_icc(pairs: &[(f64, f64)]) -> f64 {
        let (msr, msc, mse) = oracle_mean_squares(pairs);
        let n = pairs.len() as f64;
        (msr - mse) / (msr + mse + (2.0 / n) * (msc - mse))
    }

    #[test]
    fn shifted_ramp_anchor() {
        let s = PairedScores::from_slices(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0]).unwrap();
        let ms = anova_mean_squares(&s).unwrap();
        assert_abs_diff_eq!(ms.msr, 10.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ms.msc, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ms.mse, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(icc_a1(&s).unwrap().unwrap(), 10.0 / 13.0, epsilon = 1e-12);
    }

    #[test]
    fn identical_nonconstant_columns_are_exactly_one() {
        let s = PairedScores::from_slices(&[0.2, 0.7, 0.4], &[0.2, 0.7, 0.4]).unwrap();
        let ms = anova_mean_squares(&s).unwrap();
        assert_eq!(ms.msc, 0.0);
        assert_eq!(ms.mse, 0.0);
        assert_eq!(icc_a1(&s).unwrap(), Some(1.0));
    }

    #[test]
    fn constant_table_is_defined_as_one() {
        let s = PairedScores::from_slices(&[0.5; 6], &[0.5; 6]).unwrap();
        assert_eq!(icc_a1(&s).unwrap(), Some(1.0));
    }

    #[test]
    fn crossed_two_subject_table_is_undefined() {
        // Row and column means coincide but the cells do not: denominator 0
        // with nonzero residual variation.
        let s = PairedScores::from_slices(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(icc_a1(&s).unwrap(), None);
    }

    #[test]
    fn constant_offset_yields_zero() {
        let s = PairedScores::from_slices(&[1.0; 5], &[3.0; 5]).unwrap();
        assert_eq!(icc_a1(&s).unwrap(), Some(0.0));
    }

    #[test]
    fn matches_double_summation_oracle_on_random_tables() {
        let mut rng = crate::seed::stream(23, "icc-oracle-test", &[]);
        for _ in 0..300 {
            let n = rng.gen_range(2..120);
            let pairs: Vec<(f64, f64)> = (0..n)
                .map(|i| {
                    let base = i as f64 * 0.05 + rng.gen_range(-2.0..2.0);
                    (base + rng.gen_range(-0.5..0.5), base + rng.gen_range(-0.5..0.5))
                })
                .collect();
            let s = PairedScores::new(pairs.clone()).unwrap();
            let ms = anova_mean_squares(&s).unwrap();
            let (msr, msc, mse) = oracle_mean_squares(&pairs);
            assert_abs_diff_eq!(ms.msr, msr, epsilon = 1e-9);
            assert_abs_diff_eq!(ms.msc, msc, epsilon = 1e-9);
            assert_abs_diff_eq!(ms.mse, mse, epsilon = 1e-9);
            assert_abs_diff_eq!(icc_a1(&s).unwrap().unwrap(), oracle_icc(&pairs), epsilon = 1e-10);
        }
    }

    #[test]
    fn single_subject_is_rejected() {
        let s = PairedScores::from_slices(&[1.0], &[2.0]).unwrap();
        assert!(anova_mean_squares(&s).is_err());
        assert!(icc_a1(&s).is_err());
    }
}
