//! Inter-rater reliability statistics for two raters judging the same subjects.

mod icc;
mod kappa;

pub use icc::{anova_mean_squares, icc_a1, AnovaMeanSquares, PairedScores};
pub use kappa::{
    bias_index, chance_agreement, cohen_kappa, confusion_from_pairs, kappa_decomposition,
    observed_agreement, pabak, prevalence_index, ConfusionMatrix2x2, KappaDecomposition,
    PairedBinary, DENOM_EPS,
};
