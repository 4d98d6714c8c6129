//! Continuous-score agreement via a two-way ANOVA and ICC(A,1).
//!
//! Run with `cargo run --example icc_scores`.

use reliagap::irr::{anova_mean_squares, icc_a1, PairedScores};

fn show(label: &str, pairs: Vec<(f64, f64)>) -> reliagap::Result<()> {
    let scores = PairedScores::new(pairs)?;
    let anova = anova_mean_squares(&scores)?;
    println!("{label}");
    println!("  msr={:.4} msc={:.4} mse={:.4}", anova.msr, anova.msc, anova.mse);
    match icc_a1(&scores)? {
        Some(icc) => println!("  icc(a,1) = {icc:.4}"),
        None => println!("  icc(a,1) undefined (no variance to attribute)"),
    }
    Ok(())
}

fn main() -> reliagap::Result<()> {
    // Identical raters: all variance is between subjects.
    show("identical raters", vec![(0.2, 0.2), (0.5, 0.5), (0.8, 0.8), (0.9, 0.9)])?;

    // A constant offset between raters lowers absolute agreement even
    // though the ranking is untouched.
    show("constant offset", vec![(0.2, 0.3), (0.5, 0.6), (0.8, 0.9), (0.85, 0.95)])?;

    // Unstructured disagreement: residual error instead of a rater effect.
    show("noisy second rater", vec![(0.2, 0.26), (0.5, 0.45), (0.8, 0.86), (0.85, 0.8)])?;
    Ok(())
}
