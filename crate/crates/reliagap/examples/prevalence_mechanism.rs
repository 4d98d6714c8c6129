//! Why two groups with the same raw agreement can get different kappas.
//!
//! Both tables below have observed agreement 0.8 and no rater bias; they
//! differ only in how lopsided the verdict distribution is. PABAK ignores
//! that imbalance, Cohen's kappa does not — so the kappas split while the
//! PABAKs tie.
//!
//! Run with `cargo run --example prevalence_mechanism`.

use reliagap::irr::{kappa_decomposition, ConfusionMatrix2x2};

fn report(label: &str, matrix: &ConfusionMatrix2x2) {
    let d = kappa_decomposition(matrix);
    println!(
        "{label}: ck={:.4} pabak={:.4} bi={:.4} pi={:.4}",
        d.ck, d.pabak, d.bias_index, d.prevalence_index
    );
    if let (Some(bias_only), Some(prev_only)) = (d.ck_bias_only, d.ck_prevalence_only) {
        println!("          bias-corrected={bias_only:.4} prevalence-corrected={prev_only:.4}");
    }
}

fn main() -> reliagap::Result<()> {
    let balanced = ConfusionMatrix2x2::new(40, 10, 10, 40)?;
    let lopsided = ConfusionMatrix2x2::new(70, 10, 10, 10)?;

    report("balanced verdicts ", &balanced);
    report("lopsided verdicts ", &lopsided);

    println!();
    println!("Same observed agreement (0.8), same PABAK, different Cohen's kappa:");
    println!("chance correction punishes the lopsided table via its prevalence index.");
    Ok(())
}
