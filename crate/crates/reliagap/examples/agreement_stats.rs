//! Score a pair of binary raters: confusion tally, agreement, kappa family.
//!
//! Run with `cargo run --example agreement_stats`.

use reliagap::irr::{
    chance_agreement, confusion_from_pairs, kappa_decomposition, observed_agreement, PairedBinary,
};

fn main() -> reliagap::Result<()> {
    // Two raters judging the same 12 subjects.
    let first = [1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0];
    let second = [1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 1];
    let ratings = PairedBinary::from_slices(&first, &second)?;
    let matrix = confusion_from_pairs(&ratings);

    println!("confusion tally: a={} b={} c={} d={}", matrix.a, matrix.b, matrix.c, matrix.d);
    println!("observed agreement p_o = {:.4}", observed_agreement(&matrix));
    println!("chance agreement  p_c = {:.4}", chance_agreement(&matrix));

    let d = kappa_decomposition(&matrix);
    println!("cohen's kappa        = {:.4}", d.ck);
    println!("pabak                = {:.4}", d.pabak);
    println!("bias index           = {:.4}", d.bias_index);
    println!("prevalence index     = {:.4}", d.prevalence_index);
    match (d.ck_bias_only, d.ck_prevalence_only) {
        (Some(b), Some(p)) => {
            println!("bias-corrected only  = {b:.4}");
            println!("prevalence-corrected = {p:.4}");
        }
        _ => println!("partial corrections undefined for this table"),
    }
    Ok(())
}
