//! Build a synthetic second rater by perturbing features, group by group.
//!
//! Run with `cargo run --example noise_raters`.

use reliagap::data::generate_synthetic;
use reliagap::noise::{perturb_dataset_logged, NoiseSpec};

fn main() -> reliagap::Result<()> {
    let ds = generate_synthetic(400, 0.34, (0.5, 0.38), 11)?;
    let spec = NoiseSpec {
        p: 0.2,
        sigma2: 1.0,
        perturb_categorical: true,
        perturb_numeric: true,
        apply_minima: true,
        seed: 99,
        group_stratified: true,
        iid_sampling: false,
    };
    let (perturbed, log) = perturb_dataset_logged(&ds, &spec)?;

    println!("perturbed {} rows at p={} (exact per-group counts):", ds.n_rows(), spec.p);
    for entry in &log {
        println!(
            "  column {:20} group {:?}: {} cells touched",
            entry.column, entry.group, entry.selected
        );
    }

    let changed = (0..ds.n_rows())
        .filter(|&r| (0..ds.n_features()).any(|c| ds.feature(r, c) != perturbed.feature(r, c)))
        .count();
    println!("rows with at least one changed cell: {changed}");

    let row = (0..ds.n_rows())
        .find(|&r| (0..ds.n_features()).any(|c| ds.feature(r, c) != perturbed.feature(r, c)))
        .expect("some row changed");
    println!("example row {row} before/after:");
    for (c, feature) in ds.schema().features.iter().enumerate() {
        let (a, b) = (ds.feature(row, c), perturbed.feature(row, c));
        let mark = if a != b { "  <- changed" } else { "" };
        println!("  {:20} {a:4} -> {b:4}{mark}", feature.name);
    }
    Ok(())
}
