//! Render two-group reliability curves from a small sweep as SVG.
//!
//! Run with `cargo run --example plot_curves`.

use reliagap::data::generate_synthetic;
use reliagap::experiment::{aggregate, gap_curves, preset_by_name, run_sweep, Statistic, SweepConfig};
use reliagap::report::{gap_curve_plot, gap_plot_name, save_svg};

fn main() -> reliagap::Result<()> {
    let ds = generate_synthetic(1000, 0.34, (0.5, 0.38), 21)?;
    let mut preset = preset_by_name("all-features")?;
    preset.sigma2_values = vec![1.0];
    let config = SweepConfig::new(preset, vec![0.0, 0.1, 0.2, 0.3], 3, 77);

    let outcome = run_sweep(&ds, &config, None)?;
    let curves = gap_curves(&aggregate(&outcome.cells));

    let out = std::env::temp_dir().join("reliagap-plot-example");
    std::fs::create_dir_all(&out)?;
    for curve in &curves {
        if !matches!(curve.statistic, Statistic::Ck | Statistic::Pabak | Statistic::IccA1) {
            continue;
        }
        let path = out.join(gap_plot_name(&curve.preset, curve.statistic, curve.sigma2));
        save_svg(&path, &gap_curve_plot(curve))?;
        println!("wrote {}", path.display());
        for point in &curve.points {
            if let Some(gap) = point.gap {
                println!("  p={:<5} group gap {gap:+.4}", point.p);
            }
        }
    }
    Ok(())
}
