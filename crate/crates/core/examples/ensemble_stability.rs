//! How much pooled null degree distributions vary between independent
//! ensembles of a given size.
//!
//! ```text
//! cargo run --release --example ensemble_stability -- [repeats]
//! ```

use vgval::ensemble::{stability_diagnostic, EnsembleConfig};
use vgval::garch::presets::SP500;
use vgval::visibility::IvgMode;

fn main() -> vgval::Result<()> {
    let repeats = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let cfg = EnsembleConfig {
        size: 1,
        length: 500,
        sigma0: SP500.unconditional_variance()?.sqrt(),
        seed: 5,
        params: SP500,
        ivg_mode: IvgMode::Literal,
    };
    println!("{:>6} {:>14} {:>8}", "Z", "mean distance", "CV");
    for row in stability_diagnostic(&cfg, &[10, 100, 1000], repeats)? {
        println!(
            "{:>6} {:>14.3e} {:>7.1}%",
            row.ensemble_size,
            row.mean_distance,
            100.0 * row.coefficient_of_variation
        );
    }
    Ok(())
}
