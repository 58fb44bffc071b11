//! Link frequencies of a GJR-GARCH null ensemble and their distance profile.
//!
//! ```text
//! cargo run --release --example null_ensemble -- [Z] [W]
//! ```

use std::time::Instant;

use vgval::ensemble::{distance_profile, generate_frequencies, homogeneity, EnsembleConfig};
use vgval::garch::presets::SP500;
use vgval::visibility::{GraphKind, IvgMode};

fn main() -> vgval::Result<()> {
    let mut args = std::env::args().skip(1);
    let size = args.next().and_then(|a| a.parse().ok()).unwrap_or(3000);
    let length = args.next().and_then(|a| a.parse().ok()).unwrap_or(500);
    let cfg = EnsembleConfig {
        size,
        length,
        sigma0: SP500.unconditional_variance()?.sqrt(),
        seed: 1,
        params: SP500,
        ivg_mode: IvgMode::Literal,
    };

    let t = Instant::now();
    let freq = generate_frequencies(&cfg)?;
    println!("{size} null graphs of length {length} in {:.2?}", t.elapsed());

    let vg = distance_profile(&freq, GraphKind::Vg);
    let ivg = distance_profile(&freq, GraphKind::Ivg);
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "d", "p_vg", "sd_vg", "p_ivg", "sd_ivg");
    for d in [1, 2, 3, 5, 10, 20, 50, 100, 200, 400] {
        if let (Some((m, s)), Some((mi, si))) = (vg.at(d), ivg.at(d)) {
            println!("{d:>5} {m:>10.4} {s:>10.4} {mi:>10.4} {si:>10.4}");
        }
    }
    let cross = (1..length).find(|&d| vg.mean[d - 1] <= 0.1);
    println!("VG frequency first reaches 0.1 at d = {cross:?}");

    for d in [5, 50, 200] {
        if d < length {
            let h = homogeneity(&freq, GraphKind::Vg, d, 4.0)?;
            println!(
                "d = {d}: {} of {} pairs beyond 4 binomial errors ({:.2}%)",
                h.outside,
                h.pairs,
                100.0 * h.fraction_outside()
            );
        }
    }
    Ok(())
}
