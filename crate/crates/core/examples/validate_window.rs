//! Validate the links of one volatility window against its null ensemble
//! at several thresholds.

use vgval::ensemble::{generate_frequencies, EnsembleConfig};
use vgval::garch::{presets::SP500, simulate};
use vgval::timeseries::sample_std;
use vgval::validation::{quantize_sigma0, validate_links, validated_visibility};
use vgval::visibility::{degrees, ivg_build, vg_build, IvgMode};

fn main() -> vgval::Result<()> {
    let window = 500;
    let (returns, vol) = simulate(&SP500, window, SP500.unconditional_variance()?.sqrt(), 21)?;
    let sigma0 = quantize_sigma0(sample_std(returns.values()).unwrap_or(1.0));
    let freq = generate_frequencies(&EnsembleConfig {
        size: 3000,
        length: window,
        sigma0,
        seed: 1,
        params: SP500,
        ivg_mode: IvgMode::Literal,
    })?;

    let vg = vg_build(vol.values())?;
    let ivg = ivg_build(vol.values(), IvgMode::Literal)?;
    let (d, d_bar) = (degrees(&vg).mean, degrees(&ivg).mean);
    println!("VG {} edges (mean degree {d:.2}), IVG {} edges (mean degree {d_bar:.2})", vg.edge_count(), ivg.edge_count());
    println!("{:>6} {:>7} {:>7} {:>7}", "rho", "n", "n_bar", "V");
    for rho in [0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
        let n = validate_links(&vg, &freq, rho)?.count();
        let n_bar = validate_links(&ivg, &freq, rho)?.count();
        println!("{rho:>6} {n:>7} {n_bar:>7} {:>7.3}", validated_visibility(n, d, n_bar, d_bar)?);
    }
    Ok(())
}
