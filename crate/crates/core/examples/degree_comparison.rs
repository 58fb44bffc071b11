//! Rank-sum comparison of a series' VG degrees with those of its null model.

use vgval::ensemble::{compare_with_null, null_degree_distribution, EnsembleConfig};
use vgval::garch::{fit, presets::MERVAL, simulate, FitOptions, NoiseKind};
use vgval::timeseries::historical_volatility;
use vgval::validation::quantize_sigma0;
use vgval::visibility::{degree_histogram, degrees, vg_build, IvgMode};

fn main() -> vgval::Result<()> {
    let (returns, _) = simulate(&MERVAL, 2500, MERVAL.unconditional_variance()?.sqrt(), 9)?;
    let report = fit(&returns, NoiseKind::T, &FitOptions::default())?;
    let vol = vgval::garch::filter(&report.params, &returns, report.sigma0)?;
    let empirical = degree_histogram(&degrees(&vg_build(vol.values())?).per_node)?;

    let cfg = EnsembleConfig {
        size: 100,
        length: vol.len(),
        sigma0: quantize_sigma0(historical_volatility(&returns, returns.len())?),
        seed: 2,
        params: report.params,
        ivg_mode: IvgMode::Literal,
    };
    let null = null_degree_distribution(&cfg, cfg.size)?;
    let test = compare_with_null(&empirical, &null)?;
    println!("mean degree: series {:.3}, null {:.3}", empirical.mean(), null.mean());
    println!("rank-sum U = {}, p = {:.4} ({:?})", test.statistic, test.p_value, test.method);
    Ok(())
}
