//! Sliding-window indicator on a null volatility path with a
//! super-exponential segment grafted onto one window.
//!
//! ```text
//! cargo run --release --example indicator_bubble -- [Z] [seed]
//! ```

use vgval::garch::{presets::SP500, simulate};
use vgval::stats::rank_correlation;
use vgval::timeseries::VolatilityKind;
use vgval::timeseries::VolatilitySeries;
use vgval::validation::{NullModel, Runner, ValidationConfig};

fn main() -> vgval::Result<()> {
    let mut args = std::env::args().skip(1);
    let size = args.next().and_then(|a| a.parse().ok()).unwrap_or(1000);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let cfg = ValidationConfig {
        ensemble_size: size,
        seed,
        ..Default::default()
    };

    let sigma0 = SP500.unconditional_variance()?.sqrt();
    let (returns, vol) = simulate(&SP500, 3000, sigma0, seed)?;
    // window 20 replaced by y_start * exp(c * tau^2), a twentyfold rise
    let (start, len) = (20 * cfg.shift, cfg.window);
    let c = 20f64.ln() / (len as f64).powi(2);
    let mut y = vol.values().to_vec();
    let base = y[start];
    for tau in 0..len {
        y[start + tau] = base * (c * (tau * tau) as f64).exp();
    }
    let bubbled = VolatilitySeries::new(y, None, VolatilityKind::Conditional)?;

    let rhos = [0.05, 0.1, 0.2];
    let runner = Runner::new();
    let all = runner.run(Some(&bubbled), &returns, &cfg, &NullModel::Global(SP500), &rhos)?;
    println!("{:>6} {:>6} {:>6} {:>8} {:>8}", "end", "n", "n_bar", "V", "flags");
    for r in &all[1].records {
        println!("{:>6} {:>6} {:>6} {:>8.3} {:>8?}", r.end_index, r.n, r.n_bar, r.v, r.flags);
    }
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let na: Vec<f64> = all[a].n_series().iter().map(|&v| v as f64).collect();
        let nb: Vec<f64> = all[b].n_series().iter().map(|&v| v as f64).collect();
        println!("rank correlation rho {} vs {}: {:?}", rhos[a], rhos[b], rank_correlation(&na, &nb)?);
    }
    Ok(())
}
