//! Simulate a GJR-GARCH path from a reference parameter set and recover the
//! parameters by maximum likelihood.
//!
//! ```text
//! cargo run --release --example fit_garch -- [preset] [T] [seed]
//! ```

use std::time::Instant;

use vgval::garch::{fit, presets, simulate, FitOptions, NoiseKind};

fn main() -> vgval::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "merval".into());
    let length = args.next().and_then(|a| a.parse().ok()).unwrap_or(5000);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let truth = presets::by_name(&name)
        .ok_or_else(|| vgval::Error::InvalidParameter(format!("unknown preset {name}")))?;

    let (returns, _) = simulate(&truth, length, truth.unconditional_variance()?.sqrt(), seed)?;
    let t = Instant::now();
    let report = fit(&returns, NoiseKind::T, &FitOptions::default())?;
    println!("fit of {length} returns in {:.2?}", t.elapsed());

    report.write_table(std::io::stdout())?;
    println!(
        "persistence {:.4} (true {:.4}), log-likelihood {:.3}, hessian {:?}",
        report.params.persistence(),
        truth.persistence(),
        report.log_likelihood,
        report.hessian
    );
    let true_values = [
        truth.alpha0,
        truth.alpha1,
        truth.beta1,
        truth.gamma1,
        truth.noise.dof().unwrap_or(f64::INFINITY),
    ];
    for (e, v) in report.estimates.iter().zip(true_values) {
        let z = e.std_error.map(|s| (e.estimate - v) / s);
        println!("{:<8} true {v:<8} z {z:?}", e.name);
    }
    Ok(())
}
