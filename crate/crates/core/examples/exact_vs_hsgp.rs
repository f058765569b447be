//! Fits the same dataset with the exact GP and with the basis approximation,
//! then compares latent-input posteriors and run time.
//!
//! Run with `cargo run --release --example exact_vs_hsgp`. The exact fit
//! takes a few minutes.

use std::time::Instant;

use lvhsgp::cli::pipeline::{fit_dataset, FitOptions, FitOutcome};
use lvhsgp::io::{read_dataset, write_simulated};
use lvhsgp::simgen::{self, ScenarioKind, ScenarioSpec};
use lvhsgp::SamplerConfig;

fn timed(ds: &lvhsgp::io::Dataset, opts: &FitOptions) -> lvhsgp::Result<(FitOutcome, f64)> {
    let start = Instant::now();
    let out = fit_dataset(ds, opts)?;
    Ok((out, start.elapsed().as_secs_f64()))
}

fn main() -> lvhsgp::Result<()> {
    let dir = std::env::temp_dir().join("lvhsgp-example-exact");
    write_simulated(&dir, &simgen::generate(&ScenarioSpec::new(ScenarioKind::GpSe, 20, 5, 8)?)?)?;
    let ds = read_dataset(&dir)?;
    let sampler = SamplerConfig {
        seed: 8,
        ..SamplerConfig::default()
    };
    let (hsgp, t_hsgp) = timed(&ds, &FitOptions { m: Some(30), sampler: sampler.clone(), ..FitOptions::default() })?;
    let (exact, t_exact) = timed(&ds, &FitOptions { exact: true, sampler, ..FitOptions::default() })?;

    println!("{:<7} {:>8} {:>14} {:>14}", "param", "truth", "hsgp mean", "exact mean(sd)");
    let mut within = 0;
    for p in exact.report.params.iter().filter(|p| p.name.starts_with("x[")) {
        let h = hsgp.report.get(&p.name).expect("same parameters");
        if (h.mean - p.mean).abs() < p.sd {
            within += 1;
        }
        println!("{:<7} {:>8.3} {:>14.3} {:>8.3}({:.3})", p.name, p.truth.unwrap_or(f64::NAN), h.mean, p.mean, p.sd);
    }
    println!("{within}/{} HSGP means lie within one exact posterior SD", ds.n());
    println!("wall clock: HSGP {t_hsgp:.1}s, exact {t_exact:.1}s");
    Ok(())
}
