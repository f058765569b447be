//! Fits the basis-function model to a simulated dataset and checks how well
//! the latent inputs are recovered.
//!
//! Run with `cargo run --release --example fit`.

use lvhsgp::cli::pipeline::{fit_dataset, FitOptions};
use lvhsgp::io::{read_dataset, write_simulated};
use lvhsgp::simgen::{self, ScenarioKind, ScenarioSpec};
use lvhsgp::SamplerConfig;

fn main() -> lvhsgp::Result<()> {
    let dir = std::env::temp_dir().join("lvhsgp-example-fit");
    write_simulated(&dir, &simgen::generate(&ScenarioSpec::new(ScenarioKind::GpSe, 20, 5, 3)?)?)?;
    let ds = read_dataset(&dir)?;

    let opts = FitOptions {
        sampler: SamplerConfig {
            seed: 3,
            ..SamplerConfig::default()
        },
        ..FitOptions::default()
    };
    let out = fit_dataset(&ds, &opts)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    println!("M = {:?}, max R-hat {:.4}", out.m_min, out.report.max_rhat().unwrap_or(f64::NAN));
    println!("{:<8} {:>8} {:>8} {:>8} {:>8}", "param", "truth", "mean", "sd", "x_tilde");
    let x_tilde = &ds.x_tilde;
    let mut noisy = 0.0;
    let mut post = 0.0;
    for (i, p) in out.report.params.iter().filter(|p| p.name.starts_with("x[")).enumerate() {
        let truth = p.truth.unwrap_or(f64::NAN);
        println!("{:<8} {truth:>8.3} {:>8.3} {:>8.3} {:>8.3}", p.name, p.mean, p.sd, x_tilde[i]);
        noisy += (x_tilde[i] - truth).powi(2);
        post += (p.mean - truth).powi(2);
    }
    let n = ds.n() as f64;
    println!("RMSE of x_tilde {:.3}, of posterior mean {:.3}", (noisy / n).sqrt(), (post / n).sqrt());
    Ok(())
}
