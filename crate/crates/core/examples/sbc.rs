//! Simulation-based calibration: the conjugate self-test, a deliberately
//! miscalibrated variant and a short run on the latent GP model.
//!
//! Run with `cargo run --release --example sbc`.

use lvhsgp::sbc::{run_sbc, ConjugateMode, ConjugateNormal, LatentGpSbc, SbcConfig, SbcOutcome};
use lvhsgp::simgen::{ScenarioKind, ScenarioSpec};
use lvhsgp::{KernelFamily, SamplerConfig};

fn show(label: &str, out: &SbcOutcome) {
    println!("{label}");
    for g in &out.gamma {
        if let Some(s) = g.score {
            println!("  {:<10} log gamma {:>8.3}  threshold {:>7.3}  pass {}", g.name, s.log_gamma, s.threshold, s.pass);
        }
    }
}

fn main() -> lvhsgp::Result<()> {
    let config = SbcConfig {
        trials: 200,
        ..SbcConfig::default()
    };
    let exact = ConjugateNormal::new(ConjugateMode::Exact { draws: 1000 });
    show("conjugate model, exact posterior draws", &run_sbc(&exact, &config)?);
    let narrow = ConjugateNormal { sd_scale: 0.5, ..exact };
    show("conjugate model, posterior SD halved", &run_sbc(&narrow, &config)?);

    let sampler = SamplerConfig {
        iterations: 600,
        warmup: 300,
        ..SamplerConfig::default()
    };
    let problem = LatentGpSbc::hsgp(
        ScenarioSpec::new(ScenarioKind::GpSe, 10, 2, 0)?,
        KernelFamily::SquaredExponential,
        sampler,
    )?;
    let out = run_sbc(
        &problem,
        &SbcConfig {
            trials: 10,
            ..SbcConfig::default()
        },
    )?;
    println!(
        "latent GP, 10 trials: {:.0}% of latent inputs pass ({} unconverged trials)",
        100.0 * out.pass_fraction(|n| n.starts_with("x[")),
        out.unconverged_trials.len()
    );
    Ok(())
}
