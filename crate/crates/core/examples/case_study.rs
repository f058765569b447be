//! Pseudotime-style case study: ingest an expression table through the
//! command line, then fit it with the case-study priors.
//!
//! Run with `cargo run --release --example case_study`.

use lvhsgp::cli::pipeline::{fit_dataset, FitOptions};
use lvhsgp::io::read_dataset;
use lvhsgp::SamplerConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("lvhsgp-example-case-study");
    std::fs::create_dir_all(&dir)?;
    let table = dir.join("cells.csv");

    // 60 cells measured at hours 0..72, four genes with smooth trends.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise = Normal::new(0.0, 0.2).expect("valid SD");
    let mut text = String::from("time,up,down,peak,flat\n");
    for i in 0..60 {
        let t = 72.0 * i as f64 / 59.0;
        let u = t / 72.0;
        let genes = [2.0 * u, 1.0 - 1.5 * u, (std::f64::consts::PI * u).sin(), 0.3];
        text.push_str(&t.to_string());
        for g in genes {
            text.push_str(&format!(",{}", g + noise.sample(&mut rng)));
        }
        text.push('\n');
    }
    std::fs::write(&table, text)?;

    let out_dir = dir.join("dataset");
    let argv = ["lvhsgp", "ingest", "--input", table.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
    let code = lvhsgp::cli::main_with_args(argv);
    if code != std::process::ExitCode::SUCCESS {
        return Err("ingest failed".into());
    }

    let ds = read_dataset(&out_dir)?;
    let opts = FitOptions {
        sampler: SamplerConfig {
            seed: 4,
            ..SamplerConfig::default()
        },
        ..FitOptions::default()
    };
    let fit = fit_dataset(&ds, &opts)?;
    println!("priors {:?}, M = {:?}", fit.preset, fit.m_min);
    println!("{:>6} {:>9} {:>9} {:>7}", "cell", "x_tilde", "x mean", "x sd");
    for (i, p) in fit.report.params.iter().filter(|p| p.name.starts_with("x[")).enumerate().step_by(6) {
        println!("{:>6} {:>9.3} {:>9.3} {:>7.3}", i + 1, ds.x_tilde[i], p.mean, p.sd);
    }
    Ok(())
}
