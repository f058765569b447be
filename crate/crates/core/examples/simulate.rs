//! Generates one dataset per benchmark scenario and prints its ground truth.
//!
//! Run with `cargo run --release --example simulate`.

use lvhsgp::simgen::{self, ScenarioKind, ScenarioSpec};

fn main() -> lvhsgp::Result<()> {
    for kind in ScenarioKind::ALL {
        let spec = ScenarioSpec::new(kind, 20, 3, 42)?;
        let ds = simgen::generate(&spec)?;
        let err: f64 = ds.x_tilde.iter().zip(&ds.x_true).map(|(a, b)| (a - b).abs()).sum::<f64>() / spec.n as f64;
        println!("{} (N={}, D={})", kind.tag(), spec.n, spec.d);
        println!("  rho   {:?}", rounded(&ds.rho));
        println!("  alpha {:?}", rounded(&ds.alpha));
        println!("  sigma {:?}", rounded(&ds.sigma));
        println!("  C[2,1] = {:.3}, mean |x_tilde - x| = {err:.3}", ds.c_true[(1, 0)]);
    }

    // A written dataset can be read back by the command line tools.
    let dir = std::env::temp_dir().join("lvhsgp-example-simulate");
    let ds = simgen::generate(&ScenarioSpec::new(ScenarioKind::GpSe, 50, 5, 1)?)?;
    lvhsgp::io::write_simulated(&dir, &ds)?;
    println!("\nwrote {}", dir.display());
    Ok(())
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}
