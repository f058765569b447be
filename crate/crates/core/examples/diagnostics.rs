//! Convergence diagnostics on synthetic chains with known behaviour.
//!
//! Run with `cargo run --release --example diagnostics`.

use lvhsgp::diagnostics::{ess_bulk, ess_tail, split_rhat, summarize};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn ar1(n: usize, phi: f64, offset: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (1.0 - phi * phi).sqrt();
    let mut x: f64 = StandardNormal.sample(&mut rng);
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x = phi * x + scale * e;
            x + offset
        })
        .collect()
}

fn main() {
    let cases = [
        ("iid", vec![ar1(1000, 0.0, 0.0, 1), ar1(1000, 0.0, 0.0, 2)]),
        ("AR(1) 0.9", vec![ar1(1000, 0.9, 0.0, 3), ar1(1000, 0.9, 0.0, 4)]),
        ("antithetic", vec![ar1(1000, -0.5, 0.0, 5), ar1(1000, -0.5, 0.0, 6)]),
        ("stuck chain", vec![ar1(1000, 0.5, 0.0, 7), ar1(1000, 0.5, 2.0, 8)]),
    ];
    println!("{:<12} {:>8} {:>10} {:>10}", "chains", "R-hat", "bulk ESS", "tail ESS");
    for (name, chains) in &cases {
        let f = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.3}"));
        println!(
            "{name:<12} {:>8} {:>10} {:>10}",
            f(split_rhat(chains)),
            f(ess_bulk(chains).map(f64::round)),
            f(ess_tail(chains).map(f64::round))
        );
    }
    let s = summarize("theta", &cases[0].1, Some(0.0));
    println!(
        "\nsummary of the iid draws against truth 0: mean {:.3}, 90% interval [{:.3}, {:.3}], RMSE {:.3}",
        s.mean,
        s.q5,
        s.q95,
        s.rmse.unwrap()
    );
}
