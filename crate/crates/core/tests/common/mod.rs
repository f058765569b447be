//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::path::Path;

use lvhsgp::basis::BasisConfig;
use lvhsgp::priors::{NormalPrior, PriorSet, TruncatedNormal};
use lvhsgp::sampler::LogDensity;
use lvhsgp::{JointModel, KernelFamily, Matrix, ModelSpec, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// One row of the frozen Fourier-transform table.
#[derive(Debug, Clone, Copy)]
pub struct FourierCase {
    pub family: KernelFamily,
    pub rho: f64,
    pub alpha: f64,
    pub omega: f64,
    pub value: f64,
}

/// `2 * int_0^inf k(r) cos(omega r) dr`, computed offline with
/// arbitrary-precision quadrature for 20 random `(rho, alpha)` per family.
pub fn fourier_cases() -> Vec<FourierCase> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/fourier_oracle.csv");
    let mut reader = csv::Reader::from_path(&path).expect("oracle table");
    reader
        .records()
        .map(|r| {
            let r = r.expect("oracle row");
            let f = |i: usize| r[i].parse::<f64>().expect("number");
            FourierCase {
                family: r[0].parse().expect("family"),
                rho: f(1),
                alpha: f(2),
                omega: f(3),
                value: f(4),
            }
        })
        .collect()
}

/// Central differences of `f` at `q`, step `h` per coordinate.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, q: &[f64], h: f64) -> Vec<f64> {
    let mut p = q.to_vec();
    (0..q.len())
        .map(|k| {
            p[k] = q[k] + h;
            let up = f(&p);
            p[k] = q[k] - h;
            let down = f(&p);
            p[k] = q[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest violation of `|a - b| <= max(rel * |b|, abs)`, as a ratio to the
/// allowance; values at most 1 pass.
pub fn worst_ratio(a: &[f64], b: &[f64], rel: f64, abs: f64) -> (usize, f64) {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (rel * y.abs()).max(abs))
        .enumerate()
        .fold((0, 0.0), |best, (k, r)| if r > best.1 { (k, r) } else { best })
}

/// A random model instance for gradient checks: `n` inputs on `[0, 10]`,
/// random outputs and priors near the simulation presets.
pub fn random_model(family: KernelFamily, n: usize, d: usize, m: Option<usize>, seed: u64) -> JointModel {
    let mut r = rng(seed);
    let x_tilde: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * 10.0 / n as f64 + 0.2 * normal(&mut r)).collect();
    let variant = match m {
        Some(m) => Variant::Hsgp(BasisConfig::from_inputs(&x_tilde, m, 1.25).expect("basis")),
        None => Variant::Exact,
    };
    let priors = PriorSet::new(
        TruncatedNormal::new(1.0, 0.3).unwrap(),
        TruncatedNormal::new(2.0, 0.5).unwrap(),
        TruncatedNormal::new(1.0, 0.3).unwrap(),
        NormalPrior::new(0.0, 5.0).unwrap(),
        1.5,
    )
    .unwrap();
    let spec = ModelSpec::new(family, d, variant, priors, x_tilde, 0.3).expect("spec");
    let y = Matrix::from_fn(n, d, |_, _| 2.0 * normal(&mut r));
    JointModel::new(spec, y).expect("model")
}

/// A random unconstrained point in the bulk of the prior.
pub fn random_point(model: &JointModel, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let lay = model.layout();
    let mut q = model.initial_position();
    for k in lay.x() {
        q[k] += 0.3 * normal(&mut r);
    }
    for k in lay.log_rho().chain(lay.log_alpha()).chain(lay.log_sigma()) {
        q[k] += 0.2 * normal(&mut r);
    }
    for k in lay.mu().chain(lay.beta()) {
        q[k] = normal(&mut r);
    }
    for k in lay.corr() {
        q[k] = 0.7 * normal(&mut r);
    }
    q
}

/// Checks the analytic gradient against central differences with `h = 1e-5`
/// at max(1e-5 relative, 1e-7 absolute). Returns the worst ratio.
pub fn gradient_check(model: &JointModel, q: &[f64]) -> f64 {
    let mut g = vec![0.0; model.dim()];
    let lp = model.log_density_and_gradient(q, &mut g);
    assert!(lp.is_finite(), "log density not finite at the test point");
    let fd = finite_difference(|p| model.log_joint(p), q, 1e-5);
    worst_ratio(&g, &fd, 1e-5, 1e-7).1
}

/// Kolmogorov-Smirnov statistic of `draws` against the standard normal CDF.
pub fn ks_statistic_normal(draws: &[f64]) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let n01 = Normal::standard();
    let mut v = draws.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = n01.cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov critical value at level 0.01 for sample size `n`.
pub fn ks_critical_01(n: usize) -> f64 {
    1.627_620_4 / (n as f64).sqrt()
}

/// Upper `1 - level` quantile of the chi-square distribution.
pub fn chi2_critical(df: usize, level: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - level)
}

/// Pearson chi-square statistic of counts against equal expected counts.
pub fn chi2_uniform(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

/// Lag-1 autocorrelation.
pub fn lag1(v: &[f64]) -> f64 {
    let m = mean(v);
    let c0: f64 = v.iter().map(|x| (x - m).powi(2)).sum();
    let c1: f64 = v.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    c1 / c0
}

/// Zero-mean Gaussian target with a dense precision matrix.
pub struct Gaussian {
    pub precision: Vec<Vec<f64>>,
}

impl Gaussian {
    pub fn standard(dim: usize) -> Self {
        Self {
            precision: (0..dim).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
        }
    }

    /// Bivariate with unit variances and correlation `r`.
    pub fn correlated(r: f64) -> Self {
        let det = 1.0 - r * r;
        Self {
            precision: vec![vec![1.0 / det, -r / det], vec![-r / det, 1.0 / det]],
        }
    }
}

impl LogDensity for Gaussian {
    fn dim(&self) -> usize {
        self.precision.len()
    }

    fn log_density_and_gradient(&self, q: &[f64], g: &mut [f64]) -> f64 {
        let mut lp = 0.0;
        for (i, row) in self.precision.iter().enumerate() {
            let pq: f64 = row.iter().zip(q).map(|(a, b)| a * b).sum();
            g[i] = -pq;
            lp -= 0.5 * q[i] * pq;
        }
        lp
    }
}

/// SHA-256 over every file under `dir` (sorted by name), skipping the
/// manifest's wall-clock lines.
pub fn dir_digest(dir: &Path) -> String {
    use sha2::{Digest, Sha256};
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .expect("output directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.is_file())
        .collect();
    names.sort();
    let mut h = Sha256::new();
    for path in names {
        let bytes = std::fs::read(&path).expect("readable output");
        h.update(path.file_name().unwrap().to_string_lossy().as_bytes());
        if path.file_name().is_some_and(|n| n == lvhsgp::io::MANIFEST) {
            for line in String::from_utf8_lossy(&bytes).lines() {
                if !line.starts_with("started_unix") && !line.starts_with("finished_unix") {
                    h.update(line.as_bytes());
                }
            }
        } else {
            h.update(&bytes);
        }
    }
    format!("{:x}", h.finalize())
}
