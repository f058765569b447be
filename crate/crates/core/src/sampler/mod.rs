//! Adaptive Hamiltonian Monte Carlo: multinomial NUTS with dual-averaging
//! step size and a windowed diagonal metric.

pub mod adapt;
pub mod nuts;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use adapt::{DualAveraging, WindowedAdaptation};
pub use nuts::{leapfrog, transition, PhasePoint, TransitionStats, MAX_DELTA_H};

/// A differentiable log-density on an unconstrained space.
///
/// Implementations are evaluated from several chains at once, so they must
/// not rely on interior mutability.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;

    /// Writes the gradient into `gradient` and returns the log-density.
    /// Returns `-inf` outside the support.
    fn log_density_and_gradient(&self, position: &[f64], gradient: &mut [f64]) -> f64;

    fn param_names(&self) -> Vec<String> {
        (1..=self.dim()).map(|i| format!("theta[{i}]")).collect()
    }

    /// Maps an unconstrained position to the values stored as a draw.
    fn constrain_draw(&self, position: &[f64]) -> Vec<f64> {
        position.to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Total iterations per chain, warmup included.
    pub iterations: usize,
    pub warmup: usize,
    pub chains: usize,
    pub target_accept: f64,
    pub max_depth: usize,
    pub seed: u64,
    pub initial_step: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 2000,
            warmup: 1000,
            chains: 1,
            target_accept: 0.8,
            max_depth: 10,
            seed: 1,
            initial_step: 1.0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.warmup >= self.iterations {
            return Err(Error::Domain(format!(
                "warmup ({}) must be smaller than iterations ({})",
                self.warmup, self.iterations
            )));
        }
        if self.chains == 0 {
            return Err(Error::Domain("at least one chain is required".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::Domain(format!("target acceptance must lie in (0, 1), got {}", self.target_accept)));
        }
        if self.max_depth == 0 {
            return Err(Error::Domain("max tree depth must be at least 1".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::Domain("initial step size must be positive".into()));
        }
        Ok(())
    }

    pub fn num_draws(&self) -> usize {
        self.iterations - self.warmup
    }
}

/// Per-draw sampler statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrawStats {
    pub divergent: bool,
    pub tree_depth: usize,
    pub n_leapfrog: usize,
    pub step_size: f64,
    pub energy: f64,
    pub accept_stat: f64,
    pub log_density: f64,
}

/// Retained draws of one chain on the constrained scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub chain: usize,
    pub names: Vec<String>,
    /// One row per retained iteration.
    pub draws: Vec<Vec<f64>>,
    pub stats: Vec<DrawStats>,
    pub step_size: f64,
    pub inv_metric: Vec<f64>,
    pub warmup_divergences: usize,
}

impl ChainDraws {
    pub fn num_draws(&self) -> usize {
        self.draws.len()
    }

    pub fn divergences(&self) -> usize {
        self.stats.iter().filter(|s| s.divergent).count()
    }

    /// Draws of parameter `k` in iteration order.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.draws.iter().map(|r| r[k]).collect()
    }

    pub fn mean_accept_stat(&self) -> f64 {
        self.stats.iter().map(|s| s.accept_stat).sum::<f64>() / self.stats.len().max(1) as f64
    }
}

/// Draws of parameter `k` from every chain.
pub fn parameter_chains(chains: &[ChainDraws], k: usize) -> Vec<Vec<f64>> {
    chains.iter().map(|c| c.column(k)).collect()
}

fn init_step_size<M: LogDensity + ?Sized>(
    model: &M,
    z: &PhasePoint,
    mut step: f64,
    inv_metric: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    if step == 0.0 || step > 1e7 || step.is_nan() {
        return Ok(step);
    }
    let threshold = 0.8f64.ln();
    let trial = |step: f64, rng: &mut ChaCha8Rng| {
        let mut w = z.clone();
        w.resample_momentum(rng, inv_metric);
        let h0 = w.hamiltonian(inv_metric);
        leapfrog(model, &mut w, step, inv_metric);
        h0 - w.hamiltonian(inv_metric)
    };
    let direction = if trial(step, rng) > threshold { 1 } else { -1 };
    loop {
        let delta = trial(step, rng);
        if direction == 1 && !(delta > threshold) {
            break;
        }
        if direction == -1 && !(delta < threshold) {
            break;
        }
        step = if direction == 1 { 2.0 * step } else { 0.5 * step };
        if step > 1e7 {
            return Err(Error::Sampler("step size heuristic diverged to a huge value; posterior may be improper".into()));
        }
        if step == 0.0 {
            return Err(Error::Sampler("step size heuristic collapsed to zero; log-density may be non-smooth".into()));
        }
    }
    Ok(step)
}

/// Runs chain `chain` from `init` (unconstrained).
pub fn sample_chain<M: LogDensity + ?Sized>(
    model: &M,
    config: &SamplerConfig,
    init: &[f64],
    chain: usize,
) -> Result<ChainDraws> {
    config.validate()?;
    let dim = model.dim();
    if init.len() != dim {
        return Err(Error::Shape(format!("initial point has length {}, expected {dim}", init.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chain as u64);

    let mut z = PhasePoint::new(model, init.to_vec());
    if !z.log_density.is_finite() || z.gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::Sampler(format!(
            "initial point has non-finite log-density or gradient (log p = {})",
            z.log_density
        )));
    }
    let mut inv_metric = vec![1.0; dim];
    let mut step = init_step_size(model, &z, config.initial_step, &inv_metric, &mut rng)?;
    let mut dual = DualAveraging::new(config.target_accept);
    dual.restart(step);
    let mut windows = WindowedAdaptation::new(dim, config.warmup);

    let mut warmup_divergences = 0;
    for _ in 0..config.warmup {
        let s = transition(model, &mut z, step, &inv_metric, config.max_depth, &mut rng);
        if s.divergent {
            warmup_divergences += 1;
        }
        step = dual.learn(s.accept_stat);
        if windows.learn(&mut inv_metric, &z.position) {
            step = init_step_size(model, &z, step, &inv_metric, &mut rng)?;
            dual.restart(step);
        }
    }
    if config.warmup > 0 {
        if warmup_divergences == config.warmup {
            return Err(Error::Sampler(format!(
                "chain {chain}: all {} warmup iterations diverged (final step size {step:.3e}); \
                 check priors, data scaling and boundary settings",
                config.warmup
            )));
        }
        step = dual.final_step();
    }

    let n = config.num_draws();
    let mut draws = Vec::with_capacity(n);
    let mut stats = Vec::with_capacity(n);
    for it in 0..n {
        let s = transition(model, &mut z, step, &inv_metric, config.max_depth, &mut rng);
        let row = model.constrain_draw(&z.position);
        if let Some(k) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "chain {chain}: non-finite constrained value for parameter {} at draw {}",
                k + 1,
                it + 1
            )));
        }
        draws.push(row);
        stats.push(DrawStats {
            divergent: s.divergent,
            tree_depth: s.tree_depth,
            n_leapfrog: s.n_leapfrog,
            step_size: step,
            energy: s.energy,
            accept_stat: s.accept_stat,
            log_density: z.log_density,
        });
    }
    Ok(ChainDraws {
        chain,
        names: model.param_names(),
        draws,
        stats,
        step_size: step,
        inv_metric,
        warmup_divergences,
    })
}

/// Runs `config.chains` chains concurrently, each on its own generator
/// stream of `config.seed`.
pub fn sample<M: LogDensity + ?Sized>(model: &M, config: &SamplerConfig, init: &[f64]) -> Result<Vec<ChainDraws>> {
    config.validate()?;
    (0..config.chains)
        .into_par_iter()
        .map(|c| sample_chain(model, config, init, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Gauss {
        mean: Vec<f64>,
        sd: Vec<f64>,
    }

    impl LogDensity for Gauss {
        fn dim(&self) -> usize {
            self.mean.len()
        }
        fn log_density_and_gradient(&self, q: &[f64], g: &mut [f64]) -> f64 {
            let mut lp = 0.0;
            for i in 0..q.len() {
                let z = (q[i] - self.mean[i]) / self.sd[i];
                lp -= 0.5 * z * z;
                g[i] = -z / self.sd[i];
            }
            lp
        }
    }

    fn quick() -> SamplerConfig {
        SamplerConfig {
            iterations: 600,
            warmup: 300,
            seed: 11,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        let bad = SamplerConfig { warmup: 2000, ..SamplerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig { target_accept: 1.0, ..SamplerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig { chains: 0, ..SamplerConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let g = Gauss { mean: vec![1.0, -2.0], sd: vec![1.0, 3.0] };
        let a = sample(&g, &quick(), &[0.0, 0.0]).unwrap();
        let b = sample(&g, &quick(), &[0.0, 0.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].num_draws(), 300);
    }

    #[test]
    fn chains_use_distinct_streams() {
        let g = Gauss { mean: vec![0.0], sd: vec![1.0] };
        let cfg = SamplerConfig { chains: 2, ..quick() };
        let out = sample(&g, &cfg, &[0.0]).unwrap();
        assert_ne!(out[0].draws, out[1].draws);
    }

    #[test]
    fn metric_adapts_to_scale() {
        let g = Gauss { mean: vec![0.0, 0.0], sd: vec![0.1, 10.0] };
        let cfg = SamplerConfig { iterations: 1500, warmup: 1000, ..quick() };
        let out = sample_chain(&g, &cfg, &[0.0, 0.0], 0).unwrap();
        assert!(out.inv_metric[0] < 0.05 && out.inv_metric[1] > 30.0, "{:?}", out.inv_metric);
    }

    struct Nowhere;

    impl LogDensity for Nowhere {
        fn dim(&self) -> usize {
            1
        }
        fn log_density_and_gradient(&self, _q: &[f64], g: &mut [f64]) -> f64 {
            g[0] = f64::NAN;
            f64::NEG_INFINITY
        }
    }

    #[test]
    fn rejects_bad_init() {
        assert!(matches!(sample_chain(&Nowhere, &quick(), &[0.0], 0), Err(Error::Sampler(_))));
    }
}
