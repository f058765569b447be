//! Simulation-based calibration.
//!
//! Each trial draws a ground truth from the prior, simulates data, fits the
//! model and ranks the truth among `H` thinned posterior draws. Uniformity
//! of the ranks over trials is scored with the ECDF-based `gamma` statistic
//! against a Monte Carlo null threshold.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::basis::{min_basis, BasisConfig, DEFAULT_BOUNDARY_FACTOR};
use crate::diagnostics::{split_rhat, RHAT_RELAXED};
use crate::error::{Error, Result};
use crate::kernels::KernelFamily;
use crate::model::{self, JointModel, ModelSpec, Variant};
use crate::sampler::{self, LogDensity, SamplerConfig};
use crate::simgen::{self, ScenarioSpec};

/// Default number of thinned posterior draws per trial.
pub const DEFAULT_H: usize = 99;
/// Default number of null simulations for thresholds and bands.
pub const DEFAULT_NULL_SIMS: usize = 10_000;
const NULL_SEED: u64 = 0x5bc_0001;

/// Number of draws strictly below `truth`.
pub fn rank_statistic(draws: &[f64], truth: f64) -> usize {
    draws.iter().filter(|&&d| d < truth).count()
}

/// `h` evenly spaced draws from `draws`.
pub fn thin(draws: &[f64], h: usize) -> Vec<f64> {
    let s = draws.len();
    if h >= s {
        return draws.to_vec();
    }
    (0..h).map(|i| draws[i * s / h]).collect()
}

/// Binomial tail tables for `J` ranks on `{0..H}` at the points
/// `z_k = k / (H + 1)`, `k = 1..H`.
#[derive(Debug, Clone)]
pub struct GammaTable {
    pub j: usize,
    pub h: usize,
    /// `cdf[k-1][r] = P(Bin(J, z_k) <= r)`
    cdf: Vec<Vec<f64>>,
    /// `upper[k-1][r] = P(Bin(J, z_k) >= r)`
    upper: Vec<Vec<f64>>,
}

impl GammaTable {
    pub fn new(j: usize, h: usize) -> Result<Self> {
        if j < 1 || h < 1 {
            return Err(Error::Domain(format!("need J >= 1 and H >= 1, got J={j}, H={h}")));
        }
        let mut cdf = Vec::with_capacity(h);
        let mut upper = Vec::with_capacity(h);
        for k in 1..=h {
            let z = k as f64 / (h + 1) as f64;
            let bin = Binomial::new(z, j as u64).map_err(|e| Error::Domain(e.to_string()))?;
            cdf.push((0..=j).map(|r| bin.cdf(r as u64)).collect());
            upper.push((0..=j).map(|r| if r == 0 { 1.0 } else { bin.sf(r as u64 - 1) }).collect());
        }
        Ok(Self { j, h, cdf, upper })
    }

    pub fn eval_point(&self, k: usize) -> f64 {
        k as f64 / (self.h + 1) as f64
    }

    /// Cumulative counts `R_k = #{ranks < k}` for `k = 1..H`.
    fn cumulative(&self, ranks: &[usize]) -> Vec<usize> {
        let mut hist = vec![0usize; self.h + 1];
        for &r in ranks {
            hist[r.min(self.h)] += 1;
        }
        let mut out = Vec::with_capacity(self.h);
        let mut acc = 0;
        for k in 1..=self.h {
            acc += hist[k - 1];
            out.push(acc);
        }
        out
    }

    /// `gamma = 2 min_k min(P(X <= R_k), P(X >= R_k))`, floored at the
    /// smallest positive double before taking the log.
    pub fn log_gamma(&self, ranks: &[usize]) -> f64 {
        debug_assert_eq!(ranks.len(), self.j);
        let counts = self.cumulative(ranks);
        let mut g: f64 = 1.0;
        for (k, &r) in counts.iter().enumerate() {
            g = g.min(self.cdf[k][r]).min(self.upper[k][r]);
        }
        (2.0 * g).max(f64::MIN_POSITIVE).ln()
    }
}

/// Log-gamma of a set of ranks on `{0..h}`.
pub fn log_gamma(ranks: &[usize], h: usize) -> Result<f64> {
    if ranks.len() < 2 {
        return Err(Error::Domain(format!("need at least 2 ranks, got {}", ranks.len())));
    }
    if let Some(r) = ranks.iter().find(|&&r| r > h) {
        return Err(Error::Domain(format!("rank {r} exceeds H = {h}")));
    }
    Ok(GammaTable::new(ranks.len(), h)?.log_gamma(ranks))
}

/// Null distribution of log-gamma for `J` uniform ranks on `{0..H}`.
pub fn null_log_gammas(j: usize, h: usize, sims: usize, seed: u64) -> Result<Vec<f64>> {
    let table = GammaTable::new(j, h)?;
    let chunks = 64usize;
    let per = sims.div_ceil(chunks);
    let mut out: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = per.min(sims.saturating_sub(c * per));
            let table = &table;
            let mut ranks = vec![0usize; j];
            (0..n)
                .map(move |_| {
                    for r in ranks.iter_mut() {
                        *r = rng.random_range(0..=h);
                    }
                    table.log_gamma(&ranks)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    out.truncate(sims);
    Ok(out)
}

/// Largest value `t` among the simulated null scores such that at most a
/// `1 - coverage` fraction of them lies strictly below `t`.
fn lower_quantile(mut values: Vec<f64>, coverage: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = ((1.0 - coverage) * values.len() as f64).floor() as usize;
    values[k.min(values.len() - 1)]
}

/// Rejection threshold for log-gamma: uniformity is rejected when the
/// observed score falls below it. `coverage >= 1` never rejects.
pub fn gamma_threshold(j: usize, h: usize, coverage: f64, sims: usize, seed: u64) -> Result<f64> {
    if !(coverage > 0.0) {
        return Err(Error::Domain(format!("coverage must be positive, got {coverage}")));
    }
    if coverage >= 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if sims == 0 {
        return Err(Error::Domain("need at least one null simulation".into()));
    }
    Ok(lower_quantile(null_log_gammas(j, h, sims, seed)?, coverage))
}

/// Outcome of a uniformity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaScore {
    pub log_gamma: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl GammaScore {
    /// Distance above the threshold (negative means rejection).
    pub fn margin(&self) -> f64 {
        self.log_gamma - self.threshold
    }
}

/// Scores `ranks` against the 95% null threshold.
pub fn gamma_score(ranks: &[usize], h: usize) -> Result<GammaScore> {
    let log_gamma = log_gamma(ranks, h)?;
    let threshold = gamma_threshold(ranks.len(), h, 0.95, DEFAULT_NULL_SIMS, NULL_SEED)?;
    Ok(GammaScore {
        log_gamma,
        threshold,
        pass: log_gamma >= threshold,
    })
}

/// Simultaneous ECDF bands on the cumulative rank counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfBands {
    pub j: usize,
    pub h: usize,
    /// Evaluation points `k / (H + 1)`.
    pub z: Vec<f64>,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    /// Pointwise level used to build the bands.
    pub gamma_adj: f64,
}

impl EcdfBands {
    /// Whether every cumulative count of `ranks` lies inside the bands.
    pub fn contains(&self, ranks: &[usize]) -> bool {
        let mut hist = vec![0usize; self.h + 1];
        for &r in ranks {
            hist[r.min(self.h)] += 1;
        }
        let mut acc = 0;
        for k in 0..self.h {
            acc += hist[k];
            if acc < self.lower[k] || acc > self.upper[k] {
                return false;
            }
        }
        true
    }
}

/// Bands whose simultaneous coverage under uniform ranks is `coverage`,
/// calibrated with `sims` null simulations.
pub fn ecdf_bands(j: usize, h: usize, coverage: f64, sims: usize, seed: u64) -> Result<EcdfBands> {
    let table = GammaTable::new(j, h)?;
    let z: Vec<f64> = (1..=h).map(|k| table.eval_point(k)).collect();
    let threshold = gamma_threshold(j, h, coverage, sims, seed)?;
    let gamma_adj = threshold.exp();
    let half = gamma_adj / 2.0;
    let mut lower = Vec::with_capacity(h);
    let mut upper = Vec::with_capacity(h);
    for k in 0..h {
        // A count r is inside when both tails at r are at least gamma_adj / 2.
        let lo = (0..=j).find(|&r| table.cdf[k][r] >= half).unwrap_or(0);
        let hi = (0..=j).rev().find(|&r| table.upper[k][r] >= half).unwrap_or(j);
        lower.push(lo);
        upper.push(hi);
    }
    Ok(EcdfBands {
        j,
        h,
        z,
        lower,
        upper,
        gamma_adj,
    })
}

/// Truth and posterior draws from one calibration trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutput {
    pub names: Vec<String>,
    pub truths: Vec<f64>,
    /// `chains[c][s][p]`: draw `s` of parameter `p` in chain `c`.
    pub chains: Vec<Vec<Vec<f64>>>,
}

/// A model whose calibration can be checked by simulation.
pub trait SbcProblem: Sync {
    fn param_names(&self) -> Vec<String>;

    /// Draws a truth from the prior, simulates data and fits it.
    fn run_trial(&self, trial: usize, seed: u64) -> Result<TrialOutput>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbcConfig {
    pub trials: usize,
    pub h: usize,
    pub coverage: f64,
    pub null_sims: usize,
    pub seed: u64,
    /// R-hat above this marks a parameter as not converged.
    pub rhat_threshold: f64,
    /// A trial is flagged when more than this fraction of its parameters is
    /// not converged.
    pub max_unconverged_fraction: f64,
}

impl Default for SbcConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            h: DEFAULT_H,
            coverage: 0.95,
            null_sims: DEFAULT_NULL_SIMS,
            seed: 1,
            rhat_threshold: RHAT_RELAXED,
            max_unconverged_fraction: 0.1,
        }
    }
}

/// One (trial, parameter) row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbcRecord {
    pub trial: usize,
    pub name: String,
    pub truth: f64,
    pub rank: usize,
    pub h: usize,
    pub post_mean: f64,
    pub post_sd: f64,
    pub rhat: Option<f64>,
    pub converged: bool,
    pub trial_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub message: String,
}

/// Per-parameter uniformity result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGamma {
    pub name: String,
    /// Score over converged trials only.
    pub score: Option<GammaScore>,
    pub trials_used: usize,
    pub trials_excluded: usize,
    /// Score over every completed trial.
    pub score_all: Option<GammaScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbcOutcome {
    pub records: Vec<SbcRecord>,
    pub failures: Vec<TrialFailure>,
    pub gamma: Vec<ParamGamma>,
    pub unconverged_trials: Vec<usize>,
}

impl SbcOutcome {
    /// Fraction of parameters (matching `filter`) whose headline score passes.
    pub fn pass_fraction(&self, filter: impl Fn(&str) -> bool) -> f64 {
        let sel: Vec<_> = self.gamma.iter().filter(|g| filter(&g.name)).collect();
        if sel.is_empty() {
            return 0.0;
        }
        sel.iter().filter(|g| g.score.is_some_and(|s| s.pass)).count() as f64 / sel.len() as f64
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var.sqrt())
}

fn records_for_trial(trial: usize, out: &TrialOutput, config: &SbcConfig) -> Result<Vec<SbcRecord>> {
    let p = out.names.len();
    if out.truths.len() != p || out.chains.is_empty() {
        return Err(Error::Shape(format!("trial {trial}: truths and names disagree")));
    }
    let mut rows = Vec::with_capacity(p);
    for k in 0..p {
        let per_chain: Vec<Vec<f64>> = out.chains.iter().map(|c| c.iter().map(|row| row[k]).collect()).collect();
        let pooled: Vec<f64> = per_chain.iter().flatten().copied().collect();
        if pooled.len() < config.h {
            return Err(Error::Domain(format!(
                "trial {trial}: {} draws cannot be thinned to H = {}",
                pooled.len(),
                config.h
            )));
        }
        let thinned = thin(&pooled, config.h);
        let rhat = split_rhat(&per_chain);
        let (post_mean, post_sd) = mean_sd(&pooled);
        rows.push(SbcRecord {
            trial,
            name: out.names[k].clone(),
            truth: out.truths[k],
            rank: rank_statistic(&thinned, out.truths[k]),
            h: config.h,
            post_mean,
            post_sd,
            converged: matches!(rhat, Some(r) if r <= config.rhat_threshold),
            rhat,
            trial_converged: true,
        });
    }
    let bad = rows.iter().filter(|r| !r.converged).count();
    let ok = bad as f64 <= config.max_unconverged_fraction * p as f64;
    for r in &mut rows {
        r.trial_converged = ok;
    }
    Ok(rows)
}

/// Runs `config.trials` trials concurrently and scores every parameter.
pub fn run_sbc<P: SbcProblem + ?Sized>(problem: &P, config: &SbcConfig) -> Result<SbcOutcome> {
    if config.trials < 2 {
        return Err(Error::Domain(format!("need at least 2 trials, got {}", config.trials)));
    }
    let names = problem.param_names();
    let results: Vec<std::result::Result<Vec<SbcRecord>, TrialFailure>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            problem
                .run_trial(t, simgen::trial_seed(config.seed, t))
                .and_then(|out| records_for_trial(t, &out, config))
                .map_err(|e| TrialFailure {
                    trial: t,
                    message: e.to_string(),
                })
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rows) => records.extend(rows),
            Err(f) => failures.push(f),
        }
    }
    let mut unconverged_trials: Vec<usize> =
        records.iter().filter(|r| !r.trial_converged).map(|r| r.trial).collect();
    unconverged_trials.dedup();

    let mut thresholds: HashMap<usize, f64> = HashMap::new();
    let mut threshold_for = |j: usize| -> Result<f64> {
        if let Some(t) = thresholds.get(&j) {
            return Ok(*t);
        }
        let t = gamma_threshold(j, config.h, config.coverage, config.null_sims, NULL_SEED)?;
        thresholds.insert(j, t);
        Ok(t)
    };
    let mut gamma = Vec::with_capacity(names.len());
    for name in &names {
        let all: Vec<&SbcRecord> = records.iter().filter(|r| &r.name == name).collect();
        let used: Vec<usize> = all.iter().filter(|r| r.trial_converged).map(|r| r.rank).collect();
        let every: Vec<usize> = all.iter().map(|r| r.rank).collect();
        let mut score = |ranks: &[usize]| -> Result<Option<GammaScore>> {
            if ranks.len() < 2 {
                return Ok(None);
            }
            let lg = log_gamma(ranks, config.h)?;
            let th = threshold_for(ranks.len())?;
            Ok(Some(GammaScore {
                log_gamma: lg,
                threshold: th,
                pass: lg >= th,
            }))
        };
        let s = score(&used)?;
        let s_all = score(&every)?;
        gamma.push(ParamGamma {
            name: name.clone(),
            score: s,
            trials_used: used.len(),
            trials_excluded: every.len() - used.len(),
            score_all: s_all,
        });
    }
    Ok(SbcOutcome {
        records,
        failures,
        gamma,
        unconverged_trials,
    })
}

/// How the conjugate oracle produces posterior draws.
#[derive(Debug, Clone, PartialEq)]
pub enum ConjugateMode {
    /// Independent draws from the analytic posterior.
    Exact { draws: usize },
    /// Draws from the NUTS sampler.
    Sampler(SamplerConfig),
}

/// `K` independent normal means with known noise SD: `theta_k ~ N(m0, s0^2)`,
/// `y_ik ~ N(theta_k, sigma^2)`. The posterior is available in closed form,
/// which makes this an oracle for the calibration machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateNormal {
    pub k: usize,
    pub n_obs: usize,
    pub sigma: f64,
    pub prior_mean: f64,
    pub prior_sd: f64,
    /// Multiplies the posterior SD; values other than 1 miscalibrate.
    pub sd_scale: f64,
    pub mode: ConjugateMode,
}

impl ConjugateNormal {
    pub fn new(mode: ConjugateMode) -> Self {
        Self {
            k: 3,
            n_obs: 10,
            sigma: 1.0,
            prior_mean: 0.0,
            prior_sd: 2.0,
            sd_scale: 1.0,
            mode,
        }
    }

    /// Posterior mean and SD given the sample sums.
    pub fn posterior(&self, sum_y: f64) -> (f64, f64) {
        let prec = 1.0 / (self.prior_sd * self.prior_sd) + self.n_obs as f64 / (self.sigma * self.sigma);
        let mean = (self.prior_mean / (self.prior_sd * self.prior_sd) + sum_y / (self.sigma * self.sigma)) / prec;
        (mean, prec.sqrt().recip())
    }
}

fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

struct ConjugatePosterior {
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl LogDensity for ConjugatePosterior {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density_and_gradient(&self, q: &[f64], g: &mut [f64]) -> f64 {
        let mut lp = 0.0;
        for k in 0..q.len() {
            let z = (q[k] - self.mean[k]) / self.sd[k];
            lp -= 0.5 * z * z;
            g[k] = -z / self.sd[k];
        }
        lp
    }
}

impl SbcProblem for ConjugateNormal {
    fn param_names(&self) -> Vec<String> {
        (1..=self.k).map(|i| format!("theta[{i}]")).collect()
    }

    fn run_trial(&self, _trial: usize, seed: u64) -> Result<TrialOutput> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut truths = Vec::with_capacity(self.k);
        let mut mean = Vec::with_capacity(self.k);
        let mut sd = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            let z = std_normal(&mut rng);
            let theta = self.prior_mean + self.prior_sd * z;
            let sum_y: f64 = (0..self.n_obs)
                .map(|_| theta + self.sigma * std_normal(&mut rng))
                .sum();
            let (m, s) = self.posterior(sum_y);
            truths.push(theta);
            mean.push(m);
            sd.push(s * self.sd_scale);
        }
        let chains = match &self.mode {
            ConjugateMode::Exact { draws } => {
                let rows = (0..*draws)
                    .map(|_| {
                        (0..self.k)
                            .map(|k| mean[k] + sd[k] * std_normal(&mut rng))
                            .collect()
                    })
                    .collect();
                vec![rows]
            }
            ConjugateMode::Sampler(cfg) => {
                let target = ConjugatePosterior { mean, sd };
                let cfg = SamplerConfig { seed, ..cfg.clone() };
                sampler::sample(&target, &cfg, &vec![self.prior_mean; self.k])?
                    .into_iter()
                    .map(|c| c.draws)
                    .collect()
            }
        };
        Ok(TrialOutput {
            names: self.param_names(),
            truths,
            chains,
        })
    }
}

/// Calibration of the latent-input GP model on a simulation scenario.
///
/// Truths are drawn with the fitting priors, including the mean offsets, so
/// generation and fitting are self-consistent apart from the basis
/// approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGpSbc {
    pub scenario: ScenarioSpec,
    pub family: KernelFamily,
    /// `None` fits the exact GP.
    pub m: Option<usize>,
    pub boundary_factor: f64,
    pub sampler: SamplerConfig,
}

impl LatentGpSbc {
    /// HSGP fit with the minimum basis size for the scenario's length-scale
    /// prior and input range.
    pub fn hsgp(scenario: ScenarioSpec, family: KernelFamily, sampler: SamplerConfig) -> Result<Self> {
        let range = scenario.x_range.1 - scenario.x_range.0;
        let m = min_basis(family, DEFAULT_BOUNDARY_FACTOR, range, scenario.rho.mean)?;
        Ok(Self {
            scenario,
            family,
            m: Some(m),
            boundary_factor: DEFAULT_BOUNDARY_FACTOR,
            sampler,
        })
    }

    fn trial_scenario(&self, seed: u64) -> ScenarioSpec {
        let mut s = self.scenario.clone();
        s.seed = seed;
        s.mu = Some(s.generating_priors().mu);
        s
    }
}

impl SbcProblem for LatentGpSbc {
    fn param_names(&self) -> Vec<String> {
        let d = self.scenario.d;
        let lay = model::Layout {
            n: self.scenario.n,
            d,
            weights_per_output: self.m.unwrap_or(self.scenario.n),
        };
        lay.names().into_iter().filter(|n| model::is_primary(n)).collect()
    }

    fn run_trial(&self, _trial: usize, seed: u64) -> Result<TrialOutput> {
        let scen = self.trial_scenario(seed);
        let ds = simgen::generate(&scen)?;
        let variant = match self.m {
            Some(m) => Variant::Hsgp(BasisConfig::from_inputs(&ds.x_tilde, m, self.boundary_factor)?),
            None => Variant::Exact,
        };
        let spec = ModelSpec::new(
            self.family,
            scen.d,
            variant,
            scen.generating_priors(),
            ds.x_tilde.clone(),
            scen.s,
        )?;
        let model = JointModel::new(spec, ds.y.clone())?;
        let names = model.layout().names();
        let keep: Vec<usize> = (0..names.len()).filter(|&k| model::is_primary(&names[k])).collect();
        let truth_all = truth_vector(&model, &ds);
        let cfg = SamplerConfig { seed, ..self.sampler.clone() };
        let chains = sampler::sample(&model, &cfg, &model.initial_position())?;
        Ok(TrialOutput {
            names: keep.iter().map(|&k| names[k].clone()).collect(),
            truths: keep.iter().map(|&k| truth_all[k]).collect(),
            chains: chains
                .into_iter()
                .map(|c| c.draws.into_iter().map(|row| keep.iter().map(|&k| row[k]).collect()).collect())
                .collect(),
        })
    }
}

/// Ground truth aligned with the model's constrained parameter names; the
/// basis weights have no generating counterpart and are NaN.
pub fn truth_vector(model: &JointModel, ds: &simgen::SimulatedDataset) -> Vec<f64> {
    let lay = model.layout();
    let mut t = Vec::with_capacity(lay.dim());
    t.extend_from_slice(&ds.x_true);
    t.extend_from_slice(&ds.rho);
    t.extend_from_slice(&ds.alpha);
    t.extend_from_slice(&ds.sigma);
    t.extend_from_slice(&ds.mu);
    t.extend(std::iter::repeat_n(f64::NAN, lay.beta().len()));
    for i in 1..lay.d {
        for j in 0..i {
            t.push(ds.c_true[(i, j)]);
        }
    }
    t
}
