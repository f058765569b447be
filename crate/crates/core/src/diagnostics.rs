//! Convergence diagnostics and posterior summaries.
//!
//! R-hat and bulk ESS are computed on rank-normalized split chains; tail ESS
//! is the smaller ESS of the indicators for the 5% and 95% quantiles.
//! Undefined quantities (constant input, too few draws) are `None`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::sampler::ChainDraws;

/// The stricter convergence threshold for R-hat.
pub const RHAT_STRICT: f64 = 1.01;
/// The relaxed convergence threshold for R-hat.
pub const RHAT_RELAXED: f64 = 1.1;
/// ESS never exceeds this multiple of the total draw count, even for
/// antithetic chains.
pub const ESS_OVERSAMPLING: f64 = 1.25;

/// Halves every chain; an odd middle draw is dropped.
pub fn split_chains(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * chains.len());
    for c in chains {
        let n = c.len();
        if n < 2 {
            out.push(c.clone());
            continue;
        }
        let half = n / 2;
        out.push(c[..half].to_vec());
        out.push(c[n - half..].to_vec());
    }
    out
}

/// Average ranks (1-based) with ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Normal scores of the pooled fractional ranks, keeping the chain shape.
pub fn rank_normalize(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    let s = pooled.len() as f64;
    let ranks = average_ranks(&pooled);
    let normal = Normal::standard();
    let mut it = ranks.into_iter();
    chains
        .iter()
        .map(|c| {
            c.iter()
                .map(|_| normal.inverse_cdf((it.next().unwrap() - 0.375) / (s + 0.25)))
                .collect()
        })
        .collect()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn usable(chains: &[Vec<f64>]) -> bool {
    !chains.is_empty()
        && chains.iter().all(|c| c.len() == chains[0].len())
        && chains.iter().flatten().all(|v| v.is_finite())
}

fn is_constant(chains: &[Vec<f64>]) -> bool {
    let first = chains[0][0];
    chains.iter().flatten().all(|&v| v == first)
}

/// Classic R-hat on already-split chains.
pub fn rhat_basic(splits: &[Vec<f64>]) -> Option<f64> {
    if splits.len() < 2 || !usable(splits) {
        return None;
    }
    let n = splits[0].len();
    if n < 2 {
        return None;
    }
    let means: Vec<f64> = splits.iter().map(|c| mean(c)).collect();
    let within = mean(&splits.iter().map(|c| sample_var(c)).collect::<Vec<_>>());
    if !(within > 0.0) {
        return None;
    }
    let between = n as f64 * sample_var(&means);
    let n = n as f64;
    Some(((between / within + n - 1.0) / n).sqrt())
}

/// Rank-normalized split R-hat. Needs at least 4 draws per split.
pub fn split_rhat(chains: &[Vec<f64>]) -> Option<f64> {
    if !usable(chains) || chains[0].len() < 8 || is_constant(chains) {
        return None;
    }
    rhat_basic(&rank_normalize(&split_chains(chains)))
}

/// Effective sample size of (already split) chains using Geyer's initial
/// monotone sequence on the averaged biased autocovariances.
pub fn ess_raw(chains: &[Vec<f64>]) -> Option<f64> {
    if !usable(chains) {
        return None;
    }
    let m = chains.len();
    let n = chains[0].len();
    if n < 3 || is_constant(chains) {
        return None;
    }
    let centered: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| {
            let mu = mean(c);
            c.iter().map(|v| v - mu).collect()
        })
        .collect();
    let acov = |lag: usize| -> f64 {
        centered
            .iter()
            .map(|c| c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
            .sum::<f64>()
            / m as f64
    };
    let nf = n as f64;
    let mean_var = acov(0) * nf / (nf - 1.0);
    let mut var_plus = mean_var * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += sample_var(&chains.iter().map(|c| mean(c)).collect::<Vec<_>>());
    }
    if !(var_plus > 0.0) {
        return None;
    }
    let rho = |lag: usize| 1.0 - (mean_var - acov(lag)) / var_plus;

    let mut rho_hat = vec![0.0; n];
    let mut t = 0;
    let mut even = 1.0;
    rho_hat[0] = even;
    let mut odd = rho(1);
    rho_hat[1] = odd;
    while t + 5 < n && !(even + odd).is_nan() && even + odd > 0.0 {
        t += 2;
        even = rho(t);
        odd = rho(t + 1);
        if even + odd >= 0.0 {
            rho_hat[t] = even;
            rho_hat[t + 1] = odd;
        }
    }
    let max_t = t;
    if even > 0.0 {
        rho_hat[max_t] = even;
    }
    let mut t = 0;
    while t + 4 <= max_t {
        t += 2;
        if rho_hat[t] + rho_hat[t + 1] > rho_hat[t - 2] + rho_hat[t - 1] {
            rho_hat[t] = (rho_hat[t - 2] + rho_hat[t - 1]) / 2.0;
            rho_hat[t + 1] = rho_hat[t];
        }
    }
    let total = (m * n) as f64;
    let tau = (-1.0 + 2.0 * rho_hat[..max_t].iter().sum::<f64>() + rho_hat[max_t]).max(1.0 / ESS_OVERSAMPLING);
    Some(total / tau)
}

/// Bulk ESS: ESS of rank-normalized split chains.
pub fn ess_bulk(chains: &[Vec<f64>]) -> Option<f64> {
    if !usable(chains) || chains[0].len() < 8 || is_constant(chains) {
        return None;
    }
    ess_raw(&rank_normalize(&split_chains(chains)))
}

/// Type-7 (linear interpolation) quantile of unsorted data.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// ESS of the indicator `draw <= quantile(p)` on split chains.
pub fn ess_quantile(chains: &[Vec<f64>], p: f64) -> Option<f64> {
    if !usable(chains) || chains[0].len() < 8 {
        return None;
    }
    let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    let q = quantile(&pooled, p);
    let ind: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| c.iter().map(|&v| if v <= q { 1.0 } else { 0.0 }).collect())
        .collect();
    ess_raw(&split_chains(&ind))
}

/// Tail ESS: the smaller of the 5% and 95% quantile ESS.
pub fn ess_tail(chains: &[Vec<f64>]) -> Option<f64> {
    match (ess_quantile(chains, 0.05), ess_quantile(chains, 0.95)) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    }
}

/// Which ESS flavour to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EssKind {
    Bulk,
    Tail,
}

pub fn ess(chains: &[Vec<f64>], kind: EssKind) -> Option<f64> {
    match kind {
        EssKind::Bulk => ess_bulk(chains),
        EssKind::Tail => ess_tail(chains),
    }
}

/// Posterior summary of one scalar parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    /// Sample standard deviation (divides by `n - 1`).
    pub sd: f64,
    /// Population standard deviation (divides by `n`), used for RMSE.
    pub sd_pop: f64,
    pub q5: f64,
    pub q95: f64,
    pub rhat: Option<f64>,
    pub bulk_ess: Option<f64>,
    pub tail_ess: Option<f64>,
    pub truth: Option<f64>,
    /// `mean - truth`.
    pub bias: Option<f64>,
    /// `sqrt(bias^2 + sd_pop^2)`.
    pub rmse: Option<f64>,
}

impl ParamSummary {
    pub fn converged(&self, threshold: f64) -> bool {
        matches!(self.rhat, Some(r) if r <= threshold)
    }
}

/// Summarizes the draws of one parameter (one vector per chain).
pub fn summarize(name: &str, chains: &[Vec<f64>], truth: Option<f64>) -> ParamSummary {
    let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let mu = pooled.iter().sum::<f64>() / n;
    let ss: f64 = pooled.iter().map(|v| (v - mu) * (v - mu)).sum();
    let sd_pop = (ss / n).sqrt();
    let sd = if pooled.len() > 1 { (ss / (n - 1.0)).sqrt() } else { f64::NAN };
    let mut sorted = pooled;
    sorted.sort_by(f64::total_cmp);
    let bias = truth.map(|t| mu - t);
    ParamSummary {
        name: name.to_string(),
        mean: mu,
        sd,
        sd_pop,
        q5: quantile_sorted(&sorted, 0.05),
        q95: quantile_sorted(&sorted, 0.95),
        rhat: split_rhat(chains),
        bulk_ess: ess_bulk(chains),
        tail_ess: ess_tail(chains),
        truth,
        bias,
        rmse: bias.map(|b| (b * b + sd_pop * sd_pop).sqrt()),
    }
}

/// Per-parameter diagnostics with threshold flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub params: Vec<ParamSummary>,
    pub chains: usize,
    pub draws_per_chain: usize,
}

impl ConvergenceReport {
    /// Summaries for the parameters selected by `keep` (by name), with
    /// optional truths aligned to the full parameter vector.
    pub fn from_chains(chains: &[ChainDraws], truths: Option<&[f64]>, keep: impl Fn(&str) -> bool) -> Self {
        let names = chains.first().map(|c| c.names.clone()).unwrap_or_default();
        let selected: Vec<usize> = (0..names.len()).filter(|&k| keep(&names[k])).collect();
        let params = selected
            .par_iter()
            .map(|&k| {
                let per_chain: Vec<Vec<f64>> = chains.iter().map(|c| c.column(k)).collect();
                summarize(&names[k], &per_chain, truths.map(|t| t[k]))
            })
            .collect();
        Self {
            params,
            chains: chains.len(),
            draws_per_chain: chains.first().map_or(0, |c| c.num_draws()),
        }
    }

    /// Parameters whose R-hat is undefined or above `threshold`.
    pub fn flagged(&self, threshold: f64) -> Vec<&ParamSummary> {
        self.params.iter().filter(|p| !p.converged(threshold)).collect()
    }

    /// Fraction of parameters with R-hat above `threshold` or undefined.
    pub fn fraction_flagged(&self, threshold: f64) -> f64 {
        if self.params.is_empty() {
            return 0.0;
        }
        self.flagged(threshold).len() as f64 / self.params.len() as f64
    }

    pub fn max_rhat(&self) -> Option<f64> {
        self.params.iter().filter_map(|p| p.rhat).reduce(f64::max)
    }

    pub fn get(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }
}
