//! Dataset-level fitting shared by the command line and the examples.

use crate::basis::{min_basis, BasisConfig, DEFAULT_BOUNDARY_FACTOR};
use crate::diagnostics::{ConvergenceReport, RHAT_RELAXED, RHAT_STRICT};
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::kernels::KernelFamily;
use crate::model::{self, JointModel, Layout, ModelSpec, Variant};
use crate::priors::{PriorPreset, PriorSet};
use crate::sampler::{self, ChainDraws, SamplerConfig};
use crate::simgen::ScenarioKind;

/// Largest N fitted with the exact GP without an explicit opt-in.
pub const EXACT_N_LIMIT: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub family: KernelFamily,
    pub exact: bool,
    pub m: Option<usize>,
    pub force_m: bool,
    pub boundary_factor: f64,
    pub priors: Option<PriorPreset>,
    pub s: Option<f64>,
    pub allow_large_exact: bool,
    pub sampler: SamplerConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            family: KernelFamily::SquaredExponential,
            exact: false,
            m: None,
            force_m: false,
            boundary_factor: DEFAULT_BOUNDARY_FACTOR,
            priors: None,
            s: None,
            allow_large_exact: false,
            sampler: SamplerConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: JointModel,
    pub chains: Vec<ChainDraws>,
    /// Diagnostics for the primary parameters.
    pub report: ConvergenceReport,
    /// Ground truth aligned with the full parameter vector, when known.
    pub truths: Option<Vec<f64>>,
    pub preset: PriorPreset,
    pub m_min: Option<usize>,
    pub warnings: Vec<String>,
}

/// Preset used when none is requested: case-study priors for ingested data,
/// scenario priors otherwise.
pub fn default_preset(ds: &Dataset) -> PriorPreset {
    match ds.meta.get("source") {
        Some("ingest") => PriorPreset::CaseStudy,
        _ => PriorPreset::Scenario,
    }
}

/// Resolves a preset against the dataset's scenario.
pub fn resolve_priors(ds: &Dataset, preset: PriorPreset) -> Result<PriorSet> {
    Ok(match preset {
        PriorPreset::Scenario => match ds.meta.get("scenario") {
            Some(tag) => {
                let kind: ScenarioKind = tag.parse()?;
                PriorSet::simulation().with_rho(kind.rho_fitting())
            }
            None => PriorSet::simulation(),
        },
        PriorPreset::Wide => PriorSet::wide(),
        PriorPreset::CaseStudy => PriorSet::case_study(),
    })
}

/// Input range used for the basis-size heuristic: the nominal simulation
/// range when recorded, otherwise the span of `x_tilde`.
pub fn input_range(ds: &Dataset) -> f64 {
    if let (Ok(lo), Ok(hi)) = (ds.meta.get_f64("x_min"), ds.meta.get_f64("x_max")) {
        if hi > lo {
            return hi - lo;
        }
    }
    let lo = ds.x_tilde.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ds.x_tilde.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Builds the joint model; returns it with any warnings and the minimum
/// basis size (HSGP only).
pub fn build_model(ds: &Dataset, opts: &FitOptions) -> Result<(JointModel, PriorPreset, Option<usize>, Vec<String>)> {
    let mut warnings = Vec::new();
    let preset = opts.priors.unwrap_or_else(|| default_preset(ds));
    let priors = resolve_priors(ds, preset)?;
    let s = match opts.s {
        Some(s) => s,
        None => ds
            .s()
            .map_err(|_| Error::Usage("dataset metadata has no measurement SD 's'; pass --s".into()))?,
    };
    let n = ds.n();
    let (variant, m_min) = if opts.exact {
        if n > EXACT_N_LIMIT && !opts.allow_large_exact {
            return Err(Error::Usage(format!(
                "exact GP with N = {n} > {EXACT_N_LIMIT} refused; pass --allow-large-exact to override"
            )));
        }
        if n > EXACT_N_LIMIT {
            warnings.push(format!("exact GP with N = {n} will be slow"));
        }
        (Variant::Exact, None)
    } else {
        let m_min = min_basis(opts.family, opts.boundary_factor, input_range(ds), priors.rho.mean)?;
        let m = opts.m.unwrap_or(m_min);
        if m < m_min {
            if !opts.force_m {
                return Err(Error::Usage(format!(
                    "M = {m} is below the minimum basis size {m_min}; pass --force-m to proceed"
                )));
            }
            warnings.push(format!("M = {m} is below the minimum basis size {m_min}"));
        }
        (
            Variant::Hsgp(BasisConfig::from_inputs(&ds.x_tilde, m, opts.boundary_factor)?),
            Some(m_min),
        )
    };
    let spec = ModelSpec::new(opts.family, ds.d(), variant, priors, ds.x_tilde.clone(), s)?;
    Ok((JointModel::new(spec, ds.y.clone())?, preset, m_min, warnings))
}

/// Ground truth in parameter order when the dataset carries it; basis
/// weights are NaN.
pub fn truths_from_dataset(ds: &Dataset, lay: Layout) -> Option<Vec<f64>> {
    let x = ds.x_true.as_ref()?;
    let kv = &ds.meta;
    let rho = kv.get_list("rho_true").ok()?;
    let alpha = kv.get_list("alpha_true").ok()?;
    let sigma = kv.get_list("sigma_true").ok()?;
    let mu = kv.get_list("mu_true").ok()?;
    let c = kv.get_list("c_true").ok()?;
    let d = lay.d;
    if [rho.len(), alpha.len(), sigma.len(), mu.len()].iter().any(|&l| l != d) || c.len() != d * d {
        return None;
    }
    let mut t = Vec::with_capacity(lay.dim());
    t.extend_from_slice(x);
    t.extend(rho);
    t.extend(alpha);
    t.extend(sigma);
    t.extend(mu);
    t.extend(std::iter::repeat_n(f64::NAN, lay.beta().len()));
    for i in 1..d {
        for j in 0..i {
            t.push(c[i * d + j]);
        }
    }
    Some(t)
}

/// Builds the model, samples it and summarizes the primary parameters.
pub fn fit_dataset(ds: &Dataset, opts: &FitOptions) -> Result<FitOutcome> {
    let (model, preset, m_min, mut warnings) = build_model(ds, opts)?;
    let chains = sampler::sample(&model, &opts.sampler, &model.initial_position())?;
    let truths = truths_from_dataset(ds, model.layout());
    let report = ConvergenceReport::from_chains(&chains, truths.as_deref(), model::is_primary);
    let strict = report.flagged(RHAT_STRICT).len();
    if strict > 0 {
        warnings.push(format!(
            "{strict} of {} primary parameters have R-hat above {RHAT_STRICT} or undefined",
            report.params.len()
        ));
    }
    let relaxed = report.flagged(RHAT_RELAXED).len();
    if relaxed > 0 {
        warnings.push(format!("{relaxed} primary parameters have R-hat above {RHAT_RELAXED} or undefined"));
    }
    let divergent: usize = chains.iter().map(|c| c.divergences()).sum();
    if divergent > 0 {
        warnings.push(format!("{divergent} divergent transitions after warmup"));
    }
    Ok(FitOutcome {
        model,
        chains,
        report,
        truths,
        preset,
        m_min,
        warnings,
    })
}
