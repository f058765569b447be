//! Data generators for the benchmark scenarios.
//!
//! Each scenario draws per-dimension hyperparameters from truncated-normal
//! priors, latent inputs uniformly on the input range, correlated output
//! functions and Gaussian noise. GP scenarios use the exact Gram matrix;
//! the periodic scenarios use `f_d(x) = alpha_d sin(x / rho_d)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelHyper};
use crate::linalg::Matrix;
use crate::model::{components, correlation};
use crate::priors::{NormalPrior, PriorSet, TruncatedNormal};

/// Sample sizes of the benchmark grid.
pub const SAMPLE_SIZES: [usize; 4] = [20, 50, 200, 1000];
/// Output dimensions of the benchmark grid.
pub const OUTPUT_DIMS: [usize; 3] = [5, 10, 20];
/// Trials per grid cell in the full benchmark.
pub const TRIALS: usize = 50;
/// Measurement SD of the noisy inputs.
pub const DEFAULT_S: f64 = 0.3;
/// Range of the true latent inputs.
pub const DEFAULT_X_RANGE: (f64, f64) = (0.0, 10.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    GpSe,
    GpMatern32,
    GpMatern52,
    /// SE with length-scales that vary strongly across output dimensions.
    GpSeWideRho,
    /// Periodic process with long length-scales (few oscillations).
    PeriodicLow,
    /// Periodic process with short length-scales (many oscillations).
    PeriodicHigh,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::GpSe,
        ScenarioKind::GpMatern32,
        ScenarioKind::GpMatern52,
        ScenarioKind::GpSeWideRho,
        ScenarioKind::PeriodicLow,
        ScenarioKind::PeriodicHigh,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ScenarioKind::GpSe => "gp-se",
            ScenarioKind::GpMatern32 => "gp-m32",
            ScenarioKind::GpMatern52 => "gp-m52",
            ScenarioKind::GpSeWideRho => "gp-se-wide-rho",
            ScenarioKind::PeriodicLow => "periodic-low",
            ScenarioKind::PeriodicHigh => "periodic-high",
        }
    }

    pub fn is_periodic(self) -> bool {
        matches!(self, ScenarioKind::PeriodicLow | ScenarioKind::PeriodicHigh)
    }

    /// Kernel of the data-generating GP; the periodic scenarios default to SE
    /// for fitting.
    pub fn family(self) -> KernelFamily {
        match self {
            ScenarioKind::GpMatern32 => KernelFamily::Matern32,
            ScenarioKind::GpMatern52 => KernelFamily::Matern52,
            _ => KernelFamily::SquaredExponential,
        }
    }

    /// Length-scale distribution used to generate data.
    pub fn rho_generating(self) -> TruncatedNormal {
        match self {
            ScenarioKind::GpSeWideRho | ScenarioKind::PeriodicLow => TruncatedNormal { mean: 1.0, sd: 0.25 },
            ScenarioKind::PeriodicHigh => TruncatedNormal { mean: 0.5, sd: 0.05 },
            _ => TruncatedNormal { mean: 1.0, sd: 0.05 },
        }
    }

    /// Length-scale prior used when fitting this scenario.
    pub fn rho_fitting(self) -> TruncatedNormal {
        match self {
            ScenarioKind::GpSeWideRho => TruncatedNormal { mean: 1.0, sd: 0.25 },
            ScenarioKind::PeriodicHigh => TruncatedNormal { mean: 0.5, sd: 0.05 },
            _ => TruncatedNormal { mean: 1.0, sd: 0.05 },
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.tag() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                let known: Vec<_> = ScenarioKind::ALL.iter().map(|k| k.tag()).collect();
                Error::Usage(format!("unknown scenario '{s}' (expected one of {})", known.join(", ")))
            })
    }
}

/// Everything needed to generate one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n: usize,
    pub d: usize,
    pub rho: TruncatedNormal,
    pub alpha: TruncatedNormal,
    pub sigma: TruncatedNormal,
    /// Prior on the mean offsets; `None` keeps them at zero.
    pub mu: Option<NormalPrior>,
    pub s: f64,
    pub x_range: (f64, f64),
    pub eta: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Scenario defaults for `kind`.
    pub fn new(kind: ScenarioKind, n: usize, d: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            kind,
            n,
            d,
            rho: kind.rho_generating(),
            alpha: TruncatedNormal { mean: 3.0, sd: 0.25 },
            sigma: TruncatedNormal { mean: 1.0, sd: 0.25 },
            mu: None,
            s: DEFAULT_S,
            x_range: DEFAULT_X_RANGE,
            eta: 1.0,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("N must be at least 2, got {}", self.n)));
        }
        if self.d == 0 {
            return Err(Error::Domain("D must be at least 1".into()));
        }
        for (name, p) in [("rho", self.rho), ("alpha", self.alpha), ("sigma", self.sigma)] {
            if !(p.sd > 0.0) || !p.mean.is_finite() {
                return Err(Error::Domain(format!("{name} prior needs a finite mean and positive SD")));
            }
        }
        if !(self.s >= 0.0 && self.s.is_finite()) {
            return Err(Error::Domain(format!("measurement SD must be non-negative, got {}", self.s)));
        }
        if !(self.x_range.0 < self.x_range.1) {
            return Err(Error::Domain("x range must be increasing".into()));
        }
        if !(self.eta > 0.0) {
            return Err(Error::Domain("LKJ shape must be positive".into()));
        }
        Ok(())
    }

    /// Priors for fitting data from this scenario.
    pub fn fitting_priors(&self) -> PriorSet {
        let mut p = PriorSet::simulation().with_rho(self.kind.rho_fitting());
        p.eta = self.eta;
        p
    }

    /// Priors matching the generating process exactly, for calibration runs.
    pub fn generating_priors(&self) -> PriorSet {
        let mut p = PriorSet::simulation();
        p.rho = self.rho;
        p.alpha = self.alpha;
        p.sigma = self.sigma;
        if let Some(mu) = self.mu {
            p.mu = mu;
        }
        p.eta = self.eta;
        p
    }
}

/// A generated dataset with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub spec: ScenarioSpec,
    /// `N x D` noisy outputs.
    pub y: Matrix,
    pub x_true: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub rho: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
    pub mu: Vec<f64>,
    pub c_true: Matrix,
    /// `N x D` noiseless mixed functions (mean offsets included).
    pub f_true: Matrix,
}

impl SimulatedDataset {
    pub fn chol_corr(&self) -> Matrix {
        crate::linalg::cholesky(&self.c_true).unwrap_or_else(|| Matrix::identity(self.spec.d))
    }
}

/// Positive draw from `N+(mean, sd^2)`.
pub fn draw_truncated_normal<R: Rng + ?Sized>(mean: f64, sd: f64, rng: &mut R) -> Result<f64> {
    Ok(TruncatedNormal::new(mean, sd)?.sample(rng))
}

/// Draws `C ~ LKJ(eta)` through canonical partial correlations on a C-vine;
/// returns `(C, chol(C))`.
pub fn lkj_draw<R: Rng + ?Sized>(d: usize, eta: f64, rng: &mut R) -> Result<(Matrix, Matrix)> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("LKJ shape must be positive, got {eta}")));
    }
    let mut l = Matrix::zeros(d, d);
    // remaining squared norm of each row
    let mut rest = vec![1.0f64; d];
    let mut shape = eta + 0.5 * (d as f64 - 1.0);
    for i in 0..d {
        l[(i, i)] = rest[i].sqrt();
        if i + 1 == d {
            break;
        }
        shape -= 0.5;
        let beta = Beta::new(shape, shape).map_err(|e| Error::Domain(e.to_string()))?;
        for j in i + 1..d {
            let z = 2.0 * beta.sample(rng) - 1.0;
            l[(j, i)] = z * rest[j].sqrt();
            rest[j] *= 1.0 - z * z;
        }
    }
    let c = correlation::correlation_from_factor(&l);
    Ok((c, l))
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

struct Draws {
    rho: Vec<f64>,
    alpha: Vec<f64>,
    sigma: Vec<f64>,
    mu: Vec<f64>,
    c: Matrix,
    a: Matrix,
    x_true: Vec<f64>,
}

fn draw_common(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<Draws> {
    spec.validate()?;
    let d = spec.d;
    let mut rho = Vec::with_capacity(d);
    let mut alpha = Vec::with_capacity(d);
    let mut sigma = Vec::with_capacity(d);
    for _ in 0..d {
        rho.push(spec.rho.sample(rng));
        alpha.push(spec.alpha.sample(rng));
        sigma.push(spec.sigma.sample(rng));
    }
    let mu = match spec.mu {
        Some(p) => (0..d).map(|_| p.sample(rng)).collect(),
        None => vec![0.0; d],
    };
    let (c, a) = lkj_draw(d, spec.eta, rng)?;
    let (lo, hi) = spec.x_range;
    let x_true = (0..spec.n).map(|_| rng.random_range(lo..hi)).collect();
    Ok(Draws {
        rho,
        alpha,
        sigma,
        mu,
        c,
        a,
        x_true,
    })
}

fn finish(spec: &ScenarioSpec, draws: Draws, f: Matrix, rng: &mut ChaCha8Rng) -> Result<SimulatedDataset> {
    let f_true = components::mix_outputs(&draws.a, &f)?;
    let mut y = f_true.clone();
    for i in 0..spec.n {
        for e in 0..spec.d {
            y[(i, e)] += draws.sigma[e] * normal(rng);
        }
    }
    let x_tilde = draws.x_true.iter().map(|x| x + spec.s * normal(rng)).collect();
    Ok(SimulatedDataset {
        spec: spec.clone(),
        y,
        x_true: draws.x_true,
        x_tilde,
        rho: draws.rho,
        alpha: draws.alpha,
        sigma: draws.sigma,
        mu: draws.mu,
        c_true: draws.c,
        f_true,
    })
}

/// GP scenario: exact Gram-matrix draws per output dimension.
pub fn gen_gp_scenario(spec: &ScenarioSpec) -> Result<SimulatedDataset> {
    if spec.kind.is_periodic() {
        return Err(Error::Domain(format!("{} is not a GP scenario", spec.kind)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draws = draw_common(spec, &mut rng)?;
    let family = spec.kind.family();
    let mut f = Matrix::zeros(spec.n, spec.d);
    for e in 0..spec.d {
        let z: Vec<f64> = (0..spec.n).map(|_| normal(&mut rng)).collect();
        let hyper = KernelHyper::new(draws.rho[e], draws.alpha[e])?;
        let fe = components::exact_gp_functions(&draws.x_true, &z, family, hyper, draws.mu[e])?;
        for (i, v) in fe.into_iter().enumerate() {
            f[(i, e)] = v;
        }
    }
    finish(spec, draws, f, &mut rng)
}

/// Periodic scenario: `f_d(x) = mu_d + alpha_d sin(x / rho_d)`.
pub fn gen_periodic_scenario(spec: &ScenarioSpec) -> Result<SimulatedDataset> {
    if !spec.kind.is_periodic() {
        return Err(Error::Domain(format!("{} is not a periodic scenario", spec.kind)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draws = draw_common(spec, &mut rng)?;
    let f = Matrix::from_fn(spec.n, spec.d, |i, e| {
        draws.mu[e] + periodic_function(draws.x_true[i], draws.rho[e], draws.alpha[e])
    });
    finish(spec, draws, f, &mut rng)
}

/// `alpha sin(x / rho)`.
pub fn periodic_function(x: f64, rho: f64, alpha: f64) -> f64 {
    alpha * (x / rho).sin()
}

/// Dispatches on the scenario kind.
pub fn generate(spec: &ScenarioSpec) -> Result<SimulatedDataset> {
    if spec.kind.is_periodic() {
        gen_periodic_scenario(spec)
    } else {
        gen_gp_scenario(spec)
    }
}

/// Seed of trial `trial` in a sweep rooted at `seed`; distinct trials get
/// well-separated seeds.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng.random()
}
