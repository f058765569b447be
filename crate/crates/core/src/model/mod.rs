//! Joint log-density of the multi-output latent-input GP and its gradient.
//!
//! The density is defined on an unconstrained vector laid out as
//!
//! | block      | length            | transform                     |
//! |------------|-------------------|-------------------------------|
//! | `x`        | `N`               | identity                      |
//! | `log rho`  | `D`               | `exp`                         |
//! | `log alpha`| `D`               | `exp`                         |
//! | `log sigma`| `D`               | `exp`                         |
//! | `mu`       | `D`               | identity                      |
//! | `beta`     | `M x D` or `N x D`| identity (row-major)          |
//! | `corr`     | `D (D - 1) / 2`   | partial-correlation Cholesky  |
//!
//! Weights are `M x D` basis coefficients for the Hilbert-space variant and
//! `N x D` whitened function values for the exact variant.

pub mod components;
pub mod correlation;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::basis::{eval_row, BasisConfig};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelHyper};
use crate::linalg::{self, Matrix};
use crate::priors::{normal_log_density, PriorSet, HALF_LN_2PI};
use crate::sampler::LogDensity;

pub use components::{
    exact_gp_functions, gp_functions_hsgp, gram_cholesky, gram_matrix, log_latent_prior, log_likelihood,
    mix_outputs,
};

/// How the latent functions are represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Variant {
    /// Reduced-rank Hilbert-space approximation.
    Hsgp(BasisConfig),
    /// Exact Gram-matrix Cholesky with whitened function values.
    Exact,
}

impl Variant {
    pub fn tag(&self) -> &'static str {
        match self {
            Variant::Hsgp(_) => "hsgp",
            Variant::Exact => "exact",
        }
    }
}

/// Everything about the model except the outputs `Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: KernelFamily,
    pub n_outputs: usize,
    pub variant: Variant,
    pub priors: PriorSet,
    pub x_tilde: Vec<f64>,
    /// Measurement SD of `x_tilde`.
    pub s: f64,
}

impl ModelSpec {
    pub fn new(
        family: KernelFamily,
        n_outputs: usize,
        variant: Variant,
        priors: PriorSet,
        x_tilde: Vec<f64>,
        s: f64,
    ) -> Result<Self> {
        if n_outputs == 0 {
            return Err(Error::Domain("at least one output dimension is required".into()));
        }
        if x_tilde.len() < 2 {
            return Err(Error::Domain(format!("need at least 2 observations, got {}", x_tilde.len())));
        }
        if x_tilde.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite value in x_tilde".into()));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("measurement SD must be positive, got {s}")));
        }
        if let Variant::Hsgp(cfg) = &variant {
            if cfg.m == 0 {
                return Err(Error::Domain("HSGP variant requires M >= 1".into()));
            }
            if let Some((i, v)) = x_tilde
                .iter()
                .enumerate()
                .find(|(_, v)| !((*v - cfg.center).abs() < cfg.half_width))
            {
                return Err(Error::BoundaryViolation {
                    index: i,
                    value: v - cfg.center,
                    half_width: cfg.half_width,
                });
            }
        }
        Ok(Self {
            family,
            n_outputs,
            variant,
            priors,
            x_tilde,
            s,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.x_tilde.len()
    }

    pub fn layout(&self) -> Layout {
        let weights_per_output = match &self.variant {
            Variant::Hsgp(cfg) => cfg.m,
            Variant::Exact => self.n_obs(),
        };
        Layout {
            n: self.n_obs(),
            d: self.n_outputs,
            weights_per_output,
        }
    }
}

/// Offsets of the parameter blocks inside the unconstrained vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub d: usize,
    pub weights_per_output: usize,
}

impl Layout {
    pub fn x(&self) -> Range<usize> {
        0..self.n
    }
    pub fn log_rho(&self) -> Range<usize> {
        self.n..self.n + self.d
    }
    pub fn log_alpha(&self) -> Range<usize> {
        self.n + self.d..self.n + 2 * self.d
    }
    pub fn log_sigma(&self) -> Range<usize> {
        self.n + 2 * self.d..self.n + 3 * self.d
    }
    pub fn mu(&self) -> Range<usize> {
        self.n + 3 * self.d..self.n + 4 * self.d
    }
    pub fn beta(&self) -> Range<usize> {
        let start = self.n + 4 * self.d;
        start..start + self.weights_per_output * self.d
    }
    pub fn corr(&self) -> Range<usize> {
        let start = self.beta().end;
        start..start + correlation::num_coordinates(self.d)
    }
    pub fn dim(&self) -> usize {
        self.corr().end
    }

    /// Names of the constrained parameters, in vector order.
    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        names.extend((1..=self.n).map(|i| format!("x[{i}]")));
        for block in ["rho", "alpha", "sigma", "mu"] {
            names.extend((1..=self.d).map(|e| format!("{block}[{e}]")));
        }
        for j in 1..=self.weights_per_output {
            names.extend((1..=self.d).map(|e| format!("beta[{j},{e}]")));
        }
        for i in 2..=self.d {
            names.extend((1..i).map(|j| format!("C[{i},{j}]")));
        }
        names
    }
}

/// Whether a constrained parameter name belongs to the reported set
/// (latent inputs, hyperparameters, mean offsets and correlations).
pub fn is_primary(name: &str) -> bool {
    !name.starts_with("beta[")
}

/// Parameters on their natural scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedParams {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
    pub mu: Vec<f64>,
    /// `weights_per_output x D`.
    pub beta: Matrix,
    /// Lower Cholesky factor `A` of the output correlation matrix.
    pub chol_corr: Matrix,
    /// Log-Jacobian of the whole unconstrained-to-constrained map.
    pub log_jacobian: f64,
}

impl ConstrainedParams {
    pub fn hyper(&self, e: usize) -> KernelHyper {
        KernelHyper {
            rho: self.rho[e],
            alpha: self.alpha[e],
        }
    }

    pub fn correlation(&self) -> Matrix {
        correlation::correlation_from_factor(&self.chol_corr)
    }
}

/// Maps an unconstrained vector to parameters on their natural scale.
pub fn constrain(params: &[f64], spec: &ModelSpec) -> Result<ConstrainedParams> {
    let lay = spec.layout();
    if params.len() != lay.dim() {
        return Err(Error::Shape(format!("parameter vector has length {}, expected {}", params.len(), lay.dim())));
    }
    let exp_block = |r: Range<usize>| params[r].iter().map(|v| v.exp()).collect::<Vec<_>>();
    let scale_jac: f64 = params[lay.log_rho().start..lay.log_sigma().end].iter().sum();
    let (a, corr_jac) = correlation::constrain(&params[lay.corr()], lay.d);
    Ok(ConstrainedParams {
        x: params[lay.x()].to_vec(),
        rho: exp_block(lay.log_rho()),
        alpha: exp_block(lay.log_alpha()),
        sigma: exp_block(lay.log_sigma()),
        mu: params[lay.mu()].to_vec(),
        beta: Matrix::from_vec(lay.weights_per_output, lay.d, params[lay.beta()].to_vec())?,
        chol_corr: a,
        log_jacobian: scale_jac + corr_jac,
    })
}

/// Inverse of [`constrain`].
pub fn unconstrain(c: &ConstrainedParams, spec: &ModelSpec) -> Result<Vec<f64>> {
    let lay = spec.layout();
    let check = |name: &str, len: usize, want: usize| -> Result<()> {
        if len != want {
            Err(Error::Shape(format!("{name} has length {len}, expected {want}")))
        } else {
            Ok(())
        }
    };
    check("x", c.x.len(), lay.n)?;
    check("rho", c.rho.len(), lay.d)?;
    check("alpha", c.alpha.len(), lay.d)?;
    check("sigma", c.sigma.len(), lay.d)?;
    check("mu", c.mu.len(), lay.d)?;
    check("beta", c.beta.as_slice().len(), lay.weights_per_output * lay.d)?;
    check("chol_corr", c.chol_corr.rows(), lay.d)?;
    if c.rho.iter().chain(&c.alpha).chain(&c.sigma).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("scale parameters must be positive".into()));
    }
    let mut v = Vec::with_capacity(lay.dim());
    v.extend_from_slice(&c.x);
    v.extend(c.rho.iter().map(|r| r.ln()));
    v.extend(c.alpha.iter().map(|r| r.ln()));
    v.extend(c.sigma.iter().map(|r| r.ln()));
    v.extend_from_slice(&c.mu);
    v.extend_from_slice(c.beta.as_slice());
    v.extend(correlation::unconstrain(&c.chol_corr));
    Ok(v)
}

/// Additive pieces of the joint log-density.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogJointTerms {
    pub latent_prior: f64,
    pub likelihood: f64,
    /// Truncated-normal priors on rho, alpha, sigma (normalizer dropped).
    pub hyper_prior: f64,
    pub mean_prior: f64,
    pub weight_prior: f64,
    /// LKJ density of the Cholesky factor, without its normalizing constant.
    pub lkj: f64,
    /// Log-Jacobian of the unconstrained parameterization.
    pub jacobian: f64,
}

impl LogJointTerms {
    pub fn total(&self) -> f64 {
        self.latent_prior
            + self.likelihood
            + self.hyper_prior
            + self.mean_prior
            + self.weight_prior
            + self.lkj
            + self.jacobian
    }
}

/// A model specification paired with its observed outputs.
#[derive(Debug, Clone)]
pub struct JointModel {
    spec: ModelSpec,
    y: Matrix,
    layout: Layout,
    frequencies: Vec<f64>,
}

impl JointModel {
    pub fn new(spec: ModelSpec, y: Matrix) -> Result<Self> {
        if y.rows() != spec.n_obs() || y.cols() != spec.n_outputs {
            return Err(Error::Shape(format!(
                "outputs are {}x{}, model expects {}x{}",
                y.rows(),
                y.cols(),
                spec.n_obs(),
                spec.n_outputs
            )));
        }
        if let Some(pos) = y.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite output at row {}, column {}",
                pos / y.cols() + 1,
                pos % y.cols() + 1
            )));
        }
        let frequencies = match &spec.variant {
            Variant::Hsgp(cfg) => cfg.frequencies(),
            Variant::Exact => Vec::new(),
        };
        let layout = spec.layout();
        Ok(Self {
            spec,
            y,
            layout,
            frequencies,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn outputs(&self) -> &Matrix {
        &self.y
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Starting point: `x = x_tilde`, scales at their prior means, mean
    /// offsets at the prior mean, zero weights and identity correlation.
    pub fn initial_position(&self) -> Vec<f64> {
        let lay = self.layout;
        let p = &self.spec.priors;
        let mut q = vec![0.0; lay.dim()];
        q[lay.x()].copy_from_slice(&self.spec.x_tilde);
        q[lay.log_rho()].fill(p.rho.mean.max(1e-3).ln());
        q[lay.log_alpha()].fill(p.alpha.mean.max(1e-3).ln());
        q[lay.log_sigma()].fill(p.sigma.mean.max(1e-3).ln());
        q[lay.mu()].fill(p.mu.mean);
        q
    }

    /// Constrained values in [`Layout::names`] order; correlations are the
    /// off-diagonal entries of `C = A A^T`.
    pub fn constrained_values(&self, q: &[f64]) -> Vec<f64> {
        let lay = self.layout;
        let mut out = Vec::with_capacity(lay.dim());
        out.extend_from_slice(&q[lay.x()]);
        out.extend(q[lay.log_rho().start..lay.log_sigma().end].iter().map(|v| v.exp()));
        out.extend_from_slice(&q[lay.mu()]);
        out.extend_from_slice(&q[lay.beta()]);
        let (a, _) = correlation::constrain(&q[lay.corr()], lay.d);
        let c = correlation::correlation_from_factor(&a);
        for i in 1..lay.d {
            for j in 0..i {
                out.push(c[(i, j)]);
            }
        }
        out
    }

    /// Term-by-term breakdown; `None` where the density is zero (boundary
    /// violation, failed factorization or non-finite intermediate).
    pub fn terms(&self, q: &[f64]) -> Option<LogJointTerms> {
        self.evaluate(q, None)
    }

    pub fn log_joint(&self, q: &[f64]) -> f64 {
        match self.evaluate(q, None) {
            Some(t) => {
                let v = t.total();
                if v.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    v
                }
            }
            None => f64::NEG_INFINITY,
        }
    }

    /// Log-density and its gradient; the gradient is meaningless (NaN) where
    /// the density is `-inf`.
    pub fn grad_log_joint(&self, q: &[f64]) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; self.layout.dim()];
        let v = self.log_density_and_gradient(q, &mut g);
        (v, g)
    }

    fn evaluate(&self, q: &[f64], mut grad: Option<&mut [f64]>) -> Option<LogJointTerms> {
        let lay = self.layout;
        let (n, d) = (lay.n, lay.d);
        assert_eq!(q.len(), lay.dim(), "parameter vector length");
        let spec = &self.spec;
        let pri = &spec.priors;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut t = LogJointTerms::default();

        let x = &q[lay.x()];
        let s2 = spec.s * spec.s;
        let log_s = spec.s.ln();
        for (i, (xi, ti)) in x.iter().zip(&spec.x_tilde).enumerate() {
            let dx = xi - ti;
            t.latent_prior += -0.5 * dx * dx / s2 - log_s - HALF_LN_2PI;
            if let Some(g) = grad.as_deref_mut() {
                g[i] = -dx / s2;
            }
        }

        let rho: Vec<f64> = q[lay.log_rho()].iter().map(|v| v.exp()).collect();
        let alpha: Vec<f64> = q[lay.log_alpha()].iter().map(|v| v.exp()).collect();
        let sigma: Vec<f64> = q[lay.log_sigma()].iter().map(|v| v.exp()).collect();
        for (range, values, prior) in [
            (lay.log_rho(), &rho, &pri.rho),
            (lay.log_alpha(), &alpha, &pri.alpha),
            (lay.log_sigma(), &sigma, &pri.sigma),
        ] {
            for (k, &v) in values.iter().enumerate() {
                t.hyper_prior += prior.log_density_unnormalized(v);
                t.jacobian += q[range.start + k];
                if let Some(g) = grad.as_deref_mut() {
                    g[range.start + k] = prior.log_density_derivative(v) * v + 1.0;
                }
            }
        }
        if rho.iter().chain(&alpha).chain(&sigma).any(|v| !(*v > 0.0 && v.is_finite())) {
            return None;
        }

        let mu = &q[lay.mu()];
        for (k, &m) in mu.iter().enumerate() {
            t.mean_prior += normal_log_density(m, pri.mu.mean, pri.mu.sd);
            if let Some(g) = grad.as_deref_mut() {
                g[lay.mu().start + k] = -(m - pri.mu.mean) / (pri.mu.sd * pri.mu.sd);
            }
        }

        let beta = &q[lay.beta()];
        for (k, &b) in beta.iter().enumerate() {
            t.weight_prior += -0.5 * b * b - HALF_LN_2PI;
            if let Some(g) = grad.as_deref_mut() {
                g[lay.beta().start + k] = -b;
            }
        }

        let coords = &q[lay.corr()];
        let (a, corr_jac) = correlation::constrain(coords, d);
        t.jacobian += corr_jac;
        t.lkj = correlation::lkj_log_density(&a, pri.eta) + correlation::cholesky_jacobian(&a);

        // Latent functions F (N x D) before mixing.
        let mut f = Matrix::zeros(n, d);
        let hsgp_cache;
        let mut exact_cache: Vec<(Matrix, f64)> = Vec::new();
        match &spec.variant {
            Variant::Hsgp(cfg) => {
                let m = cfg.m;
                let mut phi = Matrix::zeros(n, m);
                let mut dphi = if grad.is_some() { Matrix::zeros(n, m) } else { Matrix::zeros(0, 0) };
                for i in 0..n {
                    let xc = x[i] - cfg.center;
                    if !(xc.abs() < cfg.half_width) {
                        return None;
                    }
                    if grad.is_some() {
                        eval_row(xc, cfg.half_width, phi.row_mut(i), Some(dphi.row_mut(i)));
                    } else {
                        eval_row(xc, cfg.half_width, phi.row_mut(i), None);
                    }
                }
                // sqrt spectral weights, M x D.
                let mut sqrt_s = Matrix::zeros(m, d);
                for e in 0..d {
                    let hy = KernelHyper { rho: rho[e], alpha: alpha[e] };
                    for (j, w) in self.frequencies.iter().enumerate() {
                        sqrt_s[(j, e)] = spec.family.spectral(*w, hy).sqrt();
                    }
                }
                let mut w = Matrix::zeros(m, d);
                for j in 0..m {
                    for e in 0..d {
                        w[(j, e)] = sqrt_s[(j, e)] * beta[j * d + e];
                    }
                }
                for i in 0..n {
                    let fi = f.row_mut(i);
                    fi.copy_from_slice(mu);
                    for (j, &p) in phi.row(i).iter().enumerate() {
                        for (o, wv) in fi.iter_mut().zip(w.row(j)) {
                            *o += p * wv;
                        }
                    }
                }
                hsgp_cache = Some((phi, dphi, sqrt_s, w));
            }
            Variant::Exact => {
                hsgp_cache = None;
                for e in 0..d {
                    let hy = KernelHyper { rho: rho[e], alpha: alpha[e] };
                    let (l, jitter) = components::gram_cholesky(x, spec.family, hy).ok()?;
                    for i in 0..n {
                        let mut v = mu[e];
                        for k in 0..=i {
                            v += l[(i, k)] * beta[k * d + e];
                        }
                        f[(i, e)] = v;
                    }
                    exact_cache.push((l, jitter));
                }
            }
        }

        // Mixing and likelihood.
        let mut g_res = Matrix::zeros(n, d);
        let log_sigma_sum: f64 = q[lay.log_sigma()].iter().sum();
        let mut sq = 0.0;
        let inv_var: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
        let mut sum_sq_by_dim = vec![0.0; d];
        for i in 0..n {
            let fi = f.row(i);
            for dd in 0..d {
                let fs: f64 = a.row(dd)[..=dd].iter().zip(fi).map(|(x, y)| x * y).sum();
                let r = self.y[(i, dd)] - fs;
                let r2 = r * r * inv_var[dd];
                sq += r2;
                sum_sq_by_dim[dd] += r2;
                g_res[(i, dd)] = r * inv_var[dd];
            }
        }
        t.likelihood = -0.5 * sq - n as f64 * (log_sigma_sum + d as f64 * HALF_LN_2PI);
        if !t.total().is_finite() {
            return None;
        }

        let Some(g) = grad else {
            return Some(t);
        };

        for dd in 0..d {
            g[lay.log_sigma().start + dd] += sum_sq_by_dim[dd] - n as f64;
        }
        // Gbar = G A (adjoint of F), Abar[dd][e] = sum_i G[i][dd] F[i][e].
        let mut g_bar = Matrix::zeros(n, d);
        let mut a_bar = Matrix::zeros(d, d);
        for i in 0..n {
            let gi = g_res.row(i);
            let fi = f.row(i);
            for dd in 0..d {
                let gv = gi[dd];
                let arow = a.row(dd);
                for e in 0..=dd {
                    g_bar[(i, e)] += gv * arow[e];
                    a_bar[(dd, e)] += gv * fi[e];
                }
            }
        }
        for e in 0..d {
            let s: f64 = (0..n).map(|i| g_bar[(i, e)]).sum();
            g[lay.mu().start + e] += s;
        }

        match (&spec.variant, hsgp_cache) {
            (Variant::Hsgp(cfg), Some((phi, dphi, sqrt_s, w))) => {
                let m = cfg.m;
                // PG = Phi^T Gbar (M x D); DW = dPhi W (N x D).
                let mut pg = Matrix::zeros(m, d);
                for i in 0..n {
                    let gb = g_bar.row(i);
                    let dwi: Vec<f64> = {
                        let mut acc = vec![0.0; d];
                        for (j, &dp) in dphi.row(i).iter().enumerate() {
                            for (o, wv) in acc.iter_mut().zip(w.row(j)) {
                                *o += dp * wv;
                            }
                        }
                        acc
                    };
                    g[i] += dwi.iter().zip(gb).map(|(a, b)| a * b).sum::<f64>();
                    for (j, &p) in phi.row(i).iter().enumerate() {
                        for (o, gv) in pg.row_mut(j).iter_mut().zip(gb) {
                            *o += p * gv;
                        }
                    }
                }
                let b0 = lay.beta().start;
                for e in 0..d {
                    let mut d_log_alpha = 0.0;
                    let mut d_log_rho = 0.0;
                    for j in 0..m {
                        let pgv = pg[(j, e)];
                        g[b0 + j * d + e] += sqrt_s[(j, e)] * pgv;
                        let adj = beta[j * d + e] * pgv * sqrt_s[(j, e)];
                        d_log_alpha += adj;
                        d_log_rho += 0.5 * adj * spec.family.spectral_dlog_rho(self.frequencies[j], rho[e]);
                    }
                    g[lay.log_alpha().start + e] += d_log_alpha;
                    g[lay.log_rho().start + e] += d_log_rho;
                }
            }
            _ => {
                let b0 = lay.beta().start;
                for (e, (l, jitter)) in exact_cache.iter().enumerate() {
                    let hy = KernelHyper { rho: rho[e], alpha: alpha[e] };
                    let gb: Vec<f64> = (0..n).map(|i| g_bar[(i, e)]).collect();
                    // d/d beta = L^T gbar
                    for k in 0..n {
                        let s: f64 = (k..n).map(|i| l[(i, k)] * gb[i]).sum();
                        g[b0 + k * d + e] += s;
                    }
                    let l_bar = Matrix::from_fn(n, n, |i, k| if k <= i { gb[i] * beta[k * d + e] } else { 0.0 });
                    let k_bar = linalg::cholesky_backward(l, &l_bar);
                    let mut d_log_alpha = 0.0;
                    let mut d_log_rho = 0.0;
                    for i in 0..n {
                        d_log_alpha += 2.0 * k_bar[(i, i)] * (hy.alpha * hy.alpha + jitter);
                        for k in 0..i {
                            let diff = x[i] - x[k];
                            let r = diff.abs();
                            let kb = k_bar[(i, k)];
                            let (kv, dr, dlog_rho) = spec.family.covariance_terms(r, hy);
                            d_log_alpha += 4.0 * kb * kv;
                            d_log_rho += 2.0 * kb * dlog_rho;
                            let dk = 2.0 * kb * dr * diff.signum();
                            g[i] += dk;
                            g[k] -= dk;
                        }
                    }
                    g[lay.log_alpha().start + e] += d_log_alpha;
                    g[lay.log_rho().start + e] += d_log_rho;
                }
            }
        }

        let coef = correlation::lkj_diag_coefficients(d, pri.eta);
        correlation::backward(coords, &a, &a_bar, &coef, &mut g[lay.corr()]);
        Some(t)
    }
}

impl LogDensity for JointModel {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn log_density_and_gradient(&self, position: &[f64], gradient: &mut [f64]) -> f64 {
        match self.evaluate(position, Some(gradient)) {
            Some(t) => t.total(),
            None => {
                gradient.fill(f64::NAN);
                f64::NEG_INFINITY
            }
        }
    }

    fn param_names(&self) -> Vec<String> {
        self.layout.names()
    }

    fn constrain_draw(&self, position: &[f64]) -> Vec<f64> {
        self.constrained_values(position)
    }
}

/// Joint log-density at `params`; `-inf` outside the support.
pub fn log_joint(params: &[f64], spec: &ModelSpec, y: &Matrix) -> Result<f64> {
    Ok(JointModel::new(spec.clone(), y.clone())?.log_joint(params))
}

/// Joint log-density and its gradient at `params`.
pub fn grad_log_joint(params: &[f64], spec: &ModelSpec, y: &Matrix) -> Result<(f64, Vec<f64>)> {
    let model = JointModel::new(spec.clone(), y.clone())?;
    if params.len() != model.layout().dim() {
        return Err(Error::Shape(format!(
            "parameter vector has length {}, expected {}",
            params.len(),
            model.layout().dim()
        )));
    }
    Ok(model.grad_log_joint(params))
}
