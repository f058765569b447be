//! Latent-variable Gaussian processes with Hilbert-space basis
//! approximations.
//!
//! The crate covers the full pipeline for recovering latent inputs `x` of a
//! multi-output GP from noisy proxies `x_tilde`:
//!
//! * [`kernels`] and [`basis`]: stationary kernels, spectral densities and
//!   the Laplacian eigenbasis on `[-L, L]`.
//! * [`model`]: the joint log-density and its gradient for the reduced-rank
//!   and exact variants.
//! * [`sampler`]: adaptive multinomial NUTS.
//! * [`diagnostics`]: rank-normalized split-R-hat, bulk/tail ESS and
//!   posterior summaries.
//! * [`sbc`]: simulation-based calibration with the ECDF-based score.
//! * [`simgen`]: data generators for the benchmark scenarios.
//! * [`io`] and [`cli`]: file formats and the `lvhsgp` command line.

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod priors;
pub mod sampler;
pub mod sbc;
pub mod simgen;

pub use basis::{BasisConfig, BasisMatrix};
pub use error::{Error, Result};
pub use kernels::{KernelFamily, KernelHyper};
pub use linalg::Matrix;
pub use model::{JointModel, ModelSpec, Variant};
pub use priors::{PriorSet, TruncatedNormal};
pub use sampler::{ChainDraws, LogDensity, SamplerConfig};
