//! Adaptive Metropolis-Hastings samplers for Bayesian variable selection in
//! the normal linear model.
//!
//! The model space is `{0,1}^p`: each coordinate of a [`GammaVector`] says
//! whether a covariate enters the regression. Regression coefficients, the
//! intercept and the error variance are integrated out analytically under a
//! conjugate spike-and-slab prior, so every sampler here moves on model
//! indicators only.
//!
//! Modules, bottom up:
//!
//! * [`model`]: datasets, priors, the marginal likelihood and its
//!   incrementally maintained sufficient statistics, Bayes factors and
//!   Rao-Blackwellised conditional inclusion probabilities.
//! * [`proposal`]: the product-form proposal, Metropolis-Hastings acceptance
//!   and the two adaptation laws (exploratory individual adaptation and
//!   adaptively scaled individual adaptation).
//! * [`sampler`]: chain state, the kernel registry, multi-chain runs and
//!   adaptive parallel tempering.
//! * [`idealized`]: product targets with closed-form mixing quantities and
//!   brute-force posterior enumeration.
//! * [`diagnostics`]: inclusion-probability estimators, effective sample size
//!   and relative efficiency.
//! * [`io`]: synthetic data, CSV ingestion, configuration and result files.

pub mod diagnostics;
pub mod error;
pub mod idealized;
pub mod io;
pub mod model;
pub mod proposal;
pub mod rng;
pub mod sampler;

pub use diagnostics::RunOutput;
pub use error::{Error, ModelError, Result};
pub use model::{Dataset, GPrior, GammaVector, InclusionPrior, PriorSpec, SuffStats};
pub use proposal::{AdaptSettings, ProposalParams};
pub use sampler::{KernelRegistry, RunConfig};

/// Version stamp recorded in run summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
