use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};

/// Prior on the slab scale `g`, where `V_gamma = g I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GPrior {
    Fixed { value: f64 },
    HalfCauchy { scale: f64 },
}

/// Prior on the per-variable inclusion probability `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InclusionPrior {
    Fixed { h: f64 },
    Beta { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub g: GPrior,
    pub h: InclusionPrior,
}

impl PriorSpec {
    pub fn fixed(g: f64, h: f64) -> Self {
        Self {
            g: GPrior::Fixed { value: g },
            h: InclusionPrior::Fixed { h },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.g {
            GPrior::Fixed { value } if !(value > 0.0 && value.is_finite()) => {
                return Err(Error::Config(format!("g must be positive, got {value}")))
            }
            GPrior::HalfCauchy { scale } if !(scale > 0.0 && scale.is_finite()) => {
                return Err(Error::Config(format!(
                    "half-Cauchy scale must be positive, got {scale}"
                )))
            }
            _ => {}
        }
        match self.h {
            InclusionPrior::Fixed { h } if !(h > 0.0 && h < 1.0) => {
                Err(Error::Config(format!("h must lie in (0, 1), got {h}")))
            }
            InclusionPrior::Beta { a, b } if !(a > 0.0 && b > 0.0) => Err(Error::Config(format!(
                "Beta(a, b) needs a, b > 0, got ({a}, {b})"
            ))),
            _ => Ok(()),
        }
    }

    pub fn fixed_g(&self) -> Option<f64> {
        match self.g {
            GPrior::Fixed { value } => Some(value),
            GPrior::HalfCauchy { .. } => None,
        }
    }

    /// Starting value of `g`: the fixed value, or the half-Cauchy scale
    /// (its median).
    pub fn initial_g(&self) -> f64 {
        match self.g {
            GPrior::Fixed { value } => value,
            GPrior::HalfCauchy { scale } => scale,
        }
    }

    /// Prior mean of `h`.
    pub fn mean_h(&self) -> f64 {
        match self.h {
            InclusionPrior::Fixed { h } => h,
            InclusionPrior::Beta { a, b } => a / (a + b),
        }
    }

    /// `log p(gamma)` for a model of size `p_gamma` out of `p`. With a Beta
    /// hyperprior `h` is integrated out: `B(a + p_gamma, b + p - p_gamma) / B(a, b)`.
    pub fn log_model_prior(&self, p_gamma: usize, p: usize) -> f64 {
        let k = p_gamma as f64;
        let rest = (p - p_gamma) as f64;
        match self.h {
            InclusionPrior::Fixed { h } => k * h.ln() + rest * (-h).ln_1p(),
            InclusionPrior::Beta { a, b } => ln_beta(a + k, b + rest) - ln_beta(a, b),
        }
    }

    /// Prior probability that a variable is included given that
    /// `others_included` of the remaining `p - 1` variables are.
    pub fn conditional_inclusion(&self, others_included: usize, p: usize) -> f64 {
        match self.h {
            InclusionPrior::Fixed { h } => h,
            InclusionPrior::Beta { a, b } => {
                (others_included as f64 + a) / ((p - 1) as f64 + a + b)
            }
        }
    }

    /// Log density of `g` under its hyperprior; zero for a fixed `g`.
    pub fn log_g_density(&self, g: f64) -> f64 {
        match self.g {
            GPrior::Fixed { .. } => 0.0,
            GPrior::HalfCauchy { scale } => {
                let r = g / scale;
                (2.0 / (std::f64::consts::PI * scale)).ln() - r.mul_add(r, 1.0).ln()
            }
        }
    }
}
