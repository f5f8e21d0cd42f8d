use super::{box_margin, inv_logit_eps, logit_eps, AdaptSettings, ProposalParams, Schedule};
use crate::error::Result;

/// Outcome of one scaled-adaptation update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AsiUpdate {
    /// `max_j |pi_hat_j change|`.
    pub pi_step: f64,
    /// `|logit zeta change|` before the floor is applied.
    pub zeta_step: f64,
    pub phi: f64,
    /// Bound violations of either step.
    pub violations: usize,
    /// The floor `zeta >= 1 / Delta` could not be met inside the box.
    pub floor_capped: bool,
}

/// Running inclusion estimates `pi_hat` and the common scale `zeta`.
#[derive(Debug, Clone)]
pub struct AsiState {
    pi_hat: Vec<f64>,
    rb_count: u64,
    zeta: f64,
    logit_zeta: f64,
    kappa: f64,
    tau: f64,
    schedule: Schedule,
    adapt_rb: bool,
    params: ProposalParams,
}

impl AsiState {
    /// Starts from `pi_hat_j = h` and the configured initial `zeta`.
    pub fn new(p: usize, h: f64, settings: &AdaptSettings) -> Result<Self> {
        settings.validate(p)?;
        let eps = settings.eps_for(p);
        let zeta = settings.initial_zeta;
        let mut s = Self {
            pi_hat: vec![h; p],
            rb_count: 0,
            zeta,
            logit_zeta: logit_eps(zeta, eps)?,
            kappa: settings.kappa,
            tau: settings.tau,
            schedule: settings.schedule(),
            adapt_rb: true,
            params: ProposalParams::constant(p, 0.5, 0.5, eps)?,
        };
        s.refresh_params();
        Ok(s)
    }

    pub fn params(&self) -> &ProposalParams {
        &self.params
    }

    pub fn pi_hat(&self) -> &[f64] {
        &self.pi_hat
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn rb_count(&self) -> u64 {
        self.rb_count
    }

    pub fn adapt_rb(&self) -> bool {
        self.adapt_rb
    }

    /// Stops (or resumes) accumulating conditional inclusion rows.
    pub fn set_adapt_rb(&mut self, on: bool) {
        self.adapt_rb = on;
    }

    /// `kappa + (1 - 2 kappa) pi_hat_j`.
    #[inline]
    pub fn pi_tilde(&self, j: usize) -> f64 {
        self.kappa + (1.0 - 2.0 * self.kappa) * self.pi_hat[j]
    }

    /// `Delta = 2 sum_j min(pi_tilde_j, 1 - pi_tilde_j)`.
    pub fn delta(&self) -> f64 {
        2.0 * (0..self.pi_hat.len())
            .map(|j| {
                let t = self.pi_tilde(j);
                t.min(1.0 - t)
            })
            .sum::<f64>()
    }

    /// Folds one row into the running mean; returns the largest change.
    pub fn accumulate(&mut self, row: &[f64]) -> f64 {
        assert_eq!(row.len(), self.pi_hat.len());
        let w = 1.0 / (self.rb_count + 1) as f64;
        let mut step = 0.0f64;
        for (ph, &r) in self.pi_hat.iter_mut().zip(row) {
            let d = (r - *ph) * w;
            // the first row replaces the prior guess exactly
            *ph = if self.rb_count == 0 {
                r
            } else {
                (*ph + d).clamp(0.0, 1.0)
            };
            step = step.max(d.abs());
        }
        self.rb_count += 1;
        step
    }

    /// One update at iteration `i` (1-based): accumulate `row` when given
    /// and accumulation is on, step `logit zeta` by `phi_i (a_i - tau)`,
    /// apply the floor `zeta >= 1 / Delta` and recompute `A`, `D`.
    pub fn update(&mut self, row: Option<&[f64]>, a_i: f64, i: u64) -> AsiUpdate {
        let phi = self.schedule.phi(i);
        let mut out = AsiUpdate {
            phi,
            ..Default::default()
        };
        if let (Some(row), true) = (row, self.adapt_rb) {
            out.pi_step = self.accumulate(row);
            if out.pi_step > 2.0 / (i + 1) as f64 {
                out.violations += 1;
            }
        }
        let eps = self.params.eps();
        let old = self.logit_zeta;
        self.logit_zeta += phi * (a_i - self.tau);
        out.zeta_step = (self.logit_zeta - old).abs();
        if out.zeta_step > phi + 4.0 * f64::EPSILON * old.abs().max(1.0) {
            out.violations += 1;
        }
        let mut zeta = inv_logit_eps(self.logit_zeta, eps);
        let delta = self.delta();
        let mut reset = false;
        if zeta * delta < 1.0 {
            zeta = 1.0 / delta;
            reset = true;
        }
        let m = box_margin(eps);
        let capped = zeta.clamp(eps + m, 1.0 - eps - m);
        if capped != zeta {
            out.floor_capped = reset;
            zeta = capped;
            reset = true;
        }
        self.zeta = zeta;
        if reset {
            self.logit_zeta = logit_eps(zeta, eps).expect("zeta kept inside the box");
        }
        self.refresh_params();
        out
    }

    /// `A_j = zeta min(1, odds_j)`, `D_j = zeta min(1, 1 / odds_j)` with
    /// `odds_j = pi_tilde_j / (1 - pi_tilde_j)`, boxed into `[eps, 1 - eps]`.
    pub fn refresh_params(&mut self) {
        for j in 0..self.pi_hat.len() {
            let t = self.pi_tilde(j);
            let odds = t / (1.0 - t);
            self.params.set(
                j,
                self.zeta * odds.min(1.0),
                self.zeta * (1.0 / odds).min(1.0),
            );
        }
    }
}
