use super::{box_margin, inv_logit_eps, logit_eps, AdaptSettings, Move, ProposalParams, Schedule};
use crate::error::Result;

/// Outcome of one individual-adaptation update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EiaUpdate {
    /// Largest absolute change of any logit.
    pub max_step: f64,
    /// The step size used.
    pub phi: f64,
    /// Coordinates whose logit moved by more than `phi`.
    pub violations: usize,
}

/// Individually adapted `A_j`, `D_j`, stored on the `logit_eps` scale.
#[derive(Debug, Clone)]
pub struct EiaState {
    logit_a: Vec<f64>,
    logit_d: Vec<f64>,
    params: ProposalParams,
    tau_l: f64,
    tau_u: f64,
    schedule: Schedule,
    updates: u64,
}

impl EiaState {
    /// Starts from `A_j = h` and `D_j` just below `1 - eps`.
    pub fn new(p: usize, h: f64, settings: &AdaptSettings) -> Result<Self> {
        settings.validate(p)?;
        let eps = settings.eps_for(p);
        let m = box_margin(eps);
        let a0 = h.clamp(eps + m, 1.0 - eps - m);
        let d0 = 1.0 - eps - m;
        let params = ProposalParams::constant(p, a0, d0, eps)?;
        let la = logit_eps(a0, eps)?;
        let ld = logit_eps(d0, eps)?;
        Ok(Self {
            logit_a: vec![la; p],
            logit_d: vec![ld; p],
            params,
            tau_l: settings.tau_l,
            tau_u: settings.tau_u,
            schedule: settings.schedule(),
            updates: 0,
        })
    }

    pub fn params(&self) -> &ProposalParams {
        &self.params
    }

    pub fn logit_a(&self) -> &[f64] {
        &self.logit_a
    }

    pub fn logit_d(&self) -> &[f64] {
        &self.logit_d
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Applies the expansion, shrinkage and correction rules at iteration
    /// `i` (1-based) after a proposal with acceptance probability `a_i`.
    /// Only flipped coordinates change.
    pub fn update(&mut self, mv: &Move, a_i: f64, i: u64) -> EiaUpdate {
        let phi = self.schedule.phi(i);
        let d_u = if a_i >= self.tau_u { 1.0 } else { 0.0 };
        let d_l = if a_i >= self.tau_l { 1.0 } else { 0.0 };
        let eps = self.params.eps();
        let mut out = EiaUpdate {
            phi,
            ..Default::default()
        };
        // Proposed additions move A by phi (2 d_U - 1) and D by phi d_L,
        // proposed deletions the other way round.
        let moves = mv
            .additions
            .iter()
            .map(|&j| (j, phi * (2.0 * d_u - 1.0), phi * d_l))
            .chain(
                mv.removals
                    .iter()
                    .map(|&j| (j, phi * d_l, phi * (2.0 * d_u - 1.0))),
            );
        for (j, da, dd) in moves {
            let (old_a, old_d) = (self.logit_a[j], self.logit_d[j]);
            self.logit_a[j] += da;
            self.logit_d[j] += dd;
            let step = (self.logit_a[j] - old_a)
                .abs()
                .max((self.logit_d[j] - old_d).abs());
            let scale = old_a.abs().max(old_d.abs()).max(1.0);
            if step > phi + 4.0 * f64::EPSILON * scale {
                out.violations += 1;
            }
            out.max_step = out.max_step.max(step);
            self.params.set(
                j,
                inv_logit_eps(self.logit_a[j], eps),
                inv_logit_eps(self.logit_d[j], eps),
            );
        }
        self.updates += 1;
        out
    }
}
