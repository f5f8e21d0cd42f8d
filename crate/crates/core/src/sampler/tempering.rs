use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proposal::Schedule;

/// Parallel-tempering options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtConfig {
    /// Number of temperatures `m`, the coldest being 1.
    pub levels: usize,
    /// Swap acceptance rate the ladder adapts towards.
    pub swap_target: f64,
    /// All levels share one set of proposal parameters.
    pub share_params: bool,
    pub adapt_ladder: bool,
}

impl Default for PtConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            swap_target: 0.234,
            share_params: false,
            adapt_ladder: true,
        }
    }
}

impl PtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 1 {
            return Err(Error::Config(
                "parallel tempering needs at least one level".into(),
            ));
        }
        if !(self.swap_target > 0.0 && self.swap_target < 1.0) {
            return Err(Error::Config(format!(
                "swap target must lie in (0, 1), got {}",
                self.swap_target
            )));
        }
        Ok(())
    }
}

/// Temperatures `t_1 < ... < t_m = 1` parametrized by log-gaps:
/// `t_k = t_{k+1} sigma(-rho_k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtLadder {
    temps: Vec<f64>,
    rho: Vec<f64>,
    pub swap_target: f64,
    /// Swap attempts and acceptances per adjacent pair `(k, k+1)`.
    pub swap_attempts: Vec<u64>,
    pub swap_accepts: Vec<u64>,
    #[serde(skip)]
    schedule: Schedule,
}

fn sigma(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl PtLadder {
    /// Geometric ladder `t_k = 2^(k - m)`, i.e. all `rho_k = 0`.
    pub fn geometric(levels: usize, swap_target: f64, schedule: Schedule) -> Self {
        Self::from_rho(vec![0.0; levels.saturating_sub(1)], swap_target, schedule)
    }

    pub fn from_rho(rho: Vec<f64>, swap_target: f64, schedule: Schedule) -> Self {
        let m = rho.len() + 1;
        let mut l = Self {
            temps: vec![1.0; m],
            rho,
            swap_target,
            swap_attempts: vec![0; m - 1],
            swap_accepts: vec![0; m - 1],
            schedule,
        };
        l.rebuild();
        l
    }

    fn rebuild(&mut self) {
        let m = self.temps.len();
        self.temps[m - 1] = 1.0;
        for k in (0..m - 1).rev() {
            self.temps[k] = self.temps[k + 1] * sigma(-self.rho[k]);
        }
    }

    pub fn levels(&self) -> usize {
        self.temps.len()
    }

    /// Increasing temperatures, last is 1.
    pub fn temps(&self) -> &[f64] {
        &self.temps
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// `min(1, exp((t_k - t_{k+1}) (log m_{k+1} - log m_k)))` for exchanging
    /// the states of levels `k` and `k + 1`.
    pub fn swap_prob(&self, k: usize, log_m_k: f64, log_m_k1: f64) -> f64 {
        let r = (self.temps[k] - self.temps[k + 1]) * (log_m_k1 - log_m_k);
        if r >= 0.0 {
            1.0
        } else if r.is_nan() {
            0.0
        } else {
            r.exp()
        }
    }

    pub fn record_swap(&mut self, k: usize, accepted: bool) {
        self.swap_attempts[k] += 1;
        self.swap_accepts[k] += accepted as u64;
    }

    /// `rho_k += phi_i (a_swap - target)`, then rebuilds the temperatures.
    pub fn adapt(&mut self, k: usize, swap_prob: f64, i: u64) {
        self.rho[k] += self.schedule.phi(i) * (swap_prob - self.swap_target);
        self.rebuild();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_default() {
        let l = PtLadder::geometric(4, 0.234, Schedule::default());
        assert_eq!(l.temps(), &[0.125, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn swap_probability_cases() {
        let l = PtLadder::geometric(3, 0.234, Schedule::default());
        assert_eq!(l.swap_prob(0, -10.0, -10.0), 1.0);
        // the hotter level holds the better model: always swap it down
        assert_eq!(l.swap_prob(1, -10.0, -20.0), 1.0);
        let a = l.swap_prob(1, -20.0, -10.0);
        assert!((a - (-0.5f64 * 10.0).exp()).abs() < 1e-15);
        let flat = PtLadder::from_rho(vec![-50.0], 0.234, Schedule::default());
        assert!((flat.swap_prob(0, 0.0, -3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn adaptation_direction() {
        let mut l = PtLadder::geometric(3, 0.234, Schedule::default());
        let before = l.clone();
        l.adapt(0, 0.234, 5);
        assert_eq!(l.temps(), before.temps());
        let mut last = l.temps()[0];
        for i in 1..20 {
            l.adapt(0, 1.0, i);
            assert!(l.temps()[0] < last);
            last = l.temps()[0];
        }
        assert_eq!(l.temps()[2], 1.0);
        assert!(l.temps().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rebuild_round_trip() {
        let rho = vec![0.3, -1.2, 2.0];
        let l = PtLadder::from_rho(rho.clone(), 0.234, Schedule::default());
        let t = l.temps();
        for k in 0..3 {
            let back = -((t[k] / t[k + 1]) / (1.0 - t[k] / t[k + 1])).ln();
            assert!((back - rho[k]).abs() < 1e-12);
        }
    }
}
