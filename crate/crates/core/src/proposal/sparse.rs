use rand::Rng;

use super::{log_q_ratio, FlipSet, Move, ProposalParams};
use crate::model::GammaVector;
use crate::rng::uniform;

const LEVELS: usize = 64;

/// Exact sampler for `q_eta` whose cost scales with the expected number of
/// flips instead of `p`.
///
/// Variables are grouped by `A_j` into dyadic levels `(2^-(b+1), 2^-b]`.
/// Within a level every member is made a candidate with probability `2^-b`
/// (geometric skips) and a candidate is kept with probability `A_j 2^b`, so
/// each excluded variable flips independently with probability exactly
/// `A_j`. Included variables are drawn directly from `D_j`.
#[derive(Debug, Clone)]
pub struct BucketSampler {
    buckets: Vec<Vec<usize>>,
    slot: Vec<(u8, u32)>,
}

fn level(a: f64) -> usize {
    let b = (-a.log2()).floor();
    if b.is_nan() || b < 0.0 {
        0
    } else {
        (b as usize).min(LEVELS - 1)
    }
}

impl BucketSampler {
    pub fn new(params: &ProposalParams) -> Self {
        let mut buckets = vec![Vec::new(); LEVELS];
        let mut slot = Vec::with_capacity(params.p());
        for (j, &a) in params.a().iter().enumerate() {
            let b = level(a);
            slot.push((b as u8, buckets[b].len() as u32));
            buckets[b].push(j);
        }
        Self { buckets, slot }
    }

    /// Moves `j` to the level of its new inclusion probability.
    pub fn update(&mut self, j: usize, a: f64) {
        let b = level(a);
        let (old, pos) = self.slot[j];
        if old as usize == b {
            return;
        }
        let bucket = &mut self.buckets[old as usize];
        bucket.swap_remove(pos as usize);
        if let Some(&moved) = bucket.get(pos as usize) {
            self.slot[moved].1 = pos;
        }
        self.slot[j] = (b as u8, self.buckets[b].len() as u32);
        self.buckets[b].push(j);
    }

    /// Same law as [`super::sample_proposal`], different random stream usage.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        params: &ProposalParams,
        gamma: &GammaVector,
        rng: &mut R,
    ) -> Move {
        let mut additions = FlipSet::new();
        for (b, members) in self.buckets.iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let upper = (-(b as f64)).exp2();
            let mut consider = |j: usize, rng: &mut R| {
                if !gamma.contains(j) && uniform(rng) * upper < params.a()[j] {
                    additions.push(j);
                }
            };
            if b == 0 {
                for &j in members {
                    consider(j, rng);
                }
                continue;
            }
            let log_miss = (-upper).ln_1p();
            let skip = |rng: &mut R| ((1.0 - uniform(rng)).ln() / log_miss).floor();
            let mut k = skip(rng);
            while k < members.len() as f64 {
                consider(members[k as usize], rng);
                k += 1.0 + skip(rng);
            }
        }
        additions.sort_unstable();
        let mut removals: FlipSet = gamma
            .included()
            .iter()
            .copied()
            .filter(|&j| uniform(rng) < params.d()[j])
            .collect();
        removals.sort_unstable();
        let mut mv = Move {
            removals,
            additions,
            log_q_ratio: 0.0,
        };
        mv.log_q_ratio = log_q_ratio(params, &mv);
        mv
    }

    #[cfg(test)]
    fn check(&self) {
        for (b, members) in self.buckets.iter().enumerate() {
            for (pos, &j) in members.iter().enumerate() {
                assert_eq!(self.slot[j], (b as u8, pos as u32));
            }
        }
    }
}
