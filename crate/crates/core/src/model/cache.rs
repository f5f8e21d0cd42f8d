use std::collections::HashMap;

use super::dataset::{dot, Dataset};

const MIN_CAPACITY: usize = 16;
/// Entries (f64s) a cache may hold regardless of model size, 16 MiB.
const ENTRY_BUDGET: usize = 1 << 21;

/// Per-chain cache of full cross-product columns `X^T x_k` for variables
/// that have been in the model.
///
/// Entries are computed lazily in `O(n p)` and evicted least recently
/// included first once more than `4 * max(p_gamma)` are held, or more than
/// fit in a fixed 16 MiB budget if that is larger. Cached and
/// freshly computed products are bit-identical, so the cache never changes
/// a sampled value.
#[derive(Debug, Clone, Default)]
pub struct CrossCache {
    slots: HashMap<usize, Slot>,
    tick: u64,
    max_p_gamma: usize,
    floor: usize,
}

#[derive(Debug, Clone)]
struct Slot {
    values: Vec<f64>,
    last_included: u64,
}

impl CrossCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Cache sized for a design with `p` columns.
    pub fn for_columns(p: usize) -> Self {
        Self {
            floor: ENTRY_BUDGET / p.max(1),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn capacity(&self) -> usize {
        (4 * self.max_p_gamma).max(self.floor).max(MIN_CAPACITY)
    }

    pub fn contains(&self, k: usize) -> bool {
        self.slots.contains_key(&k)
    }

    /// `x_j^T x_k`, from the cache when either column is held.
    #[inline]
    pub fn pair(&self, data: &Dataset, j: usize, k: usize) -> f64 {
        if j == k {
            return data.col_sq()[j];
        }
        if let Some(s) = self.slots.get(&k) {
            s.values[j]
        } else if let Some(s) = self.slots.get(&j) {
            s.values[k]
        } else {
            dot(data.column(j), data.column(k))
        }
    }

    /// Makes sure every column in `cols` is cached, marking them as the most
    /// recently included, then evicts surplus entries outside `cols`.
    pub fn ensure(&mut self, data: &Dataset, cols: &[usize]) {
        self.tick += 1;
        self.max_p_gamma = self.max_p_gamma.max(cols.len());
        for &k in cols {
            let tick = self.tick;
            self.slots
                .entry(k)
                .and_modify(|s| s.last_included = tick)
                .or_insert_with(|| Slot {
                    values: data.cross_column(k),
                    last_included: tick,
                });
        }
        while self.slots.len() > self.capacity() {
            let victim = self
                .slots
                .iter()
                .filter(|(_, s)| s.last_included < self.tick)
                .min_by_key(|(k, s)| (s.last_included, **k))
                .map(|(k, _)| *k);
            match victim {
                Some(k) => {
                    self.slots.remove(&k);
                }
                None => break,
            }
        }
    }

    /// Cached column; `None` if it has not been [`ensure`](Self::ensure)d.
    pub fn get(&self, k: usize) -> Option<&[f64]> {
        self.slots.get(&k).map(|s| s.values.as_slice())
    }
}
