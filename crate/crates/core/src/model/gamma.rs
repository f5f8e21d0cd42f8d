use std::hash::{Hash, Hasher};

/// A point of the model space `{0,1}^p`.
///
/// Besides the bit vector it keeps the included indices in the order they
/// were switched on; the sufficient statistics lay out their matrices in the
/// same order.
#[derive(Debug, Clone)]
pub struct GammaVector {
    bits: Vec<bool>,
    order: Vec<usize>,
}

impl GammaVector {
    pub fn empty(p: usize) -> Self {
        Self {
            bits: vec![false; p],
            order: Vec::new(),
        }
    }

    /// Panics on an index `>= p`; duplicates are ignored.
    pub fn from_indices(p: usize, indices: &[usize]) -> Self {
        let mut g = Self::empty(p);
        for &j in indices {
            g.include(j);
        }
        g
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let order = bits
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
            .collect();
        Self {
            bits: bits.to_vec(),
            order,
        }
    }

    /// Model whose bits are the low `p` bits of `mask`.
    pub fn from_mask(p: usize, mask: u64) -> Self {
        let bits: Vec<bool> = (0..p).map(|j| (mask >> j) & 1 == 1).collect();
        Self::from_bits(&bits)
    }

    pub fn p(&self) -> usize {
        self.bits.len()
    }

    pub fn p_gamma(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        self.bits[j]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Included indices in inclusion order.
    pub fn included(&self) -> &[usize] {
        &self.order
    }

    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut v = self.order.clone();
        v.sort_unstable();
        v
    }

    /// Returns false if `j` was already included.
    pub fn include(&mut self, j: usize) -> bool {
        if self.bits[j] {
            return false;
        }
        self.bits[j] = true;
        self.order.push(j);
        true
    }

    /// Returns false if `j` was not included.
    pub fn exclude(&mut self, j: usize) -> bool {
        if !self.bits[j] {
            return false;
        }
        self.bits[j] = false;
        let pos = self
            .order
            .iter()
            .position(|&k| k == j)
            .expect("bits and order agree");
        self.order.remove(pos);
        true
    }

    /// Number of coordinates in which the two models differ.
    pub fn hamming(&self, other: &Self) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Bits packed little-endian into 64-bit words.
    pub fn pack(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.p().div_ceil(64)];
        for &j in &self.order {
            words[j / 64] |= 1 << (j % 64);
        }
        words
    }

    pub fn mask(&self) -> u64 {
        assert!(self.p() <= 64, "mask needs p <= 64");
        self.pack().first().copied().unwrap_or(0)
    }
}

impl PartialEq for GammaVector {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits
    }
}

impl Eq for GammaVector {}

impl Hash for GammaVector {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits.hash(state);
    }
}
