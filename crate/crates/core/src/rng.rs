//! Counter-based, splittable 64-bit pseudo-random streams.
//!
//! Every stochastic choice in the crate (dataset sampling, sentence
//! shuffling, weight init, OOV vectors, epoch order) draws from a
//! [`Stream`]. A stream is a `(key, counter)` pair; the `n`-th output is
//!
//! ```text
//! mix64(key + n * 0x9e3779b97f4a7c15)     (wrapping arithmetic, n = 1, 2, ...)
//! mix64(z) = z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//!            z ^= z >> 27; z *= 0x94d049bb133111eb;
//!            z ^ (z >> 31)
//! ```
//!
//! so `Stream::new(seed)` yields exactly the SplitMix64 sequence for
//! `seed`. Reference vectors for seed 0:
//! `0xe220a8397b1dcdaf, 0x6e789e6aa1b965f4, 0x06c45d188009454f`.
//!
//! Child streams come from [`Stream::split`]: the child key is
//! `mix64(key ^ mix64(tag + GAMMA))`, independent of the parent's counter,
//! so derivation order never matters.
//!
//! Bounded integers use rejection sampling on the raw output
//! (`threshold = (2^64 - n) mod n`, accept `x >= threshold`, return
//! `x mod n`). Shuffles are Fisher-Yates from the last index down.
//! Uniform reals take the top 53 bits.

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: seed,
            counter: 0,
        }
    }

    /// Independent child stream identified by `tag`.
    pub fn split(&self, tag: u64) -> Self {
        Self {
            key: mix64(self.key ^ mix64(tag.wrapping_add(GAMMA))),
            counter: 0,
        }
    }

    /// Child stream keyed by a sequence of tags, applied left to right.
    pub fn derive(&self, tags: &[u64]) -> Self {
        tags.iter().fold(self.clone(), |s, &t| s.split(t))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// Uniform in `[0, 1)`.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit_f64()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit_f64() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// A uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.index(items.len())]
    }
}

/// Stable 64-bit FNV-1a hash of a string, used to derive tags from names.
pub fn hash_str(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_vectors() {
        let mut s = Stream::new(0);
        assert_eq!(s.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(s.next_u64(), 0x6e789e6aa1b965f4);
        assert_eq!(s.next_u64(), 0x06c45d188009454f);
    }

    #[test]
    fn split_is_independent_of_parent_position() {
        let a = Stream::new(7);
        let mut b = Stream::new(7);
        b.next_u64();
        assert_eq!(a.split(3), b.split(3));
        assert_ne!(a.split(3), a.split(4));
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = Stream::new(1);
        for n in 1..50u64 {
            for _ in 0..20 {
                assert!(s.below(n) < n);
            }
        }
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut s = Stream::new(9);
        let mut p = s.permutation(100);
        p.sort_unstable();
        assert_eq!(p, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn unit_interval() {
        let mut s = Stream::new(2);
        for _ in 0..1000 {
            let u = s.unit_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
