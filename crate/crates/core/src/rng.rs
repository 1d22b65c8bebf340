//! Seedable, splittable random streams.
//!
//! A [`RngStream`] is a ChaCha8 generator keyed by a 64-bit seed. Child
//! streams are derived from the parent's *seed* (never from its consumed
//! state), so `stream.child(i)` is the same no matter how much of the parent
//! has been used or which thread asks for it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream number `index` under this one.
    pub fn child(&self, index: u64) -> Self {
        Self::new(mix(
            self.seed ^ mix(index.wrapping_add(0xD1B5_4A32_D192_ED03))
        ))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn child_ignores_parent_state() {
        let a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..100 {
            b.next_u64();
        }
        assert_eq!(a.child(3).next_u64(), b.child(3).next_u64());
    }

    #[test]
    fn children_differ() {
        let root = RngStream::new(7);
        let x: Vec<u64> = (0..16).map(|i| root.child(i).next_u64()).collect();
        let mut y = x.clone();
        y.sort_unstable();
        y.dedup();
        assert_eq!(y.len(), x.len());
        assert_ne!(root.child(0).seed(), root.seed());
    }
}
