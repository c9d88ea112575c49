//! Counter-based splittable PRNG.
//!
//! Output i of a stream is `mix(key + i * GOLDEN)` where `mix` is the
//! SplitMix64 finalizer and GOLDEN is the 64-bit golden-ratio constant; the
//! state is just (key, counter), so streams are pure functions of the seed
//! and the call sequence. `split` derives a child key by hashing the parent
//! key with a tag under a distinct domain constant, giving streams that are
//! independent for simulation purposes.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SEED_DOMAIN: u64 = 0x6A09_E667_F3BC_C909;
const SPLIT_DOMAIN: u64 = 0xBB67_AE85_84CA_A73B;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream state: a key fixed at construction and a position counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    key: u64,
    counter: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState {
            key: mix(seed ^ SEED_DOMAIN),
            counter: 0,
        }
    }

    /// Child stream addressed by `tag`. Children with distinct tags, and the
    /// parent itself, produce unrelated sequences.
    pub fn split(&self, tag: u64) -> Self {
        RngState {
            key: mix(self.key ^ mix(tag.wrapping_add(SPLIT_DOMAIN))),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        out
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller. Uses two uniforms per draw and keeps
    /// only the cosine branch, so the stream position advances by exactly two
    /// per call.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // (0, 1], keeps the log finite
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in [0, n), unbiased via rejection sampling.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// Fisher-Yates permutation of 0..n.
    pub fn permutation(&mut self, n: usize) -> Vec<u32> {
        let mut out: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = self.below(i as u64 + 1) as usize;
            out.swap(i, j);
        }
        out
    }
}
