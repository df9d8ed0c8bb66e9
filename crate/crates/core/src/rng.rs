//! Counter-based SplitMix64 generator.
//!
//! Output `i` (0-based) of a stream keyed by `key` is
//! `mix(key + (i + 1) * 0x9E37_79B9_7F4A_7C15)` with wrapping arithmetic,
//! where `mix` is the SplitMix64 finalizer. Only 64-bit integer operations
//! are involved, so every platform produces identical streams.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream key from a seed and a stream tag.
#[inline]
pub fn derive_key(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_add(GOLDEN)))
}

/// Deterministic counter-based generator.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform `bits`-bit word, `bits <= 64`.
    #[inline]
    pub fn bits(&mut self, bits: usize) -> u64 {
        match bits {
            0 => 0,
            64 => self.next_u64(),
            b => self.next_u64() & ((1u64 << b) - 1),
        }
    }
}
