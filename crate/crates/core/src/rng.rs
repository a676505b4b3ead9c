//! Keyed deterministic random streams.
//!
//! Every random draw in the pipeline comes from a [`SplitMix64`] stream keyed
//! by a seed plus a context key (parameter path, frame id, instance id).
//! Streams therefore depend only on their key, never on the order in which
//! unrelated streams are created or consumed, which keeps outputs bit-identical
//! across refactors and across worker counts.

/// SplitMix64 finalizer. Maps a state word to a well-mixed output word.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a hash of a byte string, used to key streams by parameter path.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A SplitMix64 generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Stream keyed by `(seed, words...)`. Each key word is absorbed through
    /// the finalizer so nearby keys give unrelated streams.
    pub fn keyed(seed: u64, words: &[u64]) -> Self {
        let mut s = mix64(seed);
        for (i, &w) in words.iter().enumerate() {
            s = mix64(s ^ mix64(w.wrapping_add(0x9e37_79b9u64.wrapping_mul(i as u64 + 1))));
        }
        Self { state: s }
    }

    /// Stream keyed by `(seed, utf-8 path)`, for parameter initialization.
    pub fn keyed_by_path(seed: u64, path: &str) -> Self {
        Self::keyed(seed, &[fnv1a(path.as_bytes())])
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in [0, n). `n` must be nonzero.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal pair via Box-Muller.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        // u1 in (0,1] so the log is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let th = 2.0 * core::f64::consts::PI * u2;
        (r * libm::cos(th), r * libm::sin(th))
    }
}
