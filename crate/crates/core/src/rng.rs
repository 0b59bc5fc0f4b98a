//! Counter-based splittable pseudo-random generator.
//!
//! Every stochastic operation in this crate takes an explicit generator, so
//! a fixed seed reproduces a run bit for bit. Splitting derives a child
//! stream whose outputs are independent of the parent's future outputs,
//! which lets per-task generators be handed out without sharing state.

/// Counter-based generator: output i is a hash of (key, i).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRng {
    key: u64,
    counter: u64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const SPLIT_TAG: u64 = 0xa0761d6478bd642f;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SplitRng {
    pub fn from_seed(seed: u64) -> Self {
        SplitRng {
            key: mix(seed ^ GOLDEN),
            counter: 0,
        }
    }

    /// Derives an independent child generator and advances this one.
    pub fn split(&mut self) -> SplitRng {
        let tag = self.next_u64();
        SplitRng {
            key: mix(self.key ^ tag ^ SPLIT_TAG),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = mix(self.key ^ self.counter.wrapping_mul(GOLDEN));
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in 0..n.
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Rejection sampling keeps the draw exactly uniform.
        let n64 = n as u64;
        let zone = u64::MAX - (u64::MAX % n64);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n64) as usize;
            }
        }
    }

    pub fn next_bool(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Standard normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        let u = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let v = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u)) * libm::cos(2.0 * core::f64::consts::PI * v)
    }
}
