/// SplitMix64 increment.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output mix (Steele, Lea and Flood, 2014).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent draw families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Operational = 1,
    Offline = 2,
    Shadow = 3,
}

/// Counter-based generator: every draw is a pure function of
/// `(seed, stream, index, lane)`, so any index range can be generated
/// independently and in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed.wrapping_add(GOLDEN_GAMMA)),
        }
    }

    pub fn bits(&self, stream: Stream, index: u64, lane: u32) -> u64 {
        let tweak = mix64(((stream as u64) << 32 | lane as u64).wrapping_add(GOLDEN_GAMMA));
        mix64(mix64(self.key ^ index.wrapping_mul(GOLDEN_GAMMA)).wrapping_add(tweak))
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&self, stream: Stream, index: u64, lane: u32) -> f64 {
        (self.bits(stream, index, lane) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
