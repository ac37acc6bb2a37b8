//! Reproducible per-path random streams.
//!
//! Every simulated path owns one [`RngStream`], a xoshiro256++ generator whose
//! state is derived from `(master_seed, path_index)` alone. Ensemble output
//! therefore depends only on the seed and the path index, never on how paths
//! were scheduled across worker threads.
//!
//! Seeding: `z = master_seed ^ path_index.wrapping_mul(PATH_MIX)` is fed to a
//! SplitMix64 sequence and the first four outputs become the generator state.
//! `PATH_MIX` is odd, so `path_index -> z` is a bijection for a fixed master
//! seed, and the first SplitMix64 output is itself a bijection of `z`. Distinct
//! path indices therefore always get distinct initial states.

/// Seed used when no `master_seed` is configured.
pub const DEFAULT_MASTER_SEED: u64 = 0x5EED_0000_2024_0075;

/// Odd multiplier applied to the path index before it is mixed into the seed.
pub const PATH_MIX: u64 = 0xD1B5_4A32_D192_ED03;

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// 2^-53
const UNIT_53: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 output finalizer.
#[inline]
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Map one raw 64-bit output to `[0, 1)` using its top 53 bits.
#[inline]
pub fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * UNIT_53
}

/// Map one raw 64-bit output to `[-1, 1]` as `2v - 1`.
#[inline]
pub fn signed_from_bits(bits: u64) -> f64 {
    2.0 * unit_from_bits(bits) - 1.0
}

/// A single-owner xoshiro256++ stream tagged with the seed pair it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    state: [u64; 4],
    master_seed: u64,
    path_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        let mut z = master_seed ^ path_index.wrapping_mul(PATH_MIX);
        let mut state = [0u64; 4];
        for word in &mut state {
            z = z.wrapping_add(SPLITMIX_GAMMA);
            *word = splitmix64_mix(z);
        }
        // xoshiro is stuck forever in the all-zero state.
        if state == [0; 4] {
            state[0] = SPLITMIX_GAMMA;
        }
        Self {
            state,
            master_seed,
            path_index,
        }
    }

    /// Build a stream from an explicit generator state (tests and replay).
    pub fn from_state(state: [u64; 4]) -> Self {
        assert!(state != [0; 4], "xoshiro256++ state must not be all zero");
        Self {
            state,
            master_seed: 0,
            path_index: 0,
        }
    }

    pub fn state(&self) -> [u64; 4] {
        self.state
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    /// One raw xoshiro256++ output.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)`; consumes exactly one 64-bit draw.
    #[inline]
    pub fn uniform_unit(&mut self) -> f64 {
        unit_from_bits(self.next_u64())
    }

    /// Uniform on `[-1, 1]`; consumes exactly one 64-bit draw.
    #[inline]
    pub fn uniform_signed(&mut self) -> f64 {
        signed_from_bits(self.next_u64())
    }
}
