//! Counter-based substreams for reproducible Monte Carlo runs.
//!
//! One master seed expands into independent substreams addressed by a tag
//! path, e.g. `(master, [VALUATION, node, replication])`. Every draw is a
//! pure function of the master seed and the path, so results do not depend
//! on evaluation order and parallel runs reproduce serial ones bit for bit.
//!
//! The 32-byte ChaCha key is derived here with an explicit SplitMix64 chain
//! rather than a library seeding helper, so the mapping from (seed, path)
//! to stream is pinned by this crate and stable across dependency upgrades.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
pub use rand_core::RngCore;

/// Stream tags. Each randomized subsystem owns one tag so that substreams
/// never collide across contexts sharing a master seed.
pub mod tag {
    pub const VALUATION: u64 = 0x01;
    pub const REVENUE: u64 = 0x02;
    pub const TIE: u64 = 0x03;
    pub const AFFINITY: u64 = 0x04;
    pub const SWEEP_VALUATION: u64 = 0x05;
    pub const NOISE: u64 = 0x06;
    pub const CHANNEL: u64 = 0x07;
    pub const INSTANCE: u64 = 0x08;
    pub const DEVIATION: u64 = 0x09;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic substream for `(master, path)`.
pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = master ^ 0x6a09_e667_f3bc_c908;
    let mut acc = splitmix64(&mut state);
    for &p in path {
        state ^= p.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        acc ^= splitmix64(&mut state).rotate_left(17);
    }
    state ^= acc;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw in [0, 1) with 53 bits of precision.
pub fn uniform_01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in [lo, hi).
pub fn uniform_in(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform_01(rng)
}

/// Rayleigh draw with scale sigma, by inverse CDF.
pub fn rayleigh(rng: &mut impl RngCore, sigma: f64) -> f64 {
    let u = uniform_01(rng);
    sigma * (-2.0 * (1.0 - u).ln()).sqrt()
}

/// Pair of independent standard normal draws (Box-Muller).
pub fn std_normal_pair(rng: &mut impl RngCore) -> (f64, f64) {
    let u1 = uniform_01(rng);
    let u2 = uniform_01(rng);
    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
    let angle = std::f64::consts::TAU * u2;
    (r * angle.cos(), r * angle.sin())
}

/// Uniform index into 0..n, used by tie lotteries.
pub fn choose_index(rng: &mut impl RngCore, n: usize) -> usize {
    debug_assert!(n > 0);
    (rng.next_u64() % n as u64) as usize
}
