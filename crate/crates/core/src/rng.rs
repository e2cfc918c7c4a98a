//! Named random sub-streams derived from one root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Scenario,
    Perturbation,
    Sgd,
    Projection,
    Selection,
    Init,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Scenario => 0x5343_454e,
            Stream::Perturbation => 0x5045_5254,
            Stream::Sgd => 0x5347_4400,
            Stream::Projection => 0x5052_4f4a,
            Stream::Selection => 0x5345_4c00,
            Stream::Init => 0x494e_4954,
        }
    }
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for `stream` under `root`.
pub fn derive_seed(root: u64, stream: Stream) -> u64 {
    mix64(root ^ mix64(stream.tag()))
}

pub fn stream(root: u64, s: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, s))
}

/// Sub-stream further keyed by an index (scenario id, candidate, ...).
pub fn indexed(root: u64, s: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(derive_seed(root, s) ^ mix64(index.wrapping_add(1))))
}
