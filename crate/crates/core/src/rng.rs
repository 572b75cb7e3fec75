//! Deterministic random substreams.
//!
//! Every random draw in a sweep comes from a generator keyed by a stable hash
//! of the master seed and a list of integer tags (grid coordinates, trial
//! index, purpose). Adding grid points or changing the worker count never
//! perturbs an existing trial.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

/// Tags separating independent uses of randomness within one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Parent = 1,
    SubsampleFirst = 2,
    SubsampleSecond = 3,
    Permutation = 4,
    Seeds = 5,
    Algorithm = 6,
    VertexFirst = 7,
    VertexSecond = 8,
    PairSampling = 9,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a master seed and a tag sequence.
pub fn substream_id(master: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ 0x5eed_5eed_5eed_5eed);
    for &t in tags {
        h = splitmix64(h ^ splitmix64(t));
    }
    h
}

pub fn stream(id: u64) -> SimRng {
    let mut seed = [0u8; 32];
    let mut z = id;
    for chunk in seed.chunks_exact_mut(8) {
        z = splitmix64(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    SimRng::from_seed(seed)
}

/// Generator for one purpose within the trial identified by `trial_id`.
pub fn purpose_stream(trial_id: u64, purpose: Purpose) -> SimRng {
    stream(substream_id(trial_id, &[purpose as u64]))
}
