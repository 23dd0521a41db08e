//! Counter-based random streams.
//!
//! Every independent computation (a trial, a sweep attribute, an excess-risk
//! refit) gets its own ChaCha stream derived from `(seed, stream id)`, so results
//! never depend on execution order or on how many other streams exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const SWEEP_BIT: u64 = 1 << 63;
const REFIT_BIT: u64 = 1 << 62;

pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for trial `index`.
pub fn trial_rng(seed: u64, index: usize) -> SimRng {
    stream_rng(seed, index as u64)
}

/// Stream for the sweep's pre-drawn samples of attribute `z`.
pub fn sweep_rng(seed: u64, z: usize) -> SimRng {
    stream_rng(seed, SWEEP_BIT | z as u64)
}

/// Stream for the large-sample refit used by the excess risk of trial `index`.
pub fn refit_rng(seed: u64, index: usize) -> SimRng {
    stream_rng(seed, REFIT_BIT | index as u64)
}
