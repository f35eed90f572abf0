//! Reproducible random streams.
//!
//! Every replica owns a ChaCha8 stream derived from the master seed, a lane
//! tag and a stream number, so results do not depend on which worker thread
//! runs the replica.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const LANE_GRAPH: u64 = 0x6772_6170_6873;
const LANE_LIMIT: u64 = 0x6c69_6d69_7473;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream `stream` of lane `lane` under `master`.
pub fn stream_rng(master: u64, lane: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(lane)));
    rng.set_stream(stream);
    rng
}

/// RNG for replica `replica` at size index `size_index`.
pub fn replica_rng(master: u64, size_index: usize, replica: usize) -> StreamRng {
    stream_rng(master, LANE_GRAPH, ((size_index as u64) << 32) | replica as u64)
}

/// RNG for the `chunk`-th block of limit samples.
pub fn limit_rng(master: u64, chunk: usize) -> StreamRng {
    stream_rng(master, LANE_LIMIT, chunk as u64)
}

/// Independent master seed for sub-experiment `tag` of `master`.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag.wrapping_add(LANE_LIMIT)))
}

/// Plain seeded RNG for one-off draws.
pub fn seeded(seed: u64) -> StreamRng {
    stream_rng(seed, 0, 0)
}
