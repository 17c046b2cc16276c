//! Seeded random streams.
//!
//! Every randomized routine takes its generator from the caller. Shards of a
//! parallel run use independent ChaCha streams of the same seed, so results
//! depend only on `(seed, shard)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

/// The generator for stream 0 of `seed`.
pub fn seeded(seed: u64) -> RandomStream {
    RandomStream::seed_from_u64(seed)
}

/// The generator for an independent shard of a seeded run.
pub fn shard_stream(seed: u64, shard: u64) -> RandomStream {
    let mut rng = RandomStream::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}
