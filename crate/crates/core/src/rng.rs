//! Seed partitioning. Every random consumer gets its own ChaCha stream
//! derived from the run seed, so results do not depend on iteration order
//! or on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Users,
    Shadowing,
    /// Flat (user, prb) index.
    Fading(u64),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Users => 1,
            Stream::Shadowing => 2,
            Stream::Fading(idx) => (1 << 32) + idx,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
