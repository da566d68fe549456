//! Seeded random streams.
//!
//! Every random quantity in a run is drawn from a ChaCha8 stream keyed by a
//! single 64-bit seed. Streams below [`PIVOT_STREAM`] are reserved for the
//! per-pair reward sequences of the oracle (stream `e` for pair `e`), so the
//! reward sequence of a pair does not depend on the order in which pairs are
//! queried.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used for pivot selection in a primary run.
pub const PIVOT_STREAM: u64 = 1 << 63;

/// Stream used by randomized offline solvers (KwikCluster restarts).
pub const SOLVER_STREAM: u64 = 1 << 62;

/// Pivot stream for the `i`-th Monte-Carlo replay.
pub const fn replay_stream(i: u64) -> u64 {
    PIVOT_STREAM + 1 + i
}

/// A ChaCha8 generator seeded with `seed` and positioned on `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
