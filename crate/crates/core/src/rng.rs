//! Seeded random streams.
//!
//! All randomness goes through ChaCha8 so runs are reproducible across
//! platforms. Independent sub-tasks (placement, graph growth, one shock of
//! one configuration, ...) get their own stream of the same seed, which keeps
//! a task's draws unaffected by how many draws other tasks consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for stream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids used by the library. Kept in one place so no two tasks share one.
pub mod streams {
    pub const PLACEMENT: u64 = 1;
    pub const SOCIAL: u64 = 2;
    pub const STRATEGIES: u64 = 3;
    pub const DYNAMICS: u64 = 4;
    pub const INTERVENTION: u64 = 5;
    /// Re-equilibration after an intervention.
    pub const RECONVERGE: u64 = 6;
    /// Shock `k` of a run uses `SHOCK_BASE + k`.
    pub const SHOCK_BASE: u64 = 100;
    /// Replication `r` of shock `k` uses `REPLICATION_BASE + REPLICATION_STRIDE * r + k`.
    pub const REPLICATION_BASE: u64 = 1_000;
    pub const REPLICATION_STRIDE: u64 = 100;
}
