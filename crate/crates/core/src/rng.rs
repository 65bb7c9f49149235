//! Deterministic random streams for parallel Monte Carlo.
//!
//! Every trial owns stream `trial` of a ChaCha8 cipher keyed by the run seed.
//! Streams are independent and cheap to construct, so trials may execute on
//! any thread in any order while drawing exactly the same values. Aggregation
//! preserves trial order, which keeps floating-point reductions (and thus
//! written output bytes) independent of the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 1729;

/// Returns the random stream owned by one Monte Carlo trial.
pub fn trial_stream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Derives the base seed of one grid point of a sweep, so that different
/// points do not share trial substreams.
pub fn point_seed(seed: u64, point: usize) -> u64 {
    seed.wrapping_add(point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `trials` independent trials in parallel and returns their results in
/// trial order.
pub fn collect_trials<T, F>(seed: u64, trials: u64, per_trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_stream(seed, t);
            per_trial(t, &mut rng)
        })
        .collect()
}
