//! Benchmark fixtures shared by the criterion targets.

use stable_expand::{generate_set1, MatchingInstance, SyntheticParams};

/// A Set 1 instance with the usual synthetic shape.
pub fn set1(residents: usize, hospitals: usize, budget: u32, alpha: f64) -> MatchingInstance {
    generate_set1(&SyntheticParams {
        residents,
        hospitals,
        budget,
        alpha,
        seed: 1,
    })
    .expect("benchmark parameters are valid")
}
