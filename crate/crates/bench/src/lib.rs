//! Shared input construction for the benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use finmetric::FiniteMetricSpace;

/// Symmetric matrix with off-diagonal entries uniform in [1, 2]; always a
/// metric, essentially never ultrametric or additive.
pub fn uniform_metric(n: usize, seed: u64) -> FiniteMetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = rng.random_range(1.0..2.0);
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    FiniteMetricSpace::validate(rows, None, None).unwrap()
}
