//! Fixtures for the criterion benchmarks.

use choicedict::{ChoiceDict, Config};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A dictionary over `{1..n}` holding about `density * n` random elements.
pub fn populated(n: u64, config: &Config, density: f64, seed: u64) -> ChoiceDict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = ChoiceDict::new(n, config).expect("valid configuration");
    let count = (density * n as f64) as u64;
    for _ in 0..count {
        d.insert(rng.gen_range(1..=n)).expect("element in range");
    }
    d
}

/// `len` elements drawn uniformly from `{1..n}`.
pub fn probes(n: u64, len: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(1..=n)).collect()
}
