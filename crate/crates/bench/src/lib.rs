//! Fixtures shared by the benchmarks.

use linrl_core::generate::{random_formula, random_params};
use linrl_core::{build_mdp, rng, MdpInstance, PolicyParams};

/// A random instance with occurrence bound 3 and up to `2n` clauses, plus a
/// `θ'` drawn from `[−1, 1]^n`. Deterministic in `n`.
pub fn fixture(n: usize) -> (MdpInstance, PolicyParams) {
    let mut r = rng::stream(0xbe7c, n as u64);
    let instance = build_mdp(random_formula(&mut r, n, 2 * n, 3));
    let params = random_params(&mut r, n, 1.0);
    (instance, params)
}
