//! Inputs shared by the benchmarks.

use contextuality::lp::LinearFeasibilityProblem;
use contextuality::rational::ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense random problem with small integer coefficients. The right-hand side
/// is `A·x₀` for a random nonnegative `x₀` when `feasible`, so those are
/// known to be feasible; the rest are usually not.
pub fn random_problem(seed: u64, vars: usize, rows: usize, feasible: bool) -> LinearFeasibilityProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<i64> = (0..vars).map(|_| rng.random_range(0..4)).collect();
    let mut p = LinearFeasibilityProblem::new(vars);
    for _ in 0..rows {
        let row: Vec<i64> = (0..vars).map(|_| rng.random_range(-5..=5)).collect();
        let rhs = if feasible { row.iter().zip(&x0).map(|(a, x)| a * x).sum() } else { rng.random_range(-9..=9) };
        p.add_row(row.into_iter().enumerate().map(|(j, a)| (j, ratio(a, 1))), ratio(rhs, 1)).expect("indices in range");
    }
    p
}
