#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specdec::{ReducedProblem, StepDistributions, TokenId, Vocabulary};

/// Random probability vector with every entry at least `floor / len`.
pub fn smoothed_simplex(rng: &mut ChaCha8Rng, len: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>().powi(3)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter()
        .map(|x| (1.0 - floor) * x / sum + floor / len as f64)
        .collect()
}

/// Reduced problem with smoothed random stochastic Q (m×m) and S (n×m).
pub fn random_problem(n: usize, m: usize, seed: u64) -> ReducedProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q: Vec<Vec<f64>> = (0..m)
        .map(|_| smoothed_simplex(&mut rng, m, 0.05))
        .collect();
    let s: Vec<Vec<f64>> = (0..n)
        .map(|_| smoothed_simplex(&mut rng, m, 0.05))
        .collect();
    let tokens = (0..m as u32).map(TokenId).collect();
    ReducedProblem::from_probabilities(tokens, &q, &s).unwrap()
}

pub fn random_dists(v: usize, n: usize, seed: u64) -> StepDistributions {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let heads = (0..n)
        .map(|_| smoothed_simplex(&mut rng, v, 0.01))
        .collect();
    StepDistributions::new(Vocabulary::new(v).unwrap(), heads).unwrap()
}

/// Every path as candidate indices, first head varying fastest.
pub fn all_paths(n: usize, m: usize) -> Vec<Vec<usize>> {
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let c = code % m;
                    code /= m;
                    c
                })
                .collect()
        })
        .collect()
}

/// Joint score recomputed from the raw tables, independent of the library's
/// scoring helper: first head, then transition plus state for each later head.
pub fn raw_score(p: &ReducedProblem, path: &[usize]) -> f64 {
    let mut s = p.log_s(0, path[0]);
    if let Some(init) = p.initial() {
        s += init[path[0]];
    }
    for t in 1..path.len() {
        s = s + p.log_q(path[t - 1], path[t]) + p.log_s(t, path[t]);
    }
    s
}
