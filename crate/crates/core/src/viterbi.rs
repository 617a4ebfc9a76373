//! Best-path selection over the reduced problem.
//!
//! The trellis runs in log space: `delta[t][j] = max_i (delta[t-1][i] +
//! log Q(i, j)) + log S_t(j)`, with `delta[0][j]` the first head's score.
//! Every max and argmax resolves ties to the smallest candidate index.
//! Among equally scored paths this selects the one with the smallest final
//! candidate, then the smallest predecessor, and so on back to the first
//! head; [`brute_force_decode`] uses the same order.

use rand::Rng;

use crate::error::{Error, Result};
use crate::reducer::{CandidateSet, ReducedProblem};
use crate::token::TokenId;

/// Path count above which [`brute_force_decode`] refuses to run.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// A selected continuation of n tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPath {
    pub tokens: Vec<TokenId>,
    /// Candidate indices of `tokens` within the reduced problem.
    pub indices: Vec<usize>,
    pub log_score: f64,
    /// Backpointers followed during backtracking, in head order (n − 1 entries).
    pub backpointers_used: Vec<usize>,
}

/// Dynamic-programming tables, row-major n×m.
#[derive(Debug, Clone, PartialEq)]
pub struct TrellisState {
    pub m: usize,
    pub delta: Vec<f64>,
    pub psi: Vec<usize>,
    /// Inner-loop evaluations performed while filling the tables.
    pub evaluations: u64,
}

impl TrellisState {
    pub fn delta(&self, t: usize, j: usize) -> f64 {
        self.delta[t * self.m + j]
    }

    pub fn psi(&self, t: usize, j: usize) -> usize {
        self.psi[t * self.m + j]
    }
}

fn validate(problem: &ReducedProblem) -> Result<()> {
    if problem.m() == 0 {
        return Err(Error::Parameter("empty candidate set".into()));
    }
    let (n, m) = (problem.n(), problem.m());
    let bad = |x: f64| x.is_nan() || x == f64::INFINITY;
    for t in 0..n {
        if problem.log_s_row(t).iter().any(|&x| bad(x)) {
            return Err(Error::Numeric(format!("invalid state score at head {t}")));
        }
    }
    for i in 0..m {
        for j in 0..m {
            if bad(problem.log_q(i, j)) {
                return Err(Error::Numeric(format!(
                    "invalid transition score at ({i}, {j})"
                )));
            }
        }
    }
    if problem
        .initial()
        .is_some_and(|init| init.iter().any(|&x| bad(x)))
    {
        return Err(Error::Numeric("invalid anchor score".into()));
    }
    Ok(())
}

/// Fills the trellis for a validated problem.
pub fn build_trellis(problem: &ReducedProblem) -> Result<TrellisState> {
    validate(problem)?;
    let (n, m) = (problem.n(), problem.m());
    let mut delta = vec![0.0; n * m];
    let mut psi = vec![0usize; n * m];
    let mut evaluations = 0u64;
    for (j, d) in delta[..m].iter_mut().enumerate() {
        *d = problem.first_score(j);
    }
    for t in 1..n {
        let (prev, cur) = delta.split_at_mut(t * m);
        let prev = &prev[(t - 1) * m..];
        let cur = &mut cur[..m];
        let back = &mut psi[t * m..(t + 1) * m];
        // Row-major sweep over predecessors; strict `>` with i ascending
        // keeps the smallest maximizing i for every j.
        for ((c, b), &q) in cur
            .iter_mut()
            .zip(back.iter_mut())
            .zip(problem.log_q_row(0))
        {
            *c = prev[0] + q;
            *b = 0;
        }
        evaluations += m as u64;
        for (i, &d) in prev.iter().enumerate().skip(1) {
            for ((c, b), &q) in cur
                .iter_mut()
                .zip(back.iter_mut())
                .zip(problem.log_q_row(i))
            {
                let v = d + q;
                if v > *c {
                    *c = v;
                    *b = i;
                }
            }
            evaluations += m as u64;
        }
        for (c, &s) in cur.iter_mut().zip(problem.log_s_row(t)) {
            *c += s;
        }
    }
    Ok(TrellisState {
        m,
        delta,
        psi,
        evaluations,
    })
}

fn first_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn to_path(problem: &ReducedProblem, indices: Vec<usize>, log_score: f64) -> DecodedPath {
    DecodedPath {
        tokens: indices.iter().map(|&c| problem.tokens()[c]).collect(),
        backpointers_used: indices[..indices.len().saturating_sub(1)].to_vec(),
        indices,
        log_score,
    }
}

/// Most probable path through the n heads.
pub fn viterbi_decode(problem: &ReducedProblem) -> Result<DecodedPath> {
    viterbi_decode_traced(problem).map(|(path, _)| path)
}

/// [`viterbi_decode`] that also returns the filled trellis.
pub fn viterbi_decode_traced(problem: &ReducedProblem) -> Result<(DecodedPath, TrellisState)> {
    let trellis = build_trellis(problem)?;
    let (n, m) = (problem.n(), problem.m());
    let last = &trellis.delta[(n - 1) * m..];
    let end = first_argmax(last);
    let log_score = last[end];
    let mut indices = vec![0; n];
    indices[n - 1] = end;
    for t in (0..n - 1).rev() {
        indices[t] = trellis.psi(t + 1, indices[t + 1]);
    }
    Ok((to_path(problem, indices, log_score), trellis))
}

/// Exhaustive search over all m^n paths, scoring each with
/// [`ReducedProblem::path_score`].
pub fn brute_force_decode(problem: &ReducedProblem) -> Result<DecodedPath> {
    if problem.m() == 0 {
        return Err(Error::Parameter("empty candidate set".into()));
    }
    let (n, m) = (problem.n(), problem.m());
    let paths = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if paths > BRUTE_FORCE_LIMIT as u128 {
        return Err(Error::SearchTooLarge {
            paths,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    validate(problem)?;
    // The first head varies fastest, so paths are visited in increasing
    // order of (last, ..., first); a strict `>` keeps the earliest maximum.
    let mut cur = vec![0usize; n];
    let mut best = cur.clone();
    let mut best_score = problem.path_score(&cur);
    for _ in 1..paths {
        for slot in cur.iter_mut() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
        let s = problem.path_score(&cur);
        if s > best_score {
            best_score = s;
            best.copy_from_slice(&cur);
        }
    }
    Ok(to_path(problem, best, best_score))
}

/// Independent per-head argmax, scored with the joint path formula.
pub fn greedy_decode(problem: &ReducedProblem) -> Result<DecodedPath> {
    validate(problem)?;
    let n = problem.n();
    let first: Vec<f64> = (0..problem.m()).map(|c| problem.first_score(c)).collect();
    let mut indices = Vec::with_capacity(n);
    indices.push(first_argmax(&first));
    for t in 1..n {
        indices.push(first_argmax(problem.log_s_row(t)));
    }
    let score = problem.path_score(&indices);
    Ok(to_path(problem, indices, score))
}

/// Inner-loop evaluations of the trellis recursion: `(n − 1)·m²`.
pub fn count_viterbi_ops(n: usize, m: usize) -> u64 {
    (n.saturating_sub(1) as u64) * (m as u64) * (m as u64)
}

fn gumbel<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    -(-u.ln()).ln()
}

/// Sampling variant: each head's state scores become its renormalized top-k
/// log-probabilities plus independent Gumbel noise (tokens outside the
/// head's own top-k are forbidden), then the trellis picks the best path.
/// With one head this draws from the renormalized top-k distribution. The
/// returned score is evaluated on the unperturbed problem.
pub fn stochastic_decode<R: Rng + ?Sized>(
    problem: &ReducedProblem,
    candidates: &CandidateSet,
    rng: &mut R,
) -> Result<DecodedPath> {
    stochastic_decode_traced(problem, candidates, rng).map(|(path, _)| path)
}

/// [`stochastic_decode`] that also returns the trellis of the perturbed problem.
pub fn stochastic_decode_traced<R: Rng + ?Sized>(
    problem: &ReducedProblem,
    candidates: &CandidateSet,
    rng: &mut R,
) -> Result<(DecodedPath, TrellisState)> {
    validate(problem)?;
    let (n, m) = (problem.n(), problem.m());
    if candidates.tokens() != problem.tokens() || candidates.per_head_topk().len() != n {
        return Err(Error::Dimension(
            "candidate set does not match problem".into(),
        ));
    }
    let mut log_s = vec![f64::NEG_INFINITY; n * m];
    for (t, kept) in candidates.per_head_topk().iter().enumerate() {
        let mass: f64 = kept.iter().map(|&(_, p)| p).sum();
        for &(tok, p) in kept {
            let c = candidates
                .index_of(tok)
                .expect("top-k token is a candidate");
            let logp = if mass > 0.0 {
                (p / mass).ln()
            } else {
                -(kept.len() as f64).ln()
            };
            log_s[t * m + c] = logp + gumbel(rng);
        }
    }
    let perturbed = problem.with_log_s(log_s)?;
    let (picked, trellis) = viterbi_decode_traced(&perturbed)?;
    let score = problem.path_score(&picked.indices);
    Ok((to_path(problem, picked.indices, score), trellis))
}
