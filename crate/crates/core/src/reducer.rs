//! Search-space reduction: keep each head's top-k tokens, take their union
//! as the candidate states and gather the matching rows and columns of the
//! transition matrix and head distributions into log space.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::token::{TokenId, Vocabulary};
use crate::transition::TransitionMatrix;

/// Head distributions must sum to one within this tolerance.
pub const DIST_SUM_TOLERANCE: f64 = 1e-6;

/// Probability floor applied before taking logs; `ln(1e-12)`.
pub const LOG_FLOOR: f64 = -27.631021115928547;

/// `ln(p)` clamped from below at [`LOG_FLOOR`].
#[inline]
pub fn floor_log(p: f64) -> f64 {
    let l = p.ln();
    if l < LOG_FLOOR {
        LOG_FLOOR
    } else {
        l
    }
}

/// The n per-head probability vectors produced by one model invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistributions {
    vocab: Vocabulary,
    heads: Vec<Vec<f64>>,
}

impl StepDistributions {
    pub fn new(vocab: Vocabulary, heads: Vec<Vec<f64>>) -> Result<Self> {
        if heads.is_empty() {
            return Err(Error::Parameter("at least one head is required".into()));
        }
        for (t, h) in heads.iter().enumerate() {
            if h.len() != vocab.size() {
                return Err(Error::Dimension(format!(
                    "head {t} has {} entries, vocabulary is {vocab}",
                    h.len()
                )));
            }
            if let Some(bad) = h.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Numeric(format!("head {t} has probability {bad}")));
            }
            let sum: f64 = h.iter().sum();
            if (sum - 1.0).abs() > DIST_SUM_TOLERANCE {
                return Err(Error::Numeric(format!("head {t} sums to {sum}")));
            }
        }
        Ok(StepDistributions { vocab, heads })
    }

    pub fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    pub fn num_heads(&self) -> usize {
        self.heads.len()
    }

    pub fn head(&self, t: usize) -> &[f64] {
        &self.heads[t]
    }

    pub fn heads(&self) -> &[Vec<f64>] {
        &self.heads
    }
}

/// Union of the per-head top-k tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    k: usize,
    tokens: Vec<TokenId>,
    per_head_topk: Vec<Vec<(TokenId, f64)>>,
}

impl CandidateSet {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Distinct candidate tokens, ascending.
    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    pub fn m(&self) -> usize {
        self.tokens.len()
    }

    /// For each head, its retained `(token, probability)` pairs in rank order.
    pub fn per_head_topk(&self) -> &[Vec<(TokenId, f64)>] {
        &self.per_head_topk
    }

    /// Position of `token` in [`Self::tokens`].
    pub fn index_of(&self, token: TokenId) -> Option<usize> {
        self.tokens.binary_search(&token).ok()
    }
}

/// Descending probability, ties to the smaller token id.
fn rank_order(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// The `k` most probable tokens of one distribution, in rank order.
pub fn top_k(dist: &[f64], k: usize) -> Vec<(TokenId, f64)> {
    let mut ranked: Vec<(usize, f64)> = dist.iter().copied().enumerate().collect();
    let k = k.min(ranked.len());
    if k == 0 {
        return Vec::new();
    }
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, rank_order);
        ranked.truncate(k);
    }
    ranked.sort_unstable_by(rank_order);
    ranked
        .into_iter()
        .map(|(i, p)| (TokenId(i as u32), p))
        .collect()
}

/// Keeps each head's `k` most probable tokens and forms their sorted union.
pub fn topk_per_head(dists: &StepDistributions, k: usize) -> Result<CandidateSet> {
    let v = dists.vocab.size();
    if k == 0 || k > v {
        return Err(Error::Parameter(format!(
            "top-k must be in [1, {v}], got {k}"
        )));
    }
    let per_head_topk: Vec<Vec<(TokenId, f64)>> = dists.heads.iter().map(|h| top_k(h, k)).collect();
    let mut tokens: Vec<TokenId> = per_head_topk
        .iter()
        .flat_map(|h| h.iter().map(|&(t, _)| t))
        .collect();
    tokens.sort_unstable();
    tokens.dedup();
    Ok(CandidateSet {
        k,
        tokens,
        per_head_topk,
    })
}

/// How a union token outside a head's own top-k is scored for that head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskMode {
    /// Use the head's true probability for the token.
    #[default]
    RetainTrue,
    /// Forbid the token at that head (log-probability `-inf`).
    Strict,
}

/// The m-state problem solved by the trellis search, all in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedProblem {
    tokens: Vec<TokenId>,
    log_q: Vec<f64>,
    log_s: Vec<f64>,
    initial: Option<Vec<f64>>,
}

impl ReducedProblem {
    /// Assembles a problem from row-major log tables: `log_q` is m×m and
    /// `log_s` is n×m. `initial`, when present, is an extra per-candidate
    /// log factor added at the first head.
    pub fn from_log_parts(
        tokens: Vec<TokenId>,
        log_q: Vec<f64>,
        log_s: Vec<f64>,
        initial: Option<Vec<f64>>,
    ) -> Result<Self> {
        let m = tokens.len();
        if log_q.len() != m * m {
            return Err(Error::Dimension(format!(
                "transition block has {} entries, expected {}",
                log_q.len(),
                m * m
            )));
        }
        if m == 0 {
            if !log_s.is_empty() {
                return Err(Error::Dimension("state table without candidates".into()));
            }
        } else if log_s.is_empty() || !log_s.len().is_multiple_of(m) {
            return Err(Error::Dimension(format!(
                "state table has {} entries, not a positive multiple of {m}",
                log_s.len()
            )));
        }
        if initial.as_ref().is_some_and(|i| i.len() != m) {
            return Err(Error::Dimension(
                "initial factor length differs from m".into(),
            ));
        }
        Ok(ReducedProblem {
            tokens,
            log_q,
            log_s,
            initial,
        })
    }

    /// Builds a problem from probabilities (nested rows), applying the log floor.
    pub fn from_probabilities(
        tokens: Vec<TokenId>,
        q: &[Vec<f64>],
        s: &[Vec<f64>],
    ) -> Result<Self> {
        let log_q = q.iter().flatten().map(|&p| floor_log(p)).collect();
        let log_s = s.iter().flatten().map(|&p| floor_log(p)).collect();
        if s.iter().any(|row| row.len() != tokens.len()) {
            return Err(Error::Dimension("state row length differs from m".into()));
        }
        Self::from_log_parts(tokens, log_q, log_s, None)
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    pub fn m(&self) -> usize {
        self.tokens.len()
    }

    /// Number of heads.
    pub fn n(&self) -> usize {
        if self.tokens.is_empty() {
            0
        } else {
            self.log_s.len() / self.tokens.len()
        }
    }

    /// `log Q(tokens[from], tokens[to])`.
    #[inline]
    pub fn log_q(&self, from: usize, to: usize) -> f64 {
        self.log_q[from * self.tokens.len() + to]
    }

    /// `log S_{head+1}(tokens[c])`.
    #[inline]
    pub fn log_s(&self, head: usize, c: usize) -> f64 {
        self.log_s[head * self.tokens.len() + c]
    }

    /// `log Q(tokens[from], ·)` over the candidates.
    pub fn log_q_row(&self, from: usize) -> &[f64] {
        let m = self.tokens.len();
        &self.log_q[from * m..(from + 1) * m]
    }

    pub fn log_s_row(&self, head: usize) -> &[f64] {
        let m = self.tokens.len();
        &self.log_s[head * m..(head + 1) * m]
    }

    pub fn initial(&self) -> Option<&[f64]> {
        self.initial.as_deref()
    }

    /// Score of the first head for candidate `c`, including the anchor factor.
    #[inline]
    pub fn first_score(&self, c: usize) -> f64 {
        match &self.initial {
            Some(init) => self.log_s(0, c) + init[c],
            None => self.log_s(0, c),
        }
    }

    /// Adds `log Q(prev, ·)` over the candidates as a first-head factor.
    pub fn anchored(mut self, q: &TransitionMatrix, prev: TokenId) -> Result<Self> {
        if !q.vocab().contains(prev) {
            return Err(Error::Dimension(format!(
                "anchor token {prev} outside vocabulary {}",
                q.vocab()
            )));
        }
        let row = q.log_row(prev.index());
        self.initial = Some(self.tokens.iter().map(|t| row[t.index()]).collect());
        Ok(self)
    }

    /// Same problem with the head scores replaced (used for perturbed search).
    pub fn with_log_s(&self, log_s: Vec<f64>) -> Result<Self> {
        Self::from_log_parts(
            self.tokens.clone(),
            self.log_q.clone(),
            log_s,
            self.initial.clone(),
        )
    }

    /// Joint log-score of a path given as candidate indices, summed in
    /// path order: first score, then `+ log Q + log S` per later head.
    pub fn path_score(&self, path: &[usize]) -> f64 {
        let mut score = self.first_score(path[0]);
        for t in 1..path.len() {
            score = score + self.log_q(path[t - 1], path[t]) + self.log_s(t, path[t]);
        }
        score
    }
}

/// Gathers the candidate rows/columns of `q` and candidate columns of each
/// head into log space. No renormalization is applied.
pub fn build_reduced(
    q: &TransitionMatrix,
    dists: &StepDistributions,
    candidates: &CandidateSet,
    mask: MaskMode,
) -> Result<ReducedProblem> {
    if q.vocab() != dists.vocab() {
        return Err(Error::Dimension(format!(
            "transition vocabulary {} differs from head vocabulary {}",
            q.vocab(),
            dists.vocab()
        )));
    }
    let v = q.vocab().size();
    if let Some(bad) = candidates.tokens.iter().find(|t| t.index() >= v) {
        return Err(Error::Dimension(format!(
            "candidate {bad} outside vocabulary {v}"
        )));
    }
    let m = candidates.tokens.len();
    let mut log_q = Vec::with_capacity(m * m);
    for r in &candidates.tokens {
        let row = q.log_row(r.index());
        log_q.extend(candidates.tokens.iter().map(|c| row[c.index()]));
    }
    let mut log_s = Vec::with_capacity(dists.num_heads() * m);
    for (t, head) in dists.heads.iter().enumerate() {
        match mask {
            MaskMode::RetainTrue => {
                log_s.extend(candidates.tokens.iter().map(|c| floor_log(head[c.index()])));
            }
            MaskMode::Strict => {
                let own = candidates.per_head_topk.get(t).ok_or_else(|| {
                    Error::Dimension(format!("candidate set has no top-k for head {t}"))
                })?;
                log_s.extend(candidates.tokens.iter().map(|c| {
                    if own.iter().any(|(tok, _)| tok == c) {
                        floor_log(head[c.index()])
                    } else {
                        f64::NEG_INFINITY
                    }
                }));
            }
        }
    }
    ReducedProblem::from_log_parts(candidates.tokens.clone(), log_q, log_s, None)
}
