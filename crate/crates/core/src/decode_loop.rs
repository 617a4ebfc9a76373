//! Multi-token generation sessions.
//!
//! Each step asks a [`HeadSource`] for n head distributions, reduces them to
//! the top-k candidate problem, selects a path and commits its tokens to the
//! context. Generating L tokens therefore takes `ceil((L - prompt) / n)`
//! source invocations.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::reducer::{build_reduced, floor_log, top_k, topk_per_head, MaskMode, StepDistributions};
use crate::token::{TokenCorpus, TokenId, Vocabulary};
use crate::transition::TransitionMatrix;
use crate::viterbi::{greedy_decode, stochastic_decode_traced, viterbi_decode_traced};

/// Produces the per-head distributions for one model invocation.
pub trait HeadSource {
    fn num_heads(&self) -> usize;
    fn vocab(&self) -> Vocabulary;
    fn next_step(&mut self, context: &[TokenId]) -> Result<StepDistributions>;
}

impl<S: HeadSource + ?Sized> HeadSource for Box<S> {
    fn num_heads(&self) -> usize {
        (**self).num_heads()
    }
    fn vocab(&self) -> Vocabulary {
        (**self).vocab()
    }
    fn next_step(&mut self, context: &[TokenId]) -> Result<StepDistributions> {
        (**self).next_step(context)
    }
}

/// Degradation applied to far-future heads of a [`MarkovHeadSource`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadNoise {
    /// Head t is flattened with temperature `t^gamma`.
    pub gamma: f64,
    /// Seeded log-space jitter: head t's probabilities are multiplied by
    /// `exp(jitter · t · u)` with `u` uniform in [-1, 1].
    pub jitter: f64,
}

impl Default for HeadNoise {
    fn default() -> Self {
        HeadNoise {
            gamma: 0.5,
            jitter: 0.0,
        }
    }
}

/// Synthetic heads driven by a known Markov chain: head t predicts the
/// t-step transition distribution from the last context token (from a
/// uniform first token when the context is empty), degraded by
/// [`HeadNoise`].
#[derive(Debug, Clone)]
pub struct MarkovHeadSource {
    q_true: Arc<TransitionMatrix>,
    n: usize,
    noise: HeadNoise,
    rng: ChaCha8Rng,
}

impl MarkovHeadSource {
    pub fn new(
        q_true: Arc<TransitionMatrix>,
        n: usize,
        noise: HeadNoise,
        seed: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("head count must be positive".into()));
        }
        if !(noise.gamma.is_finite() && noise.jitter.is_finite() && noise.jitter >= 0.0) {
            return Err(Error::Parameter(format!("invalid head noise {noise:?}")));
        }
        Ok(MarkovHeadSource {
            q_true,
            n,
            noise,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn q_true(&self) -> &TransitionMatrix {
        &self.q_true
    }
}

impl HeadSource for MarkovHeadSource {
    fn num_heads(&self) -> usize {
        self.n
    }

    fn vocab(&self) -> Vocabulary {
        self.q_true.vocab()
    }

    fn next_step(&mut self, context: &[TokenId]) -> Result<StepDistributions> {
        let v = self.q_true.vocab().size();
        let mut marginal = match context.last() {
            None => vec![1.0 / v as f64; v],
            Some(last) => {
                if last.index() >= v {
                    return Err(Error::Dimension(format!(
                        "context token {last} outside vocabulary"
                    )));
                }
                self.q_true.row(last.index()).to_vec()
            }
        };
        let mut heads = Vec::with_capacity(self.n);
        for t in 1..=self.n {
            if t > 1 {
                marginal = self.q_true.propagate(&marginal);
            }
            let inv_temp = 1.0 / (t as f64).powf(self.noise.gamma);
            let mut head: Vec<f64> = marginal.iter().map(|&p| p.powf(inv_temp)).collect();
            if self.noise.jitter > 0.0 {
                let scale = self.noise.jitter * t as f64;
                for p in head.iter_mut() {
                    *p *= (scale * self.rng.gen_range(-1.0..=1.0)).exp();
                }
            }
            let total: f64 = head.iter().sum();
            if !(total > 0.0 && total.is_finite()) {
                return Err(Error::Source(format!("head {t} has no usable mass")));
            }
            head.iter_mut().for_each(|p| *p /= total);
            heads.push(head);
        }
        StepDistributions::new(self.q_true.vocab(), heads)
    }
}

/// Pre-recorded head outputs, consumed in order.
///
/// Replay file (text): a header `n=<heads> k=<topk> V=<vocab>`, then one
/// block per step of n lines `t:<head> tok:prob ...` (head numbered from 1,
/// k pairs each), blocks separated by a blank line. Unlisted tokens share
/// the head's remaining probability mass uniformly.
#[derive(Debug, Clone)]
pub struct ReplayHeadSource {
    n: usize,
    k: usize,
    vocab: Vocabulary,
    steps: Vec<Vec<Vec<(TokenId, f64)>>>,
    cursor: usize,
}

impl ReplayHeadSource {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing replay header".into(),
        })?;
        let (n, k, v) = parse_replay_header(header)?;
        let vocab = Vocabulary::new(v).map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        if n == 0 || k == 0 || k > v {
            return Err(Error::Parse {
                line: 1,
                message: format!("invalid header values n={n} k={k} V={v}"),
            });
        }

        let mut steps = Vec::new();
        let mut block: Vec<Vec<(TokenId, f64)>> = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.is_empty() {
                if !block.is_empty() {
                    if block.len() != n {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("step has {} heads, expected {n}", block.len()),
                        });
                    }
                    steps.push(std::mem::take(&mut block));
                }
                continue;
            }
            let head = parse_replay_line(line, line_no, block.len() + 1, k, vocab)?;
            block.push(head);
            if block.len() > n {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("more than {n} heads in one step"),
                });
            }
        }
        if !block.is_empty() {
            if block.len() != n {
                return Err(Error::Parse {
                    line: text.lines().count(),
                    message: format!("final step has {} heads, expected {n}", block.len()),
                });
            }
            steps.push(block);
        }
        Ok(ReplayHeadSource {
            n,
            k,
            vocab,
            steps,
            cursor: 0,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }
}

fn parse_replay_header(header: &str) -> Result<(usize, usize, usize)> {
    let bad = |message: String| Error::Parse { line: 1, message };
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 3 {
        return Err(bad(format!("malformed header {header:?}")));
    }
    let mut out = [0usize; 3];
    for (slot, (field, key)) in out.iter_mut().zip(fields.iter().zip(["n=", "k=", "V="])) {
        *slot = field
            .strip_prefix(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(format!("expected {key}<int>, got {field:?}")))?;
    }
    Ok((out[0], out[1], out[2]))
}

fn parse_replay_line(
    line: &str,
    line_no: usize,
    expected_head: usize,
    k: usize,
    vocab: Vocabulary,
) -> Result<Vec<(TokenId, f64)>> {
    let bad = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let mut fields = line.split(' ');
    let head: usize = fields
        .next()
        .and_then(|f| f.strip_prefix("t:"))
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| bad("expected t:<head>".into()))?;
    if head != expected_head {
        return Err(bad(format!("expected head {expected_head}, found {head}")));
    }
    let mut pairs = Vec::with_capacity(k);
    for field in fields {
        let (tok, prob) = field
            .split_once(':')
            .ok_or_else(|| bad(format!("expected token:prob, got {field:?}")))?;
        let tok: u32 = tok.parse().map_err(|_| bad(format!("bad token {tok:?}")))?;
        let prob: f64 = prob
            .parse()
            .map_err(|_| bad(format!("bad probability {prob:?}")))?;
        if !vocab.contains(TokenId(tok)) {
            return Err(Error::VocabularyViolation {
                line: line_no,
                token: tok as u64,
                vocab: vocab.size(),
            });
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(bad(format!("probability {prob} outside [0, 1]")));
        }
        if pairs.iter().any(|&(t, _)| t == TokenId(tok)) {
            return Err(bad(format!("token {tok} listed twice")));
        }
        pairs.push((TokenId(tok), prob));
    }
    if pairs.len() != k {
        return Err(bad(format!("{} pairs, expected {k}", pairs.len())));
    }
    Ok(pairs)
}

impl HeadSource for ReplayHeadSource {
    fn num_heads(&self) -> usize {
        self.n
    }

    fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    fn next_step(&mut self, _context: &[TokenId]) -> Result<StepDistributions> {
        let step = self.steps.get(self.cursor).ok_or(Error::ReplayUnderrun {
            steps: self.steps.len(),
        })?;
        self.cursor += 1;
        let v = self.vocab.size();
        let heads = step
            .iter()
            .map(|pairs| {
                let listed: f64 = pairs.iter().map(|&(_, p)| p).sum();
                let rest = v - pairs.len();
                let fill = if rest > 0 {
                    (1.0 - listed).max(0.0) / rest as f64
                } else {
                    0.0
                };
                let mut head = vec![fill; v];
                for &(t, p) in pairs {
                    head[t.index()] = p;
                }
                head
            })
            .collect();
        StepDistributions::new(self.vocab, heads).map_err(|e| Error::Source(e.to_string()))
    }
}

/// Wraps a source and records each step's top `record_k` pairs per head in
/// the replay format.
#[derive(Debug)]
pub struct RecordingHeadSource<S> {
    inner: S,
    record_k: usize,
    steps: Vec<Vec<Vec<(TokenId, f64)>>>,
}

impl<S: HeadSource> RecordingHeadSource<S> {
    pub fn new(inner: S, record_k: usize) -> Result<Self> {
        let v = inner.vocab().size();
        if record_k == 0 || record_k > v {
            return Err(Error::Parameter(format!("record k must be in [1, {v}]")));
        }
        Ok(RecordingHeadSource {
            inner,
            record_k,
            steps: Vec::new(),
        })
    }

    pub fn to_replay_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = format!(
            "n={} k={} V={}\n",
            self.inner.num_heads(),
            self.record_k,
            self.inner.vocab()
        );
        for (s, step) in self.steps.iter().enumerate() {
            if s > 0 {
                out.push('\n');
            }
            for (t, pairs) in step.iter().enumerate() {
                let _ = write!(out, "t:{}", t + 1);
                for (tok, p) in pairs {
                    let _ = write!(out, " {tok}:{p:?}");
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_replay_text()).map_err(|e| Error::io(path, e))
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: HeadSource> HeadSource for RecordingHeadSource<S> {
    fn num_heads(&self) -> usize {
        self.inner.num_heads()
    }

    fn vocab(&self) -> Vocabulary {
        self.inner.vocab()
    }

    fn next_step(&mut self, context: &[TokenId]) -> Result<StepDistributions> {
        let dists = self.inner.next_step(context)?;
        self.steps.push(
            dists
                .heads()
                .iter()
                .map(|h| top_k(h, self.record_k))
                .collect(),
        );
        Ok(dists)
    }
}

/// Path selection strategy for each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DecodeMode {
    Viterbi,
    Greedy,
    Stochastic,
}

impl DecodeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeMode::Viterbi => "viterbi",
            DecodeMode::Greedy => "greedy",
            DecodeMode::Stochastic => "stochastic",
        }
    }
}

impl fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "viterbi" => Ok(DecodeMode::Viterbi),
            "greedy" => Ok(DecodeMode::Greedy),
            "stochastic" => Ok(DecodeMode::Stochastic),
            other => Err(Error::Parameter(format!("unknown decode mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    /// Final context length L, prompt included.
    pub target_len: usize,
    pub k: usize,
    pub mode: DecodeMode,
    pub mask: MaskMode,
    /// Condition the first head on the last committed token.
    pub anchored: bool,
    /// Seeds the stochastic mode.
    pub seed: u64,
}

impl SessionConfig {
    pub fn new(target_len: usize, k: usize, mode: DecodeMode) -> Self {
        SessionConfig {
            target_len,
            k,
            mode,
            mask: MaskMode::RetainTrue,
            anchored: false,
            seed: 0,
        }
    }
}

/// Measurements for one source invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    /// Candidate count after reduction.
    pub m: usize,
    /// Trellis inner-loop evaluations actually performed; zero in greedy mode.
    pub viterbi_ops: u64,
    /// Joint log-score of the selected path.
    pub log_score: f64,
    /// Joint log-score the greedy baseline reaches on the same problem.
    pub greedy_log_score: f64,
    pub committed: usize,
    pub source_time: Duration,
    pub reduce_time: Duration,
    pub select_time: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionStats {
    pub invocations: usize,
    pub steps: Vec<StepStats>,
}

impl SessionStats {
    pub fn viterbi_ops(&self) -> u64 {
        self.steps.iter().map(|s| s.viterbi_ops).sum()
    }

    pub fn m_mean(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.m as f64).sum::<f64>() / self.steps.len() as f64
    }

    pub fn source_time(&self) -> Duration {
        self.steps.iter().map(|s| s.source_time).sum()
    }

    pub fn reduce_time(&self) -> Duration {
        self.steps.iter().map(|s| s.reduce_time).sum()
    }

    pub fn select_time(&self) -> Duration {
        self.steps.iter().map(|s| s.select_time).sum()
    }
}

/// Number of source invocations needed to grow a `prompt_len` context to
/// `target_len` with `n` heads.
pub fn expected_invocations(prompt_len: usize, target_len: usize, n: usize) -> usize {
    target_len.saturating_sub(prompt_len).div_ceil(n)
}

/// Generates tokens in blocks of n until the context reaches exactly
/// `config.target_len`; the last block is truncated.
pub fn run_session<S: HeadSource + ?Sized>(
    source: &mut S,
    q: &TransitionMatrix,
    prompt: &[TokenId],
    config: &SessionConfig,
) -> Result<(Vec<TokenId>, SessionStats)> {
    let n = source.num_heads();
    let vocab = q.vocab();
    if n == 0 {
        return Err(Error::Parameter("source has no heads".into()));
    }
    if config.target_len <= prompt.len() {
        return Err(Error::Parameter(format!(
            "target length {} must exceed prompt length {}",
            config.target_len,
            prompt.len()
        )));
    }
    if config.k == 0 || config.k > vocab.size() {
        return Err(Error::Parameter(format!(
            "top-k must be in [1, {}], got {}",
            vocab.size(),
            config.k
        )));
    }
    if source.vocab() != vocab {
        return Err(Error::Dimension(format!(
            "source vocabulary {} differs from transition vocabulary {vocab}",
            source.vocab()
        )));
    }
    if let Some(bad) = prompt.iter().find(|t| !vocab.contains(**t)) {
        return Err(Error::Dimension(format!(
            "prompt token {bad} outside vocabulary"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut context = Vec::with_capacity(config.target_len + n);
    context.extend_from_slice(prompt);
    let mut stats = SessionStats::default();

    while context.len() < config.target_len {
        let started = Instant::now();
        let dists = source.next_step(&context).map_err(|e| match e {
            Error::ReplayUnderrun { .. } | Error::Source(_) => e,
            other => Error::Source(other.to_string()),
        })?;
        let source_time = started.elapsed();
        if dists.num_heads() != n || dists.vocab() != vocab {
            return Err(Error::Source(format!(
                "expected {n} heads over {vocab} tokens, got {} over {}",
                dists.num_heads(),
                dists.vocab()
            )));
        }

        let started = Instant::now();
        let candidates = topk_per_head(&dists, config.k)?;
        let mut problem = build_reduced(q, &dists, &candidates, config.mask)?;
        if config.anchored {
            if let Some(&last) = context.last() {
                problem = problem.anchored(q, last)?;
            }
        }
        let reduce_time = started.elapsed();

        let started = Instant::now();
        let (path, viterbi_ops) = match config.mode {
            DecodeMode::Viterbi => {
                let (p, trellis) = viterbi_decode_traced(&problem)?;
                (p, trellis.evaluations)
            }
            DecodeMode::Greedy => (greedy_decode(&problem)?, 0),
            DecodeMode::Stochastic => {
                let (p, trellis) = stochastic_decode_traced(&problem, &candidates, &mut rng)?;
                (p, trellis.evaluations)
            }
        };
        let select_time = started.elapsed();

        let greedy_log_score = match config.mode {
            DecodeMode::Greedy => path.log_score,
            _ => greedy_decode(&problem)?.log_score,
        };

        let committed = n.min(config.target_len - context.len());
        context.extend_from_slice(&path.tokens[..committed]);
        stats.invocations += 1;
        stats.steps.push(StepStats {
            m: problem.m(),
            viterbi_ops,
            log_score: path.log_score,
            greedy_log_score,
            committed,
            source_time,
            reduce_time,
            select_time,
        });
    }
    Ok((context, stats))
}

/// Mean log-likelihood per generated token under `q_true`. The first token
/// of an empty context is scored against the uniform initial distribution.
pub fn mean_log_likelihood(
    q_true: &TransitionMatrix,
    sequence: &[TokenId],
    prompt_len: usize,
) -> f64 {
    let generated = sequence.len() - prompt_len;
    if generated == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in prompt_len..sequence.len() {
        total += if i == 0 {
            -(q_true.vocab().size() as f64).ln()
        } else {
            floor_log(q_true.get(sequence[i - 1].index(), sequence[i].index()))
        };
    }
    total / generated as f64
}

/// One row of a strategy comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub n: usize,
    pub mode: DecodeMode,
    pub mean_log_likelihood: f64,
    pub invocations: usize,
    pub viterbi_ops: u64,
    pub m_mean: f64,
}

/// Inputs shared by every cell of a strategy comparison.
#[derive(Debug, Clone)]
pub struct ComparisonSetup {
    pub q_true: Arc<TransitionMatrix>,
    pub noise: HeadNoise,
    pub prompt: Vec<TokenId>,
    pub target_len: usize,
    pub k: usize,
    pub seed: u64,
}

/// Runs one [`MarkovHeadSource`] session per (n, mode) cell, decoding with
/// `q`, and scores the output under the ground-truth chain.
pub fn compare_strategies(
    setup: &ComparisonSetup,
    q: &TransitionMatrix,
    n_list: &[usize],
    modes: &[DecodeMode],
    exec: Execution,
) -> Result<Vec<ComparisonRow>> {
    let cells: Vec<(usize, DecodeMode)> = n_list
        .iter()
        .flat_map(|&n| modes.iter().map(move |&m| (n, m)))
        .collect();
    let rows = exec.map(&cells, |&(n, mode)| -> Result<ComparisonRow> {
        let mut source = MarkovHeadSource::new(setup.q_true.clone(), n, setup.noise, setup.seed)?;
        let mut config = SessionConfig::new(setup.target_len, setup.k, mode);
        config.seed = setup.seed;
        let (seq, stats) = run_session(&mut source, q, &setup.prompt, &config)?;
        Ok(ComparisonRow {
            n,
            mode,
            mean_log_likelihood: mean_log_likelihood(&setup.q_true, &seq, setup.prompt.len()),
            invocations: stats.invocations,
            viterbi_ops: stats.viterbi_ops(),
            m_mean: stats.m_mean(),
        })
    });
    rows.into_iter().collect()
}

fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen::<f64>() * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Samples `num_sequences` chains of `length` tokens from `q_true` with a
/// uniform first token. Sequence i uses its own ChaCha stream, so the result
/// does not depend on the execution mode.
pub fn gen_synthetic_corpus(
    q_true: &TransitionMatrix,
    num_sequences: usize,
    length: usize,
    seed: u64,
    exec: Execution,
) -> Result<TokenCorpus> {
    if num_sequences == 0 || length == 0 {
        return Err(Error::Parameter(
            "sequence count and length must be positive".into(),
        ));
    }
    let v = q_true.vocab().size();
    let sequences = exec.map_indexed(num_sequences, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut seq = Vec::with_capacity(length);
        let mut cur = rng.gen_range(0..v);
        seq.push(TokenId(cur as u32));
        for _ in 1..length {
            cur = sample_index(q_true.row(cur), &mut rng);
            seq.push(TokenId(cur as u32));
        }
        seq
    });
    TokenCorpus::new(q_true.vocab(), sequences)
}

/// A random sparse chain: each row puts `1 - smoothing` of its mass on
/// `branching` random successors with random weights and spreads
/// `smoothing` uniformly.
pub fn random_chain(
    vocab: Vocabulary,
    branching: usize,
    smoothing: f64,
    seed: u64,
) -> Result<TransitionMatrix> {
    let v = vocab.size();
    if branching == 0 || branching > v || !(0.0..=1.0).contains(&smoothing) {
        return Err(Error::Parameter(format!(
            "need 1 <= branching <= {v} and smoothing in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(v);
    for _ in 0..v {
        let succ = rand::seq::index::sample(&mut rng, v, branching);
        let weights: Vec<f64> = (0..branching).map(|_| rng.gen_range(0.05..1.0)).collect();
        let wsum: f64 = weights.iter().sum();
        let mut row = vec![smoothing / v as f64; v];
        for (j, w) in succ.iter().zip(&weights) {
            row[j] += (1.0 - smoothing) * w / wsum;
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
        rows.push(row);
    }
    TransitionMatrix::from_rows(vocab, &rows, 0.0)
}
