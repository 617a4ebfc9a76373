//! Bigram counting, additive-smoothing estimation and the binary
//! transition-matrix file.
//!
//! Transition file layout (little-endian):
//!
//! | bytes | content                         |
//! |-------|---------------------------------|
//! | 4     | magic `SDTQ`                    |
//! | 4     | format version, `u32` = 1       |
//! | 8     | vocabulary size V, `u64`        |
//! | 8     | smoothing alpha, `f64`          |
//! | 8·V²  | entries, `f64`, row-major       |

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::reducer::floor_log;
use crate::token::{TokenCorpus, TokenId, Vocabulary};

pub const MAGIC: &[u8; 4] = b"SDTQ";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8;

/// Rows of a stochastic matrix must sum to one within this tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Dense V×V bigram counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigramCounts {
    vocab: Vocabulary,
    counts: Vec<u64>,
}

impl BigramCounts {
    pub fn zeros(vocab: Vocabulary) -> Self {
        let v = vocab.size();
        BigramCounts {
            vocab,
            counts: vec![0; v * v],
        }
    }

    /// Builds counts from a row-major V×V table.
    pub fn from_rows(vocab: Vocabulary, rows: &[Vec<u64>]) -> Result<Self> {
        let v = vocab.size();
        if rows.len() != v || rows.iter().any(|r| r.len() != v) {
            return Err(Error::Dimension(format!("expected {v}x{v} count table")));
        }
        Ok(BigramCounts {
            vocab,
            counts: rows.concat(),
        })
    }

    pub fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> u64 {
        self.counts[from * self.vocab.size() + to]
    }

    pub fn row(&self, from: usize) -> &[u64] {
        let v = self.vocab.size();
        &self.counts[from * v..(from + 1) * v]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.counts
            .chunks(self.vocab.size())
            .map(<[u64]>::to_vec)
            .collect()
    }

    fn add_sequence(&mut self, seq: &[TokenId]) {
        let v = self.vocab.size();
        for pair in seq.windows(2) {
            self.counts[pair[0].index() * v + pair[1].index()] += 1;
        }
    }
}

/// Counts adjacent pairs within each sequence of the corpus.
pub fn count_bigrams(corpus: &TokenCorpus) -> BigramCounts {
    count_sequences(corpus.vocab(), corpus.sequences())
}

fn count_sequences(vocab: Vocabulary, sequences: &[Vec<TokenId>]) -> BigramCounts {
    let mut counts = BigramCounts::zeros(vocab);
    for seq in sequences {
        counts.add_sequence(seq);
    }
    counts
}

/// Counts bigrams over `shards` contiguous, sequence-disjoint slices of the
/// corpus and merges them. The result equals [`count_bigrams`] exactly.
pub fn count_bigrams_sharded(
    corpus: &TokenCorpus,
    shards: usize,
    exec: Execution,
) -> Result<BigramCounts> {
    if shards == 0 {
        return Err(Error::Parameter("shard count must be positive".into()));
    }
    let seqs = corpus.sequences();
    let chunk = seqs.len().div_ceil(shards).max(1);
    let parts: Vec<&[Vec<TokenId>]> = seqs.chunks(chunk).collect();
    let vocab = corpus.vocab();
    let partials = exec.map(&parts, |part| count_sequences(vocab, part));
    partials
        .into_iter()
        .try_fold(BigramCounts::zeros(vocab), |acc, p| merge_counts(&acc, &p))
}

/// Elementwise sum of two count tables over the same vocabulary.
pub fn merge_counts(a: &BigramCounts, b: &BigramCounts) -> Result<BigramCounts> {
    if a.vocab != b.vocab {
        return Err(Error::Dimension(format!(
            "cannot merge counts over vocabularies {} and {}",
            a.vocab, b.vocab
        )));
    }
    let counts = a.counts.iter().zip(&b.counts).map(|(x, y)| x + y).collect();
    Ok(BigramCounts {
        vocab: a.vocab,
        counts,
    })
}

/// Row-stochastic bigram model: `get(i, j)` is P(next = j | prev = i).
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    vocab: Vocabulary,
    alpha: f64,
    entries: Vec<f64>,
    /// Floored logs of `entries`, filled on first use.
    log_entries: OnceLock<Vec<f64>>,
}

impl PartialEq for TransitionMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.vocab == other.vocab && self.alpha == other.alpha && self.entries == other.entries
    }
}

impl TransitionMatrix {
    /// Validates and wraps a row-major V×V probability table.
    pub fn from_rows(vocab: Vocabulary, rows: &[Vec<f64>], alpha: f64) -> Result<Self> {
        let v = vocab.size();
        if rows.len() != v || rows.iter().any(|r| r.len() != v) {
            return Err(Error::Dimension(format!(
                "expected {v}x{v} transition table"
            )));
        }
        Self::from_flat(vocab, rows.concat(), alpha)
    }

    fn from_flat(vocab: Vocabulary, entries: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        let v = vocab.size();
        for (i, row) in entries.chunks(v).enumerate() {
            if let Some(bad) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Numeric(format!(
                    "row {i} has entry {bad} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Numeric(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(TransitionMatrix {
            vocab,
            alpha,
            entries,
            log_entries: OnceLock::new(),
        })
    }

    pub fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    /// Smoothing constant used at estimation time (0 for hand-built matrices).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.vocab.size() + to]
    }

    #[inline]
    pub fn row(&self, from: usize) -> &[f64] {
        let v = self.vocab.size();
        &self.entries[from * v..(from + 1) * v]
    }

    /// Row of floored log probabilities, computed once for the whole matrix.
    #[inline]
    pub fn log_row(&self, from: usize) -> &[f64] {
        let v = self.vocab.size();
        let logs = self
            .log_entries
            .get_or_init(|| self.entries.iter().map(|&p| floor_log(p)).collect());
        &logs[from * v..(from + 1) * v]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.vocab.size())
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// One step of the chain: returns `dist · Q`.
    pub fn propagate(&self, dist: &[f64]) -> Vec<f64> {
        let v = self.vocab.size();
        debug_assert_eq!(dist.len(), v);
        let mut out = vec![0.0; v];
        for (i, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (o, &q) in out.iter_mut().zip(self.row(i)) {
                *o += p * q;
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(HEADER_LEN + self.entries.len() * 8);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.vocab.size() as u64).to_le_bytes());
        buf.extend_from_slice(&self.alpha.to_le_bytes());
        for x in &self.entries {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!(
                "truncated header: {} bytes, need {HEADER_LEN}",
                bytes.len()
            )));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::Format(format!("bad magic bytes {:?}", &bytes[0..4])));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version}"
            )));
        }
        let v = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let alpha = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let body_len = usize::try_from(v)
            .ok()
            .and_then(|v| v.checked_mul(v))
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Format(format!("vocabulary size {v} overflows")))?;
        let body = &bytes[HEADER_LEN..];
        if body.len() < body_len {
            return Err(Error::Format(format!(
                "truncated body: {} bytes, need {body_len}",
                body.len()
            )));
        }
        if body.len() > body_len {
            return Err(Error::Format(format!(
                "{} trailing bytes after matrix",
                body.len() - body_len
            )));
        }
        let vocab = Vocabulary::new(v as usize).map_err(|e| Error::Format(e.to_string()))?;
        let entries = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_flat(vocab, entries, alpha).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Additive smoothing: `Q(i,j) = (c_ij + alpha) / (row_i + alpha·V)`.
pub fn estimate_transitions(counts: &BigramCounts, alpha: f64) -> Result<TransitionMatrix> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    let v = counts.vocab.size();
    let mut entries = Vec::with_capacity(v * v);
    for i in 0..v {
        let row = counts.row(i);
        let row_sum: u64 = row.iter().sum();
        if alpha == 0.0 && row_sum == 0 {
            return Err(Error::DegenerateRow { row: i });
        }
        let denom = row_sum as f64 + alpha * v as f64;
        entries.extend(row.iter().map(|&c| (c as f64 + alpha) / denom));
    }
    TransitionMatrix::from_flat(counts.vocab, entries, alpha)
}

pub fn save_transitions(q: &TransitionMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, q.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_transitions(path: impl AsRef<Path>) -> Result<TransitionMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    TransitionMatrix::from_bytes(&bytes)
}
