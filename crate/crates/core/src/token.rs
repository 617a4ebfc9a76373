//! Token alphabet and the plain-text corpus format.
//!
//! A corpus file holds one sequence per line, tokens written as base-10
//! unsigned integers separated by single spaces, every line terminated by
//! LF. Empty lines are rejected rather than skipped.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A token index into a [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct TokenId(pub u32);

impl TokenId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for TokenId {
    fn from(v: u32) -> Self {
        TokenId(v)
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Size of the token alphabet. Always at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vocabulary(usize);

impl Vocabulary {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Parameter(format!(
                "vocabulary size must be at least 2, got {size}"
            )));
        }
        if size > u32::MAX as usize {
            return Err(Error::Parameter(format!(
                "vocabulary size {size} too large"
            )));
        }
        Ok(Vocabulary(size))
    }

    #[inline]
    pub fn size(self) -> usize {
        self.0
    }

    #[inline]
    pub fn contains(self, token: TokenId) -> bool {
        token.index() < self.0
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An ordered collection of non-empty token sequences over one vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenCorpus {
    vocab: Vocabulary,
    sequences: Vec<Vec<TokenId>>,
}

impl TokenCorpus {
    pub fn new(vocab: Vocabulary, sequences: Vec<Vec<TokenId>>) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        for (i, seq) in sequences.iter().enumerate() {
            if seq.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "empty sequence".into(),
                });
            }
            if let Some(bad) = seq.iter().find(|t| !vocab.contains(**t)) {
                return Err(Error::VocabularyViolation {
                    line: i + 1,
                    token: bad.0 as u64,
                    vocab: vocab.size(),
                });
            }
        }
        Ok(TokenCorpus { vocab, sequences })
    }

    pub fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    pub fn sequences(&self) -> &[Vec<TokenId>] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Number of adjacent token pairs, never crossing sequence boundaries.
    pub fn bigram_total(&self) -> u64 {
        self.sequences.iter().map(|s| s.len() as u64 - 1).sum()
    }

    /// Parses corpus text. When `declared` is `None` the vocabulary size is
    /// one more than the largest token id observed.
    pub fn parse(text: &str, declared: Option<Vocabulary>) -> Result<Self> {
        if text.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut sequences = Vec::new();
        let mut max_id: u32 = 0;
        for (idx, line) in body.split('\n').enumerate() {
            let line_no = idx + 1;
            if line.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty line".into(),
                });
            }
            let mut seq = Vec::new();
            for field in line.split(' ') {
                let id = parse_token(field).ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("not an unsigned integer token: {field:?}"),
                })?;
                if let Some(v) = declared {
                    if id >= v.size() as u64 {
                        return Err(Error::VocabularyViolation {
                            line: line_no,
                            token: id,
                            vocab: v.size(),
                        });
                    }
                }
                let id = u32::try_from(id)
                    .ok()
                    .filter(|&i| i < u32::MAX)
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("token id {id} out of range"),
                    })?;
                max_id = max_id.max(id);
                seq.push(TokenId(id));
            }
            sequences.push(seq);
        }
        let vocab = match declared {
            Some(v) => v,
            None => Vocabulary::new(max_id as usize + 1)?,
        };
        Ok(TokenCorpus { vocab, sequences })
    }

    /// Renders the corpus in the on-disk text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for seq in &self.sequences {
            write_sequence(&mut out, seq);
        }
        out
    }
}

fn parse_token(field: &str) -> Option<u64> {
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    field.parse().ok()
}

/// Appends `seq` as one corpus line (space separated, LF terminated).
pub fn write_sequence(out: &mut String, seq: &[TokenId]) {
    use std::fmt::Write as _;
    for (i, t) in seq.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{}", t.0);
    }
    out.push('\n');
}

pub fn load_corpus(path: impl AsRef<Path>, declared: Option<Vocabulary>) -> Result<TokenCorpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TokenCorpus::parse(&text, declared)
}

pub fn save_corpus(corpus: &TokenCorpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, corpus.to_text()).map_err(|e| Error::io(path, e))
}
