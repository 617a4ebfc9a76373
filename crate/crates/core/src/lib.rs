//! Viterbi-based speculative decoding for multi-token prediction.
//!
//! A model with n prediction heads proposes n future-token distributions per
//! invocation. This crate keeps each head's top-k tokens, gathers the
//! matching block of a bigram transition matrix estimated from a token
//! corpus, and picks the jointly most probable n-token continuation with a
//! log-space trellis search.
//!
//! Modules, bottom-up:
//! - [`token`]: token ids, vocabulary and the corpus text format
//! - [`transition`]: bigram counting, smoothing and the binary matrix file
//! - [`reducer`]: top-k candidate selection and the reduced problem
//! - [`viterbi`]: trellis search, brute-force oracle, greedy baseline
//! - [`decode_loop`]: head sources and generation sessions
//! - [`mtp_objective`]: the multi-head negative log-likelihood
//! - [`bench`], [`cli`]: sweep harness and command-line surface

pub mod bench;
pub mod cli;
pub mod decode_loop;
pub mod error;
pub mod mtp_objective;
pub mod parallel;
pub mod reducer;
pub mod token;
pub mod transition;
pub mod viterbi;

pub use decode_loop::{
    compare_strategies, gen_synthetic_corpus, run_session, DecodeMode, HeadNoise, HeadSource,
    MarkovHeadSource, ReplayHeadSource, SessionConfig, SessionStats,
};
pub use error::{Error, Result};
pub use parallel::Execution;
pub use reducer::{
    build_reduced, topk_per_head, CandidateSet, MaskMode, ReducedProblem, StepDistributions,
};
pub use token::{load_corpus, save_corpus, TokenCorpus, TokenId, Vocabulary};
pub use transition::{
    count_bigrams, estimate_transitions, load_transitions, merge_counts, save_transitions,
    BigramCounts, TransitionMatrix,
};
pub use viterbi::{
    brute_force_decode, count_viterbi_ops, greedy_decode, viterbi_decode, DecodedPath,
};
