//! `specdec` command-line interface.
//!
//! Exit codes: 0 on success, 1 for user or input errors, 2 when an internal
//! invariant is violated.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Report line on stdout; a closed pipe is not an error.
macro_rules! report {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

use crate::bench::{run_bench, to_csv, BenchConfig};
use crate::decode_loop::{
    gen_synthetic_corpus, mean_log_likelihood, random_chain, run_session, DecodeMode, HeadNoise,
    HeadSource, MarkovHeadSource, RecordingHeadSource, ReplayHeadSource, SessionConfig,
};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::reducer::MaskMode;
use crate::token::{load_corpus, save_corpus, write_sequence, TokenId, Vocabulary};
use crate::transition::{
    count_bigrams_sharded, estimate_transitions, load_transitions, save_transitions,
};

#[derive(Debug, Parser)]
#[command(
    name = "specdec",
    version,
    about = "Viterbi-based multi-token speculative decoding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a transition matrix from a token corpus.
    BuildTransitions(BuildArgs),
    /// Run one decoding session and write the generated sequence.
    Decode(DecodeArgs),
    /// Sweep head counts, top-k and modes; write one CSV row per session.
    Bench(BenchArgs),
    /// Sample a random sparse chain and a corpus from it.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Additive smoothing constant.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    /// Declared vocabulary size; inferred from the corpus when absent.
    #[arg(long)]
    pub vocab: Option<usize>,
}

/// Where head distributions come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceSpec {
    /// Synthetic heads over the transition matrix; `None` draws a seed.
    Markov(Option<u64>),
    Replay(PathBuf),
}

impl FromStr for SourceSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "markov" {
            return Ok(SourceSpec::Markov(None));
        }
        if let Some(seed) = s.strip_prefix("markov:") {
            return seed
                .parse()
                .map(|v| SourceSpec::Markov(Some(v)))
                .map_err(|_| format!("bad markov seed {seed:?}"));
        }
        if let Some(path) = s.strip_prefix("replay:") {
            if path.is_empty() {
                return Err("replay source needs a path".into());
            }
            return Ok(SourceSpec::Replay(PathBuf::from(path)));
        }
        Err(format!("expected markov[:SEED] or replay:PATH, got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Viterbi,
    Greedy,
    Stochastic,
}

impl From<ModeArg> for DecodeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Viterbi => DecodeMode::Viterbi,
            ModeArg::Greedy => DecodeMode::Greedy,
            ModeArg::Stochastic => DecodeMode::Stochastic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskArg {
    Retain,
    Strict,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub transitions: PathBuf,
    /// markov[:SEED] or replay:PATH
    #[arg(long, default_value = "markov")]
    pub source: SourceSpec,
    /// Number of heads (markov source); a replay file fixes its own.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Final sequence length, prompt included.
    #[arg(long)]
    pub len: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Viterbi)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Space-separated prompt tokens.
    #[arg(long, default_value = "")]
    pub prompt: String,
    #[arg(long, value_enum, default_value_t = MaskArg::Retain)]
    pub mask: MaskArg,
    /// Condition the first head on the last committed token.
    #[arg(long)]
    pub anchored: bool,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Seed for stochastic mode with a replay source.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Record the head outputs to a replay file (all V pairs per head).
    #[arg(long)]
    pub record: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub transitions: PathBuf,
    #[arg(long, default_value = "1,2,4,8")]
    pub n_list: String,
    #[arg(long, default_value = "3")]
    pub k_list: String,
    #[arg(long, default_value = "viterbi,greedy")]
    pub modes: String,
    #[arg(long, default_value_t = 1024)]
    pub len: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Run sessions one at a time (cleaner timings).
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub vocab: usize,
    /// Likely successors per token.
    #[arg(long, default_value_t = 3)]
    pub branching: usize,
    /// Probability mass spread uniformly over all successors.
    #[arg(long, default_value_t = 0.05)]
    pub smoothing: f64,
    #[arg(long, default_value_t = 1000)]
    pub sequences: usize,
    #[arg(long, default_value_t = 512)]
    pub length: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the generating chain as a transition file.
    #[arg(long)]
    pub chain_out: Option<PathBuf>,
}

/// A library error tagged with the stage that produced it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, StageError>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

type CliResult = std::result::Result<(), StageError>;

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::BuildTransitions(a) => cmd_build_transitions(&a),
        Command::Decode(a) => cmd_decode(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Synth(a) => cmd_synth(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.error.exit_code()
        }
    }
}

fn draw_seed(label: &str) -> u64 {
    let seed = rand::random::<u64>();
    report!("{label} seed: {seed}");
    seed
}

pub fn cmd_build_transitions(args: &BuildArgs) -> CliResult {
    let started = Instant::now();
    let declared = args
        .vocab
        .map(Vocabulary::new)
        .transpose()
        .stage("checking arguments")?;
    let corpus = load_corpus(&args.corpus, declared).stage("loading corpus")?;
    let exec = if args.shards > 1 {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    let counts = count_bigrams_sharded(&corpus, args.shards, exec).stage("counting bigrams")?;
    let q = estimate_transitions(&counts, args.alpha).stage("estimating transitions")?;
    save_transitions(&q, &args.out).stage("writing transitions")?;
    report!("V: {}", q.vocab());
    report!("bigrams: {}", counts.total());
    report!("elapsed_ms: {}", started.elapsed().as_millis());
    Ok(())
}

fn parse_prompt(text: &str) -> Result<Vec<TokenId>> {
    text.split_whitespace()
        .map(|f| {
            f.parse::<u32>()
                .map(TokenId)
                .map_err(|_| Error::Parameter(format!("bad prompt token {f:?}")))
        })
        .collect()
}

pub fn cmd_decode(args: &DecodeArgs) -> CliResult {
    let q = Arc::new(load_transitions(&args.transitions).stage("loading transitions")?);
    let prompt = parse_prompt(&args.prompt).stage("parsing prompt")?;
    let noise = HeadNoise {
        gamma: args.gamma,
        jitter: args.jitter,
    };

    let (mut source, seed): (Box<dyn HeadSource>, u64) = match &args.source {
        SourceSpec::Markov(seed) => {
            let seed = seed.unwrap_or_else(|| draw_seed("markov"));
            let n = args.n.unwrap_or(8);
            let src = MarkovHeadSource::new(q.clone(), n, noise, seed).stage("building source")?;
            (Box::new(src), seed)
        }
        SourceSpec::Replay(path) => {
            let src = ReplayHeadSource::load(path).stage("loading replay")?;
            if let Some(n) = args.n.filter(|&n| n != src.num_heads()) {
                return Err(Error::Parameter(format!(
                    "--n {n} differs from the replay file's {} heads",
                    src.num_heads()
                )))
                .stage("loading replay");
            }
            let seed = match (args.seed, args.mode) {
                (Some(s), _) => s,
                (None, ModeArg::Stochastic) => draw_seed("stochastic"),
                (None, _) => 0,
            };
            (Box::new(src), seed)
        }
    };

    let heads = source.num_heads();
    let mut config = SessionConfig::new(args.len, args.k, args.mode.into());
    config.mask = match args.mask {
        MaskArg::Retain => MaskMode::RetainTrue,
        MaskArg::Strict => MaskMode::Strict,
    };
    config.anchored = args.anchored;
    config.seed = seed;

    let (sequence, stats) = if let Some(path) = &args.record {
        let v = source.vocab().size();
        let mut rec = RecordingHeadSource::new(source, v).stage("recording")?;
        let out = run_session(&mut rec, &q, &prompt, &config).stage("decoding")?;
        rec.save(path).stage("writing replay")?;
        out
    } else {
        run_session(&mut source, &q, &prompt, &config).stage("decoding")?
    };

    let mut text = String::new();
    write_sequence(&mut text, &sequence);
    fs::write(&args.out, text)
        .map_err(|e| Error::Io {
            path: args.out.clone(),
            source: e,
        })
        .stage("writing output")?;

    let steps = stats.steps.len().max(1) as u128;
    report!("n: {heads}");
    report!("k: {}", args.k);
    report!("mode: {}", config.mode);
    report!("invocations: {}", stats.invocations);
    report!("viterbi_ops: {}", stats.viterbi_ops());
    report!("m_mean: {:.4}", stats.m_mean());
    report!(
        "mean_log_likelihood: {:.6}",
        mean_log_likelihood(&q, &sequence, prompt.len())
    );
    report!(
        "us_source_per_step: {}",
        stats.source_time().as_micros() / steps
    );
    report!(
        "us_reduce_per_step: {}",
        stats.reduce_time().as_micros() / steps
    );
    report!(
        "us_viterbi_per_step: {}",
        stats.select_time().as_micros() / steps
    );
    Ok(())
}

fn parse_list<T: FromStr>(name: &str, text: &str) -> Result<Vec<T>> {
    let items: Result<Vec<T>> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("bad {name} entry {s:?}")))
        })
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(Error::Parameter(format!("{name} is empty")));
    }
    Ok(items)
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult {
    let config = (|| -> Result<BenchConfig> {
        Ok(BenchConfig {
            n_list: parse_list("n-list", &args.n_list)?,
            k_list: parse_list("k-list", &args.k_list)?,
            modes: parse_list("modes", &args.modes)?,
            target_len: args.len,
            trials: args.trials,
            seed: args.seed.unwrap_or_else(|| draw_seed("bench")),
            noise: HeadNoise {
                gamma: args.gamma,
                jitter: args.jitter,
            },
        })
    })()
    .stage("checking arguments")?;
    let q = Arc::new(load_transitions(&args.transitions).stage("loading transitions")?);
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let records = run_bench(q, &config, exec).stage("running bench")?;
    fs::write(&args.out, to_csv(&records))
        .map_err(|e| Error::Io {
            path: args.out.clone(),
            source: e,
        })
        .stage("writing csv")?;
    report!("rows: {}", records.len());
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult {
    let vocab = Vocabulary::new(args.vocab).stage("checking arguments")?;
    let seed = args.seed.unwrap_or_else(|| draw_seed("synth"));
    let chain =
        random_chain(vocab, args.branching, args.smoothing, seed).stage("building chain")?;
    let corpus = gen_synthetic_corpus(
        &chain,
        args.sequences,
        args.length,
        seed,
        Execution::Parallel,
    )
    .stage("sampling corpus")?;
    save_corpus(&corpus, &args.out).stage("writing corpus")?;
    if let Some(path) = &args.chain_out {
        save_transitions(&chain, path).stage("writing chain")?;
    }
    report!("sequences: {}", corpus.len());
    report!("bigrams: {}", corpus.bigram_total());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_specs() {
        assert_eq!(
            "markov".parse::<SourceSpec>().unwrap(),
            SourceSpec::Markov(None)
        );
        assert_eq!(
            "markov:42".parse::<SourceSpec>().unwrap(),
            SourceSpec::Markov(Some(42))
        );
        assert_eq!(
            "replay:/tmp/x.txt".parse::<SourceSpec>().unwrap(),
            SourceSpec::Replay(PathBuf::from("/tmp/x.txt"))
        );
        assert!("markov:x".parse::<SourceSpec>().is_err());
        assert!("replay:".parse::<SourceSpec>().is_err());
        assert!("file:a".parse::<SourceSpec>().is_err());
    }

    #[test]
    fn decode_defaults_follow_best_configuration() {
        let cli = Cli::try_parse_from([
            "specdec",
            "decode",
            "--transitions",
            "q.bin",
            "--len",
            "10",
            "--out",
            "o.txt",
        ])
        .unwrap();
        let Command::Decode(a) = cli.command else {
            panic!("expected decode")
        };
        assert_eq!(a.n, None);
        assert_eq!(a.k, 3);
        assert_eq!(a.mode, ModeArg::Viterbi);
        assert_eq!(a.source, SourceSpec::Markov(None));
    }

    #[test]
    fn lists() {
        assert_eq!(
            parse_list::<usize>("n", "1,2,4,8").unwrap(),
            vec![1, 2, 4, 8]
        );
        assert!(parse_list::<usize>("n", "1,,2").is_err());
        assert!(parse_list::<usize>("n", "a").is_err());
        assert_eq!(
            parse_list::<DecodeMode>("m", "viterbi,greedy").unwrap(),
            vec![DecodeMode::Viterbi, DecodeMode::Greedy]
        );
    }

    #[test]
    fn bad_arguments_exit_one() {
        assert_eq!(run(["specdec", "decode"]), 1);
        assert_eq!(run(["specdec", "nope"]), 1);
        assert_eq!(run(["specdec", "--help"]), 0);
    }
}
