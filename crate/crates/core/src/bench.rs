//! Sweep harness behind `specdec bench`.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::decode_loop::{run_session, DecodeMode, HeadNoise, MarkovHeadSource, SessionConfig};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::transition::TransitionMatrix;

pub const CSV_HEADER: &str =
    "n,k,mode,seed,trial,invocations,m_mean,viterbi_ops,us_source,us_reduce,us_viterbi";

/// One session's measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub n: usize,
    pub k: usize,
    pub mode: DecodeMode,
    pub seed: u64,
    pub trial: usize,
    pub invocations: usize,
    pub m_mean: f64,
    /// Σ (n − 1)·m² over steps for trellis modes, 0 for greedy.
    pub viterbi_ops: u64,
    /// Per-step candidate counts, kept for consistency checks.
    pub m_per_step: Vec<usize>,
    pub us_source: u128,
    pub us_reduce: u128,
    pub us_viterbi: u128,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.4},{},{},{},{}",
            self.n,
            self.k,
            self.mode,
            self.seed,
            self.trial,
            self.invocations,
            self.m_mean,
            self.viterbi_ops,
            self.us_source,
            self.us_reduce,
            self.us_viterbi
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub modes: Vec<DecodeMode>,
    pub target_len: usize,
    pub trials: usize,
    /// Trial t runs with seed `seed + t`.
    pub seed: u64,
    pub noise: HeadNoise,
}

/// Runs one session per (n, k, mode, trial) from an empty prompt, using
/// `q` both as the ground-truth chain for the heads and as the decoder's
/// transition model. Rows come back sorted by (n, k, mode, trial).
pub fn run_bench(
    q: Arc<TransitionMatrix>,
    config: &BenchConfig,
    exec: Execution,
) -> Result<Vec<BenchRecord>> {
    let v = q.vocab().size();
    if config.n_list.is_empty() || config.k_list.is_empty() || config.modes.is_empty() {
        return Err(Error::Parameter(
            "n, k and mode lists must be non-empty".into(),
        ));
    }
    if config.n_list.contains(&0) {
        return Err(Error::Parameter("head counts must be positive".into()));
    }
    if let Some(k) = config.k_list.iter().find(|&&k| k == 0 || k > v) {
        return Err(Error::Parameter(format!("top-k {k} outside [1, {v}]")));
    }
    if config.trials == 0 || config.target_len == 0 {
        return Err(Error::Parameter(
            "trials and length must be positive".into(),
        ));
    }

    let mut cells = Vec::new();
    for &n in &config.n_list {
        for &k in &config.k_list {
            for &mode in &config.modes {
                for trial in 0..config.trials {
                    cells.push((n, k, mode, trial));
                }
            }
        }
    }
    let rows = exec.map(&cells, |&(n, k, mode, trial)| -> Result<BenchRecord> {
        let seed = config.seed.wrapping_add(trial as u64);
        let mut source = MarkovHeadSource::new(q.clone(), n, config.noise, seed)?;
        let mut session = SessionConfig::new(config.target_len, k, mode);
        session.seed = seed;
        let (_, stats) = run_session(&mut source, &q, &[], &session)?;
        Ok(BenchRecord {
            n,
            k,
            mode,
            seed,
            trial,
            invocations: stats.invocations,
            m_mean: stats.m_mean(),
            viterbi_ops: stats.viterbi_ops(),
            m_per_step: stats.steps.iter().map(|s| s.m).collect(),
            us_source: stats.source_time().as_micros(),
            us_reduce: stats.reduce_time().as_micros(),
            us_viterbi: stats.select_time().as_micros(),
        })
    });
    let mut rows: Vec<BenchRecord> = rows.into_iter().collect::<Result<_>>()?;
    rows.sort_by_key(|r| (r.n, r.k, r.mode, r.trial));
    Ok(rows)
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode_loop::random_chain;
    use crate::token::Vocabulary;
    use crate::viterbi::count_viterbi_ops;

    fn config(n_list: Vec<usize>, k_list: Vec<usize>) -> BenchConfig {
        BenchConfig {
            n_list,
            k_list,
            modes: vec![DecodeMode::Viterbi, DecodeMode::Greedy],
            target_len: 64,
            trials: 2,
            seed: 5,
            noise: HeadNoise::default(),
        }
    }

    #[test]
    fn rows_are_sorted_and_consistent() {
        let q = Arc::new(random_chain(Vocabulary::new(32).unwrap(), 4, 0.05, 1).unwrap());
        let rows = run_bench(q, &config(vec![4, 1, 2], vec![3, 2]), Execution::Parallel).unwrap();
        assert_eq!(rows.len(), 3 * 2 * 2 * 2);
        let keys: Vec<_> = rows.iter().map(|r| (r.n, r.k, r.mode, r.trial)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for r in &rows {
            assert_eq!(r.invocations, 64usize.div_ceil(r.n));
            assert_eq!(r.seed, 5 + r.trial as u64);
            let want: u64 = match r.mode {
                DecodeMode::Greedy => 0,
                _ => r
                    .m_per_step
                    .iter()
                    .map(|&m| count_viterbi_ops(r.n, m))
                    .sum(),
            };
            assert_eq!(r.viterbi_ops, want);
        }
    }

    #[test]
    fn csv_layout() {
        let q = Arc::new(random_chain(Vocabulary::new(8).unwrap(), 2, 0.1, 2).unwrap());
        let rows = run_bench(q, &config(vec![2], vec![3]), Execution::Sequential).unwrap();
        let csv = to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 11);
        assert_eq!(&first[..6], &["2", "3", "viterbi", "5", "0", "32"]);
    }

    #[test]
    fn rejects_bad_lists() {
        let q = Arc::new(random_chain(Vocabulary::new(8).unwrap(), 2, 0.1, 2).unwrap());
        assert!(run_bench(q.clone(), &config(vec![], vec![3]), Execution::Sequential).is_err());
        assert!(run_bench(q.clone(), &config(vec![0], vec![3]), Execution::Sequential).is_err());
        assert!(run_bench(q, &config(vec![2], vec![9]), Execution::Sequential).is_err());
    }
}
