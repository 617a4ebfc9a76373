use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use specdec::bench::CSV_HEADER;
use specdec::load_transitions;

fn specdec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specdec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(o: &Output, key: &str) -> String {
    let prefix = format!("{key}: ");
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_owned))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(o)))
}

/// Synthesizes a corpus and its generating chain.
fn synth(dir: &Path, vocab: usize) -> (PathBuf, PathBuf) {
    let corpus = dir.join("corpus.txt");
    let chain = dir.join("chain.sdtq");
    let out = specdec(&[
        "synth",
        "--vocab",
        &vocab.to_string(),
        "--sequences",
        "50",
        "--length",
        "64",
        "--seed",
        "11",
        "--out",
        s(&corpus),
        "--chain-out",
        s(&chain),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (corpus, chain)
}

#[test]
fn alternating_corpus_without_smoothing() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    std::fs::write(&corpus, "0 1 0 1\n").unwrap();
    let q_path = dir.path().join("q.sdtq");
    let out = specdec(&[
        "build-transitions",
        "--corpus",
        s(&corpus),
        "--out",
        s(&q_path),
        "--alpha",
        "0",
    ]);
    assert!(out.status.success());
    assert_eq!(field(&out, "V"), "2");
    assert_eq!(field(&out, "bigrams"), "3");
    let q = load_transitions(&q_path).unwrap();
    assert_eq!(q.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
}

#[test]
fn sharded_build_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, _) = synth(dir.path(), 40);
    let one = dir.path().join("one.sdtq");
    let four = dir.path().join("four.sdtq");
    for (path, shards) in [(&one, "1"), (&four, "4")] {
        let o = specdec(&[
            "build-transitions",
            "--corpus",
            s(&corpus),
            "--out",
            s(path),
            "--shards",
            shards,
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&four).unwrap());
}

#[test]
fn missing_corpus_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let q_path = dir.path().join("q.sdtq");
    let out = specdec(&[
        "build-transitions",
        "--corpus",
        s(&dir.path().join("nope.txt")),
        "--out",
        s(&q_path),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!q_path.exists());
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_corpus_and_bad_flags_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    std::fs::write(&corpus, "0 1 x\n").unwrap();
    let q_path = dir.path().join("q.sdtq");
    let out = specdec(&[
        "build-transitions",
        "--corpus",
        s(&corpus),
        "--out",
        s(&q_path),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(specdec(&["decode", "--bogus"]).status.code(), Some(1));
    assert_eq!(specdec(&["--help"]).status.code(), Some(0));
}

#[test]
fn decode_reports_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let (_, chain) = synth(dir.path(), 16);
    let seq = dir.path().join("seq.txt");
    let out = specdec(&[
        "decode",
        "--transitions",
        s(&chain),
        "--source",
        "markov:3",
        "--n",
        "4",
        "--len",
        "10",
        "--out",
        s(&seq),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(field(&out, "invocations"), "3");
    let text = std::fs::read_to_string(&seq).unwrap();
    assert_eq!(text.split_whitespace().count(), 10);
}

#[test]
fn viterbi_scores_at_least_greedy_on_the_same_heads() {
    let dir = tempfile::tempdir().unwrap();
    let (_, chain) = synth(dir.path(), 32);
    let ll = |mode: &str| -> f64 {
        let o = specdec(&[
            "decode",
            "--transitions",
            s(&chain),
            "--source",
            "markov:21",
            "--n",
            "8",
            "--len",
            "200",
            "--prompt",
            "1",
            "--mode",
            mode,
            "--out",
            s(&dir.path().join(mode)),
        ]);
        assert!(o.status.success());
        field(&o, "mean_log_likelihood").parse().unwrap()
    };
    assert!(ll("viterbi") > ll("greedy"));
}

#[test]
fn decode_is_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let (_, chain) = synth(dir.path(), 20);
    let first = dir.path().join("a.txt");
    let second = dir.path().join("b.txt");
    let replayed = dir.path().join("r.txt");
    let heads = dir.path().join("heads.txt");
    let base = [
        "decode",
        "--transitions",
        s(&chain),
        "--n",
        "3",
        "--len",
        "40",
        "--prompt",
        "2 5",
    ];
    let run = |extra: &[&str]| {
        let mut args = base.to_vec();
        args.extend_from_slice(extra);
        let o = specdec(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        o
    };
    run(&[
        "--source",
        "markov:8",
        "--out",
        s(&first),
        "--record",
        s(&heads),
    ]);
    run(&["--source", "markov:8", "--out", s(&second)]);
    let replay = format!("replay:{}", s(&heads));
    run(&["--source", &replay, "--out", s(&replayed)]);
    let a = std::fs::read(&first).unwrap();
    assert_eq!(a, std::fs::read(&second).unwrap());
    assert_eq!(a, std::fs::read(&replayed).unwrap());

    // A replay file with too few blocks cannot cover a longer session.
    let short = dir.path().join("short.txt");
    let o = specdec(&[
        "decode",
        "--transitions",
        s(&chain),
        "--source",
        &replay,
        "--len",
        "80",
        "--prompt",
        "2 5",
        "--out",
        s(&short),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (_, chain) = synth(dir.path(), 16);
    let csv = dir.path().join("bench.csv");
    let o = specdec(&[
        "bench",
        "--transitions",
        s(&chain),
        "--n-list",
        "1,2,4,8",
        "--len",
        "1024",
        "--modes",
        "viterbi",
        "--seed",
        "4",
        "--out",
        s(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&o, "rows"), "4");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let invocations: Vec<&str> = lines.map(|l| l.split(',').nth(5).unwrap()).collect();
    assert_eq!(invocations, ["1024", "512", "256", "128"]);
}

#[test]
fn bench_rejects_oversized_k() {
    let dir = tempfile::tempdir().unwrap();
    let (_, chain) = synth(dir.path(), 8);
    let o = specdec(&[
        "bench",
        "--transitions",
        s(&chain),
        "--k-list",
        "9",
        "--seed",
        "1",
        "--out",
        s(&dir.path().join("x.csv")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
