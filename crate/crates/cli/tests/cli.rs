use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use noisemt_core::synth::document_text;
use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_noisemt");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(BIN);
    cmd.current_dir(dir).args(args);
    for (k, _) in std::env::vars() {
        if k.starts_with("NOISEMT_") {
            cmd.env_remove(k);
        }
    }
    cmd.envs(env.iter().copied());
    let Output { status, stdout, stderr } = cmd.output().expect("binary runs");
    Run {
        code: status.code().expect("exit code"),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn run(dir: &Path, args: &[&str]) -> Run {
    run_env(dir, args, &[])
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let r = run(dir, args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r.stdout
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn sidecar(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, &format!("{name}.meta.json"))).unwrap()
}

fn corpus_text(n: usize, seed: u64) -> String {
    document_text(1, n, 8, 40, seed)
}

#[test]
fn bleu_identity_is_one_hundred() {
    let d = TempDir::new().unwrap();
    write(d.path(), "h.txt", "the cat sat on the mat\na b c d e\n");
    let out = ok(d.path(), &["bleu", "--hyp", "h.txt", "--ref", "h.txt"]);
    assert!(out.starts_with("BLEU = 100.00 "), "{out}");
    let json: Value =
        serde_json::from_str(&ok(d.path(), &["bleu", "--hyp", "h.txt", "--ref", "h.txt", "--json"])).unwrap();
    assert_eq!(json["score"], 100.0);
}

#[test]
fn bleu_hand_computed_and_sentence_level() {
    let d = TempDir::new().unwrap();
    write(d.path(), "h.txt", "a b c d\n");
    write(d.path(), "r.txt", "a b c d e\n");
    let json: Value =
        serde_json::from_str(&ok(d.path(), &["bleu", "--hyp", "h.txt", "--ref", "r.txt", "--json"])).unwrap();
    assert!((json["score"].as_f64().unwrap() - 77.88).abs() < 0.005);
    let rows = ok(
        d.path(),
        &["bleu", "--hyp", "h.txt", "--ref", "r.txt", "--sentence-level"],
    );
    let cols: Vec<&str> = rows.trim_end().split('\t').collect();
    assert_eq!(cols.len(), 7);
    assert_eq!(cols[0], "0");
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    write(d.path(), "h.txt", "a b\n");
    assert_eq!(run(d.path(), &["no-such-command"]).code, 1);
    let typo = run(d.path(), &["bleu", "--hyp", "h.txt", "--reff", "h.txt"]);
    assert_eq!(typo.code, 1);
    assert!(typo.stderr.contains("--ref"), "{}", typo.stderr);
    assert_eq!(
        run(d.path(), &["bleu", "--hyp", "missing.txt", "--ref", "h.txt"]).code,
        2
    );
    assert_eq!(
        run(d.path(), &["noise-corpus", "--input", "h.txt", "--mask-rate", "1.5"]).code,
        1
    );
    assert_eq!(run(d.path(), &["--help"]).code, 0);
    assert_eq!(run(d.path(), &["--version"]).code, 0);
    assert_eq!(
        run(d.path(), &["noise-corpus", "--input", "h.txt", "--threads", "0"]).code,
        1
    );
}

#[test]
fn mismatched_line_counts_are_data_errors() {
    let d = TempDir::new().unwrap();
    write(d.path(), "h.txt", "a b\nc d\n");
    write(d.path(), "r.txt", "a b\n");
    let r = run(d.path(), &["bleu", "--hyp", "h.txt", "--ref", "r.txt"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("2") && r.stderr.contains("1"), "{}", r.stderr);
}

/// Runs `args` in two fresh directories holding the same inputs and returns
/// every file each run produced.
fn twice(inputs: &[(&str, &str)], args: &[&str]) -> [Vec<(String, Vec<u8>)>; 2] {
    let once = || {
        let d = TempDir::new().unwrap();
        for (name, text) in inputs {
            write(d.path(), name, text);
        }
        ok(d.path(), args);
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(d.path())
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        files
    };
    [once(), once()]
}

/// Input files and arguments of one run.
type Case<'a> = (Vec<(&'a str, &'a str)>, Vec<&'a str>);

#[test]
fn randomized_subcommands_are_reproducible() {
    let docs = document_text(20, 4, 12, 60, 1);
    let src = corpus_text(300, 2);
    let tgt = corpus_text(300, 3);
    let cases: Vec<Case> = vec![
        (
            vec![("in.txt", &docs)],
            vec![
                "noise-corpus",
                "--input",
                "in.txt",
                "--out",
                "o.txt",
                "--target-out",
                "t.txt",
                "--seed",
                "5",
            ],
        ),
        (
            vec![("s.txt", &src), ("t.txt", &tgt)],
            vec![
                "adapt-input",
                "--src",
                "s.txt",
                "--tgt",
                "t.txt",
                "--out",
                "o.txt",
                "--tgt-out",
                "ot.txt",
                "--labels-out",
                "l.txt",
                "--seed",
                "5",
            ],
        ),
        (
            vec![("s.txt", &src)],
            vec![
                "perturb", "--input", "s.txt", "--kind", "rsm", "--out", "o.txt", "--seed", "5",
            ],
        ),
        (
            vec![("s.txt", &src), ("t.txt", &tgt)],
            vec![
                "distractors",
                "--refs",
                "s.txt",
                "--pool",
                "t.txt",
                "--out",
                "o.txt",
                "--seed",
                "5",
            ],
        ),
        (
            vec![("s.txt", &src), ("t.txt", &tgt)],
            vec![
                "bleu",
                "--hyp",
                "s.txt",
                "--ref",
                "t.txt",
                "--baseline",
                "t.txt",
                "--resamples",
                "200",
                "--out",
                "o.txt",
                "--seed",
                "5",
            ],
        ),
    ];
    for (inputs, args) in cases {
        let [a, b] = twice(&inputs, &args);
        assert!(a.len() > inputs.len(), "{args:?} wrote nothing");
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn seed_and_threads() {
    let d = TempDir::new().unwrap();
    write(d.path(), "in.txt", &document_text(50, 5, 10, 80, 4));
    ok(
        d.path(),
        &[
            "noise-corpus",
            "--input",
            "in.txt",
            "--out",
            "a.txt",
            "--seed",
            "1",
            "--threads",
            "1",
            "--batch-docs",
            "3",
        ],
    );
    ok(
        d.path(),
        &["noise-corpus", "--input", "in.txt", "--out", "b.txt", "--seed", "1", "--threads", "4"],
    );
    ok(
        d.path(),
        &["noise-corpus", "--input", "in.txt", "--out", "c.txt", "--seed", "2"],
    );
    assert_eq!(read(d.path(), "a.txt"), read(d.path(), "b.txt"));
    assert_ne!(read(d.path(), "a.txt"), read(d.path(), "c.txt"));
}

#[test]
fn sidecar_records_parameters() {
    let d = TempDir::new().unwrap();
    write(d.path(), "in.txt", &document_text(3, 2, 6, 20, 5));
    ok(
        d.path(),
        &[
            "noise-corpus",
            "--input",
            "in.txt",
            "--out",
            "o.txt",
            "--seed",
            "11",
            "--mask-rate",
            "0.2",
        ],
    );
    let meta = sidecar(d.path(), "o.txt");
    assert_eq!(meta["command"], "noise-corpus");
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["params"]["command"]["noise-corpus"]["mask_rate"], 0.2);
    assert_eq!(meta["params"]["global"]["seed"], 11);
}

#[test]
fn config_env_and_flag_precedence() {
    let d = TempDir::new().unwrap();
    write(d.path(), "in.txt", &document_text(3, 2, 6, 20, 6));
    write(d.path(), "c.json", r#"{"seed": 9, "noise-corpus": {"mask_rate": 0.5}}"#);
    let rate = |args: &[&str], env: &[(&str, &str)]| {
        let mut all = vec!["noise-corpus", "--input", "in.txt", "--out", "o.txt"];
        all.extend_from_slice(args);
        let r = run_env(d.path(), &all, env);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let m = sidecar(d.path(), "o.txt");
        (
            m["params"]["command"]["noise-corpus"]["mask_rate"].as_f64().unwrap(),
            m["seed"].as_u64().unwrap(),
        )
    };
    assert_eq!(rate(&[], &[]), (0.35, 0));
    assert_eq!(rate(&["--config", "c.json"], &[]), (0.5, 9));
    assert_eq!(rate(&["--config", "c.json"], &[("NOISEMT_MASK_RATE", "0.2")]), (0.2, 9));
    assert_eq!(
        rate(
            &["--config", "c.json", "--mask-rate", "0.1"],
            &[("NOISEMT_MASK_RATE", "0.2")]
        ),
        (0.1, 9)
    );
    assert_eq!(
        rate(&[], &[("NOISEMT_CONFIG", "c.json"), ("NOISEMT_SEED", "4")]),
        (0.5, 4)
    );

    write(d.path(), "bad.json", r#"{"noise-corpus": {"mask_ratee": 0.5}}"#);
    assert_eq!(
        run(d.path(), &["noise-corpus", "--input", "in.txt", "--config", "bad.json"]).code,
        1
    );
}

#[test]
fn adapt_input_mixes_one_in_ten() {
    let d = TempDir::new().unwrap();
    write(d.path(), "s.txt", &corpus_text(1000, 7));
    write(d.path(), "t.txt", &corpus_text(1000, 8));
    ok(
        d.path(),
        &[
            "adapt-input",
            "--src",
            "s.txt",
            "--tgt",
            "t.txt",
            "--out",
            "o.txt",
            "--tgt-out",
            "ot.txt",
            "--labels-out",
            "l.txt",
        ],
    );
    let labels = read(d.path(), "l.txt");
    assert_eq!(labels.lines().count(), 1000);
    assert_eq!(labels.lines().filter(|l| l.ends_with("\t1")).count(), 100);
    assert_eq!(read(d.path(), "o.txt").lines().count(), 1000);
    // targets are never noised, only reordered
    let mut a: Vec<String> = read(d.path(), "ot.txt").lines().map(str::to_owned).collect();
    let mut b: Vec<String> = read(d.path(), "t.txt").lines().map(str::to_owned).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn perturb_fpi_prepends_token() {
    let d = TempDir::new().unwrap();
    write(d.path(), "s.txt", "a b c\n\nd\n");
    let out = ok(d.path(), &["perturb", "--input", "s.txt"]);
    assert_eq!(out, "<ins> a b c\n\n<ins> d\n");
    let out = ok(d.path(), &["perturb", "--input", "s.txt", "--fpi-token", "X"]);
    assert_eq!(out, "X a b c\n\nX d\n");
}

const REVERSE: &str = r#"awk '{ for (i = NF; i > 0; i--) printf "%s%s", $i, (i > 1 ? " " : ""); print "" }'"#;

#[test]
fn translate_through_a_subprocess() {
    let d = TempDir::new().unwrap();
    write(d.path(), "s.txt", "a b c\nd e\n");
    assert_eq!(
        ok(d.path(), &["translate", "--input", "s.txt", "--command", REVERSE]),
        "c b a\ne d\n"
    );

    let r = run(d.path(), &["translate", "--input", "s.txt", "--command", "head -n 1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("1 lines for 2 inputs"), "{}", r.stderr);

    let r = run(
        d.path(),
        &[
            "translate",
            "--input",
            "s.txt",
            "--command",
            "sleep 5",
            "--timeout",
            "0.2",
        ],
    );
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("timed out"), "{}", r.stderr);
}

#[test]
fn hup_eval_from_files_and_translator() {
    let d = TempDir::new().unwrap();
    let src = corpus_text(50, 9);
    write(d.path(), "s.txt", &src);
    // ten percent of perturbed outputs collapse
    let pert: String = src
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i % 10 == 0 {
                "zz qq yy xx ww\n".to_string()
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    write(d.path(), "p.txt", &pert);
    let json: Value = serde_json::from_str(&ok(
        d.path(),
        &[
            "hup-eval",
            "--source",
            "s.txt",
            "--reference",
            "s.txt",
            "--clean",
            "s.txt",
            "--perturbed",
            "p.txt",
            "--verdicts-out",
            "v.tsv",
        ],
    ))
    .unwrap();
    assert_eq!(json["hup_score"], 10.0);
    assert_eq!(json["n_hallucinated"], 5);
    assert_eq!(
        read(d.path(), "v.tsv")
            .lines()
            .filter(|l| l.split('\t').nth(2) == Some("1"))
            .count(),
        5
    );

    // identity translator: FPI only adds one token, nothing collapses
    let json: Value = serde_json::from_str(&ok(
        d.path(),
        &[
            "hup-eval",
            "--source",
            "s.txt",
            "--reference",
            "s.txt",
            "--translator",
            "cat",
        ],
    ))
    .unwrap();
    assert_eq!(json["hup_score"], 0.0);
    assert_eq!(json["perturbation"], "fpi");

    // a translator that breaks on any perturbed input
    let brittle = r#"awk '{ if ($1 == "<ins>") print "zz qq"; else print }'"#;
    let json: Value = serde_json::from_str(&ok(
        d.path(),
        &[
            "hup-eval",
            "--source",
            "s.txt",
            "--reference",
            "s.txt",
            "--translator",
            brittle,
        ],
    ))
    .unwrap();
    assert_eq!(json["hup_score"], 100.0);
}

#[test]
fn lm_scoring_and_selection() {
    let d = TempDir::new().unwrap();
    write(d.path(), "clean.txt", &corpus_text(400, 10));
    write(d.path(), "noisy.txt", &document_text(1, 400, 8, 200, 11));
    write(
        d.path(),
        "pool.txt",
        &(corpus_text(50, 12) + &document_text(1, 50, 8, 200, 13)),
    );
    ok(
        d.path(),
        &["lm-train", "--input", "clean.txt", "--out", "clean.lm", "--order", "2"],
    );
    ok(
        d.path(),
        &["lm-train", "--input", "noisy.txt", "--out", "noisy.lm", "--order", "2"],
    );
    assert_eq!(run(d.path(), &["lm-train", "--input", "clean.txt"]).code, 1);

    let same = ok(
        d.path(),
        &[
            "noise-score",
            "--input",
            "pool.txt",
            "--noisy-lm",
            "clean.lm",
            "--trusted-lm",
            "clean.lm",
        ],
    );
    assert_eq!(same.lines().count(), 100);
    assert!(same
        .lines()
        .all(|l| l.split('\t').nth(1).unwrap().parse::<f64>().unwrap() == 0.0));

    let picked = ok(
        d.path(),
        &[
            "select-data",
            "--input",
            "pool.txt",
            "--noisy-lm",
            "noisy.lm",
            "--trusted-lm",
            "clean.lm",
            "--k",
            "50",
            "--alpha",
            "1",
            "--indices-out",
            "idx.txt",
        ],
    );
    assert_eq!(picked.lines().count(), 50);
    let idx: Vec<usize> = read(d.path(), "idx.txt").lines().map(|l| l.parse().unwrap()).collect();
    // the in-domain half should dominate the selection
    assert!(idx.iter().filter(|&&i| i < 50).count() >= 45, "{idx:?}");
    assert_eq!(
        run(
            d.path(),
            &[
                "select-data",
                "--input",
                "pool.txt",
                "--noisy-lm",
                "noisy.lm",
                "--trusted-lm",
                "clean.lm",
                "--k",
                "101"
            ]
        )
        .code,
        1
    );
    write(d.path(), "junk.lm", "not a model");
    assert_eq!(
        run(
            d.path(),
            &[
                "noise-score",
                "--input",
                "pool.txt",
                "--noisy-lm",
                "junk.lm",
                "--trusted-lm",
                "clean.lm"
            ]
        )
        .code,
        2
    );
}

#[test]
fn domain_classifier_round_trip() {
    let d = TempDir::new().unwrap();
    write(d.path(), "in.txt", &document_text(1, 500, 10, 30, 14));
    let general: String = document_text(1, 500, 10, 30, 15)
        .lines()
        .map(|l| l.replace('w', "g") + "\n")
        .collect();
    write(d.path(), "gen.txt", &general);
    write(
        d.path(),
        "mix.txt",
        &(document_text(1, 40, 10, 30, 16) + &general.lines().take(40).map(|l| format!("{l}\n")).collect::<String>()),
    );
    ok(
        d.path(),
        &[
            "domain-train",
            "--in-domain",
            "in.txt",
            "--general",
            "gen.txt",
            "--orders",
            "2",
            "--out",
            "clf.json",
        ],
    );
    let manifest: Value = serde_json::from_str(&read(d.path(), "clf.json")).unwrap();
    assert_eq!(manifest["format"], "noisemt-domain-classifier");

    let labels = ok(
        d.path(),
        &["domain-classify", "--model", "clf.json", "--input", "mix.txt"],
    );
    let rows: Vec<&str> = labels.lines().collect();
    assert_eq!(rows.len(), 80);
    assert!(rows[..40].iter().all(|r| r.contains("\tin_domain\t")), "{labels}");
    let ratio: f64 = ok(d.path(), &["domain-ratio", "--model", "clf.json", "--input", "mix.txt"])
        .trim()
        .parse()
        .unwrap();
    assert_eq!(ratio, 50.0);
}

#[test]
fn diagnostics_commands() {
    let d = TempDir::new().unwrap();
    write(d.path(), "src.txt", "the cat sat\na a b\nhello , world\nx y\n1 2 3\n");
    write(d.path(), "out.txt", "the cat ran\na a a\nhello , 42\nz\n1 2 3\n");
    let all: f64 = ok(d.path(), &["copy-rate", "--source", "src.txt", "--output", "out.txt"])
        .trim()
        .parse()
        .unwrap();
    assert!((all - 900.0 / 13.0).abs() < 1e-9);
    let words: f64 = ok(
        d.path(),
        &[
            "copy-rate",
            "--source",
            "src.txt",
            "--output",
            "out.txt",
            "--exclude-punct-num",
        ],
    )
    .trim()
    .parse()
    .unwrap();
    assert!((words - 62.5).abs() < 1e-9);

    write(
        d.path(),
        "scored.jsonl",
        "{\"tokens\": [\"a\", \"b\"], \"probs\": [0.5, 0.25]}\n{\"tokens\": [\"c\"], \"probs\": [1.0]}\n",
    );
    let prof = ok(d.path(), &["uncertainty", "--input", "scored.jsonl"]);
    assert_eq!(prof, "position\tmean_prob\tcount\n0\t0.75\t2\n1\t0.25\t1\n");

    write(d.path(), "train.txt", "a a a a a b b b b c c c d d e\n");
    write(d.path(), "h.txt", "a b c\na a e\nd x\n");
    write(d.path(), "r.txt", "a b d\na e e\nc d\n");
    let f = ok(
        d.path(),
        &[
            "freq-fmeasure",
            "--hyp",
            "h.txt",
            "--ref",
            "r.txt",
            "--train",
            "train.txt",
            "--high-max-rank",
            "2",
            "--med-max-rank",
            "4",
        ],
    );
    assert!(
        f.lines().any(|l| l.starts_with("medium\t") && l.contains("\t40")),
        "{f}"
    );

    let lex = ok(d.path(), &["lexdist", "--input", "train.txt", "--max-rank", "2"]);
    assert!(lex.lines().nth(1).unwrap().starts_with("1\ta\t5"), "{lex}");

    write(
        d.path(),
        "bs.txt",
        "das haus ist sehr klein\nguten morgen meine liebe freunde\n",
    );
    write(
        d.path(),
        "br.txt",
        "the house is very small\ngood morning my dear friends\n",
    );
    write(
        d.path(),
        "b5.txt",
        "das haus ist sehr klein\ngood morning my dear friends\n",
    );
    let rep = ok(
        d.path(),
        &[
            "beam-report",
            "--source",
            "bs.txt",
            "--ref",
            "br.txt",
            "--beam",
            "1=br.txt",
            "--beam",
            "5=b5.txt",
        ],
    );
    let rows: Vec<Vec<&str>> = rep.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][..3], ["1", "100", "0"]);
    assert_eq!(rows[2][2], "50");
    assert!(rows[2][3].parse::<f64>().unwrap() < 0.0);
}
