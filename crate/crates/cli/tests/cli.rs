use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

/// A small but complete pipeline config, so every stage runs in well under
/// a second.
const SMALL: &str = "\
work_dir = w
bases = 10
total = 80
token_dim = 16
token_epochs = 1
walks_per_node = 2
hidden = 16,16
edge_dim = 4
epochs = 2
batch_size = 16
grid_batch_sizes = 8,16
grid_seeds = 2
grid_methods = VarSub,EdgeDrop,Baseline
";

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
        Workspace { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_fgcl"))
            .current_dir(self.dir.path())
            .arg("--config")
            .arg("run.cfg")
            .args(args)
            .output()
            .unwrap()
    }

    /// Runs and asserts success, returning stdout.
    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }

    fn read(&self, rel: &str) -> Vec<u8> {
        fs::read(self.path(rel)).unwrap()
    }

    /// synth → train-tokens → train-gcl → index
    fn pipeline(&self) {
        self.ok(&["synth"]);
        self.ok(&["train-tokens"]);
        self.ok(&["train-gcl"]);
        self.ok(&["index"]);
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn first_formula(path: &Path) -> (String, String) {
    let line = fs::read_to_string(path).unwrap().lines().next().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    (v["id"].as_str().unwrap().to_string(), v["latex"].as_str().unwrap().to_string())
}

#[test]
fn parse_prints_both_layouts() {
    let ws = Workspace::new();
    let opt = ws.ok(&["parse", "x+y", "--layout", "opt"]);
    assert!(opt.contains("nodes 3"), "{opt}");
    assert_eq!(opt.matches(" ARG").count(), 2);
    let slt = ws.ok(&["parse", "x+y", "--layout=slt"]);
    assert!(slt.contains("0 -> 1 NEXT") && slt.contains("1 -> 2 NEXT"), "{slt}");
    assert_eq!(ws.ok(&["parse", "x+y"]), slt);
}

#[test]
fn parse_syntax_error_reports_offset() {
    let out = Workspace::new().run(&["parse", "x+("]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 3"));
}

#[test]
fn bad_config_exits_2() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.run(&["synth", "--layout=mathml"])), 2);
    assert_eq!(code(&ws.run(&["synth", "--epochs=-1"])), 2);
    fs::write(ws.path("bad.cfg"), "colour = red\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fgcl"))
        .current_dir(ws.dir.path())
        .args(["--config", "bad.cfg", "synth"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let missing = Command::new(env!("CARGO_BIN_EXE_fgcl"))
        .current_dir(ws.dir.path())
        .args(["--config", "absent.cfg", "synth"])
        .output()
        .unwrap();
    assert_eq!(code(&missing), 1);
}

#[test]
fn synth_counts_scores_and_determinism() {
    let ws = Workspace::new();
    ws.ok(&["synth"]);
    let corpus = String::from_utf8(ws.read("w/corpus.jsonl")).unwrap();
    assert_eq!(corpus.lines().count(), 80);
    assert_eq!(String::from_utf8(ws.read("w/queries.jsonl")).unwrap().lines().count(), 10);
    let qrels = String::from_utf8(ws.read("w/qrels.txt")).unwrap();
    let scores: Vec<&str> = qrels.lines().map(|l| l.split_whitespace().nth(3).unwrap()).collect();
    assert!(scores.iter().all(|s| ["0", "1", "3"].contains(s)));
    assert!(scores.iter().filter(|s| **s == "3").count() >= 40);
    assert!(String::from_utf8(ws.read("w/qrels.txt.config")).unwrap().contains("seed = 0"));

    let files = ["w/corpus.jsonl", "w/queries.jsonl", "w/qrels.txt"].map(|f| ws.read(f));
    ws.ok(&["synth"]);
    assert_eq!(["w/corpus.jsonl", "w/queries.jsonl", "w/qrels.txt"].map(|f| ws.read(f)), files);
    ws.ok(&["synth", "--seed=1"]);
    assert_ne!(ws.read("w/corpus.jsonl"), files[0]);
}

#[test]
fn train_tokens_is_deterministic_and_handles_zero_epochs() {
    let ws = Workspace::new();
    ws.ok(&["synth"]);
    let out = ws.ok(&["train-tokens"]);
    assert!(out.contains("final loss"), "{out}");
    let first = ws.read("w/tokens-slt.bin");
    ws.ok(&["train-tokens"]);
    assert_eq!(ws.read("w/tokens-slt.bin"), first);

    ws.ok(&["train-tokens", "--token_epochs=0", "--table=zero.bin"]);
    assert!(!ws.read("zero.bin").is_empty());
    assert_ne!(ws.read("zero.bin"), first);
}

#[test]
fn missing_corpus_exits_1() {
    let ws = Workspace::new();
    let out = ws.run(&["train-tokens"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn train_gcl_writes_checkpoint_and_history() {
    let ws = Workspace::new();
    ws.ok(&["synth"]);
    ws.ok(&["train-tokens"]);
    ws.ok(&["train-gcl", "--epochs=3"]);
    let history = String::from_utf8(ws.read("w/gcl-slt.ckpt.loss.csv")).unwrap();
    assert_eq!(history.lines().next(), Some("epoch,loss"));
    assert_eq!(history.lines().count(), 1 + 3);
    let ckpt = ws.read("w/gcl-slt.ckpt");
    ws.ok(&["train-gcl", "--epochs=3"]);
    assert_eq!(ws.read("w/gcl-slt.ckpt"), ckpt);
    assert_eq!(ws.read("w/gcl-slt.ckpt.loss.csv"), history.as_bytes());

    let out = ws.run(&["train-gcl", "--batch_size=1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("batch size 1"));
}

#[test]
fn query_ranks_self_first_and_caps_k() {
    let ws = Workspace::new();
    ws.pipeline();
    let (id, latex) = first_formula(&ws.path("w/corpus.jsonl"));
    let out = ws.ok(&["query", &latex, "-k", "5"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    let top: Vec<&str> = lines[0].split(' ').collect();
    assert_eq!(top[0], "1");
    assert_eq!(top[1], id);
    assert!((top[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(ws.ok(&["query", &latex, "-k", "500"]).lines().count(), 80);
    assert_eq!(ws.ok(&["query", &latex, "-k", "5"]), out);
    assert_eq!(code(&ws.run(&["query", &latex, "-k", "0"])), 2);
}

#[test]
fn query_against_a_different_checkpoint_exits_3() {
    let ws = Workspace::new();
    ws.pipeline();
    ws.ok(&["train-gcl", "--seed=5"]);
    let out = ws.run(&["query", "x+y"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("provenance"));
    // the baseline index is independent of the checkpoint
    ws.ok(&["index", "--model=baseline"]);
    ws.ok(&["query", "x+y", "--model=baseline"]);
    assert_eq!(code(&ws.run(&["query", "x+y", "--model=baseline", "--layout=opt"])), 1);
}

#[test]
fn run_file_round_trip_through_eval() {
    let ws = Workspace::new();
    ws.pipeline();
    ws.ok(&["query", "--all", "-k", "1000", "--out", "run.txt"]);
    let run = fs::read_to_string(ws.path("run.txt")).unwrap();
    assert_eq!(run.lines().count(), 10 * 80);
    let full = ws.ok(&["eval", "run.txt"]);
    let partial = ws.ok(&["eval", "run.txt", "--setting", "partial"]);
    let mean = |s: &str| -> f64 { s.lines().last().unwrap().rsplit('\t').next().unwrap().parse().unwrap() };
    assert!((0.0..=1.0).contains(&mean(&full)) && (0.0..=1.0).contains(&mean(&partial)));
}

#[test]
fn eval_fixtures() {
    let ws = Workspace::new();
    fs::write(ws.path("qrels.txt"), "q1 0 r1 3\nq1 0 r2 4\nq1 0 n1 0\n").unwrap();
    fs::write(ws.path("graded.txt"), "q1 0 r1 3\nq1 0 r2 4\nq1 0 n1 0\nq1 0 p1 1\n").unwrap();
    let run_line = |docs: &[&str]| -> String {
        docs.iter().enumerate().map(|(i, d)| format!("q1 Q0 {d} {} {} t\n", i + 1, 1.0 - i as f64 / 10.0)).collect()
    };
    fs::write(ws.path("mixed.run"), run_line(&["r1", "n1", "r2", "u"])).unwrap();
    fs::write(ws.path("perfect.run"), run_line(&["r1", "r2", "n1"])).unwrap();
    let out = ws.ok(&["eval", "mixed.run", "--qrels", "qrels.txt"]);
    assert!(out.ends_with("bpref\tall\t0.5000\n"), "{out}");
    let out = ws.ok(&["eval", "perfect.run", "--qrels=qrels.txt"]);
    assert!(out.ends_with("bpref\tall\t1.0000\n"), "{out}");
    // score 1: non-relevant under full, (1 + (1 - 1/2)) / 2
    let out = ws.ok(&["eval", "mixed.run", "--qrels=graded.txt"]);
    assert!(out.ends_with("bpref\tall\t0.7500\n"), "{out}");
    // relevant but unretrieved under partial, (1 + 0 + 0) / 3
    let out = ws.ok(&["eval", "mixed.run", "--qrels=graded.txt", "--setting=partial"]);
    assert!(out.ends_with("bpref\tall\t0.3333\n"), "{out}");
    assert_eq!(code(&ws.run(&["eval", "perfect.run", "--qrels=qrels.txt", "--setting=strict"])), 2);
    assert_eq!(code(&ws.run(&["eval", "absent.run", "--qrels=qrels.txt"])), 1);
}

#[test]
fn bench_writes_rows_and_heatmaps_reproducibly() {
    let ws = Workspace::new();
    ws.ok(&["synth"]);
    let out = ws.ok(&["bench"]);
    assert!(out.contains("bpref (SLT, full)") && out.contains("bpref (OPT, partial)"));
    let results = ws.read("w/results.csv");
    // 2 layouts × 3 methods × 2 batch sizes × 2 seeds × 2 settings
    assert_eq!(String::from_utf8(results.clone()).unwrap().lines().count(), 1 + 48);
    for layout in ["slt", "opt"] {
        for setting in ["full", "partial"] {
            let csv = fs::read_to_string(ws.path(&format!("w/heatmap-{layout}-{setting}.csv"))).unwrap();
            assert_eq!(csv.lines().count(), 1 + 3 * 2);
            assert!(ws.path(&format!("w/heatmap-{layout}-{setting}.txt")).exists());
        }
    }
    ws.ok(&["bench"]);
    assert_eq!(ws.read("w/results.csv"), results);
}
