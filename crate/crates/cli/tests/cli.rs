use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use semgraph::corpus::{entry_to_json_line, read_jsonl};
use semgraph::fixtures::{example_entry, EXAMPLE_TOP_DOWN};
use semgraph::graph::graphs_equal;
use tempfile::TempDir;

const TINY: &[&str] = &[
    "--word-emb-dim",
    "6",
    "--pos-emb-dim",
    "3",
    "--ne-emb-dim",
    "2",
    "--hidden-dim",
    "8",
    "--decoder-emb-dim",
    "5",
    "--batch-size",
    "4",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semgraph")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let out = p(dir, name);
    let mut args = vec!["synth", "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn synth_writes_requested_size_deterministically() {
    let dir = TempDir::new().unwrap();
    let a = synth(&dir, "a.jsonl", &["--seed", "1", "--size", "100"]);
    let b = synth(&dir, "b.jsonl", &["--seed", "1", "--size", "100"]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 100);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let o = run(&["synth", "--size", "0", "--out", s(&p(&dir, "c.jsonl"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn resolved_config_is_logged_and_unknown_keys_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = p(&dir, "run.cfg");
    fs::write(&cfg, "size = 3\nmax_nodes = 4\n").unwrap();
    let out = p(&dir, "c.jsonl");
    let o = run(&["synth", "--config", s(&cfg), "--size", "5", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("# size = 5") && err.contains("# max_nodes = 4"), "{err}");
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 5);
    fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(code(&run(&["synth", "--config", s(&cfg), "--out", s(&out)])), 2);
    assert_eq!(code(&run(&["synth", "--bogus-flag", "1"])), 2);
}

#[test]
fn oracle_check_reports_and_flags_bad_lines() {
    let dir = TempDir::new().unwrap();
    let corpus = synth(&dir, "c.jsonl", &["--size", "30", "--seed", "2"]);
    let o = run(&["oracle-check", "--corpus", s(&corpus)]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("ordering in_order: round trip 30/30 (100.00%)"), "{text}");
    assert!(text.contains("ordering monotone: round trip 30/30 (100.00%)"), "{text}");

    let tree = synth(&dir, "t.jsonl", &["--size", "30", "--reentrancy-prob", "0", "--nonplanar-prob", "0"]);
    let o = run(&["oracle-check", "--corpus", s(&tree), "--ordering", "in_order"]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).contains("cross_arc"), "{}", stdout(&o));

    let mut lines = fs::read_to_string(&corpus).unwrap();
    lines.push_str("{\"tokens\": [\n");
    let broken = p(&dir, "broken.jsonl");
    fs::write(&broken, lines).unwrap();
    let o = run(&["oracle-check", "--corpus", s(&broken)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.jsonl:31:"));
}

#[test]
fn train_parse_evaluate_bench() {
    let dir = TempDir::new().unwrap();
    let corpus = synth(&dir, "c.jsonl", &["--size", "12", "--max-nodes", "5", "--seed", "4"]);
    let ckpt = p(&dir, "model.bin");
    let mut args =
        vec!["train", "--corpus", s(&corpus), "--checkpoint", s(&ckpt), "--epochs", "2", "--variant", "hard"];
    args.extend_from_slice(TINY);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let log = fs::read_to_string(format!("{}.log.csv", ckpt.display())).unwrap();
    assert!(log.starts_with("epoch,step,loss,grad_norm\n"));
    assert_eq!(log.lines().count(), 1 + 2 * 3);

    let (one, many) = (p(&dir, "one.jsonl"), p(&dir, "many.jsonl"));
    for (batch, out) in [("1", &one), ("128", &many)] {
        let o = run(&["parse", "--checkpoint", s(&ckpt), "--input", s(&corpus), "--out", s(out), "--batch", batch]);
        assert_eq!(code(&o), 0);
        let tps = stdout(&o);
        let value: f64 = tps.trim().strip_prefix("tokens_per_second=").unwrap().parse().unwrap();
        assert!(value > 0.0);
    }
    let (a, b) = (read_jsonl(&one).unwrap(), read_jsonl(&many).unwrap());
    assert_eq!(a.len(), 12);
    assert!(a.iter().zip(&b).all(|(x, y)| graphs_equal(&x.graph, &y.graph)));

    let o = run(&["evaluate", "--gold", s(&corpus), "--pred", s(&corpus)]);
    assert_eq!(code(&o), 0);
    let table = stdout(&o);
    for row in ["EDM ", "EDM_P", "EDM_A", "START", "SMATCH"] {
        let line = table.lines().find(|l| l.starts_with(row)).unwrap_or_else(|| panic!("{row} in {table}"));
        assert!(line.ends_with("1.0000"), "{line}");
    }
    let o = run(&["evaluate", "--gold", s(&corpus), "--pred", s(&one), "--metric", "smatch"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 2);

    let short = p(&dir, "short.jsonl");
    let first_line = fs::read_to_string(&corpus).unwrap().lines().next().unwrap().to_string();
    fs::write(&short, first_line + "\n").unwrap();
    assert_eq!(code(&run(&["evaluate", "--gold", s(&corpus), "--pred", s(&short)])), 2);

    let o = run(&["bench", "--checkpoint", s(&ckpt), "--corpus", s(&corpus), "--batch-sizes", "1,4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 3);
    let missing = p(&dir, "missing.bin");
    assert_eq!(code(&run(&["bench", "--checkpoint", s(&missing), "--corpus", s(&corpus)])), 2);
}

#[test]
fn parse_of_empty_input_is_empty() {
    let dir = TempDir::new().unwrap();
    let corpus = synth(&dir, "c.jsonl", &["--size", "4", "--max-nodes", "4"]);
    let ckpt = p(&dir, "m.bin");
    let mut args = vec!["train", "--corpus", s(&corpus), "--checkpoint", s(&ckpt), "--epochs", "1"];
    args.extend_from_slice(TINY);
    assert_eq!(code(&run(&args)), 0);
    let empty = p(&dir, "empty.jsonl");
    fs::write(&empty, "").unwrap();
    let out = p(&dir, "out.jsonl");
    let o = run(&["parse", "--checkpoint", s(&ckpt), "--input", s(&empty), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(&out).unwrap(), "");
}

#[test]
fn train_without_corpus_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let ckpt = p(&dir, "m.bin");
    assert_eq!(code(&run(&["train", "--checkpoint", s(&ckpt)])), 2);
    let missing = p(&dir, "nope.jsonl");
    assert_eq!(code(&run(&["train", "--corpus", s(&missing), "--checkpoint", s(&ckpt)])), 2);
    assert_eq!(code(&run(&["train", "--corpus", s(&missing), "--variant", "beam"])), 2);
}

#[test]
fn linearize_round_trips_and_repairs() {
    let dir = TempDir::new().unwrap();
    let fig = p(&dir, "fig.jsonl");
    fs::write(&fig, entry_to_json_line(&example_entry()) + "\n").unwrap();
    let o = run(&["linearize", "--corpus", s(&fig), "--delex", "true"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim_end(), EXAMPLE_TOP_DOWN);

    let corpus = synth(&dir, "c.jsonl", &["--size", "40", "--seed", "6"]);
    for mode in ["topdown", "actions"] {
        let lin = p(&dir, &format!("{mode}.txt"));
        let back = p(&dir, &format!("{mode}.jsonl"));
        assert_eq!(code(&run(&["linearize", "--corpus", s(&corpus), "--mode", mode, "--out", s(&lin)])), 0);
        let o = run(&["delinearize", "--input", s(&lin), "--sentences", s(&corpus), "--out", s(&back), "--mode", mode]);
        assert_eq!(code(&o), 0);
        let (gold, got) = (read_jsonl(&corpus).unwrap(), read_jsonl(&back).unwrap());
        for (g, b) in gold.iter().zip(&got) {
            let same = match mode {
                "actions" => graphs_equal(&g.graph, &b.graph),
                _ => graphs_equal(
                    &semgraph::linearize::start_aligned(&g.graph),
                    &semgraph::linearize::start_aligned(&b.graph),
                ),
            };
            assert!(same, "{mode}");
        }
    }

    let bad = p(&dir, "bad.txt");
    fs::write(&bad, ":root( <2> _v_1 :ARG1( <9> \n").unwrap();
    let out = p(&dir, "bad.jsonl");
    let o = run(&["delinearize", "--input", s(&bad), "--sentences", s(&fig), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(!o.stderr.is_empty());
    let g = &read_jsonl(&out).unwrap()[0].graph;
    assert!(g.validate(6).is_empty());
}
