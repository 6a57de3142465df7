//! End-to-end acceptance run: one PASS/FAIL line per criterion on stderr.
//!
//! Run with `cargo test --release -p semgraph-cli --test acceptance`.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use semgraph::corpus::{generate_synthetic_corpus, CorpusEntry, Sentence, SynthConfig};
use semgraph::eval::{
    edm_score, edm_score_tuples, edm_tuples, smatch_exact, smatch_score, EdmMode, EdmTuple, SmatchOptions,
};
use semgraph::fixtures::example_entry;
use semgraph::fuzz::{random_actions, random_linear_tokens};
use semgraph::graph::{graphs_equal, spanning_tree, ChildOrder, NodeId, SemanticGraph};
use semgraph::linearize::{linearize_top_down, parse_top_down, render_tokens, start_aligned, tokenize_linear};
use semgraph::neural::{gradient_check, train, DecoderVariant, ModelConfig, Parser};
use semgraph::transition::{
    actions_to_graph, node_order, oracle, Action, ArcDirection, OracleConfig, Ordering, ParserState,
};
use semgraph_cli::{cmd_synth, cmd_train, RunConfig};

const ORACLE_CORPUS_SIZE: usize = 1000;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(30);
const GRADIENT_TOLERANCE: f64 = 1e-4;
const MUTATION_FLOOR: f64 = 1e-2;
const GRADIENT_SAMPLES_PER_TENSOR: usize = 40;
const OVERFIT_EDM: f64 = 0.99;
const OVERFIT_EPOCHS: usize = 200;
const OVERFIT_EVAL_EVERY: usize = 10;
const OVERFIT_TIME_LIMIT: Duration = Duration::from_secs(600);
const SMATCH_PAIRS: usize = 200;
const SMATCH_AGREEMENT: f64 = 0.95;
const SMATCH_TIME_LIMIT: Duration = Duration::from_secs(60);
const BATCH_SENTENCES: usize = 500;
const BATCH_SIZE: usize = 128;
const BATCH_SPEEDUP: f64 = 4.0;
const FUZZ_CASES: u64 = 10_000;

fn report(line: &str) {
    // Written straight to the stream so the lines show without --nocapture.
    let mut err = std::io::stderr();
    writeln!(err, "{line}").expect("stderr");
}

/// Runs one criterion; a panic counts as a failure with its message.
fn criterion(number: usize, name: &str, check: impl FnOnce() -> (bool, String)) -> bool {
    let start = Instant::now();
    let (pass, detail) = match catch_unwind(AssertUnwindSafe(check)) {
        Ok(r) => r,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    let verdict = if pass { "PASS" } else { "FAIL" };
    report(&format!("criterion {number:>2} {verdict} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64()));
    pass
}

fn synth(seed: u64, size: usize, max_nodes: usize, unique: bool) -> Vec<CorpusEntry> {
    generate_synthetic_corpus(&SynthConfig {
        seed,
        size,
        max_nodes,
        reentrancy_prob: 0.3,
        nonplanar_prob: 0.2,
        unique_reentrancy_targets: unique,
        ..SynthConfig::default()
    })
}

fn sentences(corpus: &[CorpusEntry]) -> Vec<Sentence> {
    corpus.iter().map(|e| e.sentence.clone()).collect()
}

fn oracle_round_trip() -> (bool, String) {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for unique in [true, false] {
        let corpus = synth(1, ORACLE_CORPUS_SIZE, 8, unique);
        for ordering in [Ordering::InOrder, Ordering::Monotone] {
            let config = OracleConfig { ordering, ..OracleConfig::default() };
            let ok = corpus
                .iter()
                .filter(|e| {
                    let actions = oracle(e, &config).expect("oracle");
                    graphs_equal(&actions_to_graph(&actions, e.sentence.len()).0, &e.graph)
                })
                .count();
            pass &= ok == corpus.len();
            let set = if unique { "constrained" } else { "unconstrained" };
            parts.push(format!("{set} {ordering:?} {ok}/{}", corpus.len()));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < ORACLE_TIME_LIMIT;
    (pass, format!("{} in {:.1}s (limit {}s)", parts.join(", "), elapsed.as_secs_f64(), ORACLE_TIME_LIMIT.as_secs()))
}

/// Gold edge built by a cross-arc between stack node `s` and buffer node
/// `b` (both gold ids).
fn gold_edge(g: &SemanticGraph, s: NodeId, b: NodeId, label: &str, dir: ArcDirection) -> Option<usize> {
    g.edges.iter().position(|e| {
        e.label == label
            && match dir {
                ArcDirection::ToStack => e.directed && e.head == b && e.dependent == s,
                ArcDirection::ToBuffer => e.directed && e.head == s && e.dependent == b,
                ArcDirection::Undirected => {
                    !e.directed && ((e.head, e.dependent) == (s, b) || (e.head, e.dependent) == (b, s))
                }
            }
    })
}

fn in_order_planarity() -> (bool, String) {
    let mut crosses = 0;
    let mut violations = 0;
    for unique in [true, false] {
        for e in synth(1, ORACLE_CORPUS_SIZE, 8, unique) {
            let g = &e.graph;
            let order = node_order(g, Ordering::InOrder);
            let tree = spanning_tree(g, ChildOrder::Alignment);
            let actions = oracle(&e, &OracleConfig::default()).expect("oracle");
            let Action::Shift { start, predicate, constant } = actions[0].clone() else { panic!("first action") };
            let mut state = ParserState::initial(start, predicate, constant);
            for a in &actions[1..] {
                if let Action::CrossArc { depth, label, direction } = a {
                    crosses += 1;
                    let s = state.at_depth(*depth).expect("stack depth");
                    let b = state.buffer.expect("buffer");
                    for (k, n) in [s, b].into_iter().map(|n| (n, order[n.0])) {
                        assert_eq!(state.nodes[k.0].predicate, g.node(n).predicate);
                    }
                    match gold_edge(g, order[s.0], order[b.0], label, *direction) {
                        Some(edge) if tree.is_reentrancy(edge) => {}
                        _ => violations += 1,
                    }
                }
                state.apply(a).expect("oracle actions are legal");
            }
        }
    }
    (violations == 0, format!("{crosses} in_order cross-arcs, {violations} not reentrancies"))
}

fn has_duplicate_reentrancy_target(g: &SemanticGraph) -> bool {
    let tree = spanning_tree(g, ChildOrder::Alignment);
    tree.reentrancy_edges.iter().any(|r| {
        let t = g.node(r.target);
        g.nodes.iter().any(|n| {
            n.id != t.id && n.alignment.start == t.alignment.start && n.predicate.render() == t.predicate.render()
        })
    })
}

fn top_down_failures(corpus: &[CorpusEntry]) -> Vec<&CorpusEntry> {
    corpus
        .iter()
        .filter(|e| {
            let text = render_tokens(&linearize_top_down(&e.graph, false));
            let (g, _) = parse_top_down(&tokenize_linear(&text), e.sentence.len());
            !graphs_equal(&g, &start_aligned(&e.graph))
        })
        .collect()
}

fn top_down_round_trip() -> (bool, String) {
    let constrained = synth(1, ORACLE_CORPUS_SIZE, 8, true);
    let c_fail = top_down_failures(&constrained).len();
    let free = synth(1, ORACLE_CORPUS_SIZE, 12, false);
    let failures = top_down_failures(&free);
    let explained = failures.iter().filter(|e| has_duplicate_reentrancy_target(&e.graph)).count();
    (
        c_fail == 0 && explained == failures.len(),
        format!(
            "constrained {}/{} exact; unconstrained (max_nodes 12) failure rate {:.2}% ({} of {}), {explained} with duplicate reentrancy targets",
            constrained.len() - c_fail,
            constrained.len(),
            100.0 * failures.len() as f64 / free.len() as f64,
            failures.len(),
            free.len()
        ),
    )
}

fn gradient_correctness() -> (bool, String) {
    let entries = synth(3, 5, 6, true);
    let mut worst: (f64, String) = (0.0, String::new());
    let mut mutation_caught = true;
    for variant in DecoderVariant::ALL {
        let config = ModelConfig { hidden_dim: 8, dropout_rate: 0.0, ..ModelConfig::tiny(variant) };
        let parser = Parser::new(config, &entries).expect("parser");
        for e in &entries {
            let r = gradient_check(&parser, e, GRADIENT_SAMPLES_PER_TENSOR, None).expect("check");
            if r.max_relative_error > worst.0 {
                worst = (r.max_relative_error, format!("{variant} {}{:?}", r.worst_tensor, r.worst_index));
            }
        }
        let bad = gradient_check(&parser, &entries[0], GRADIENT_SAMPLES_PER_TENSOR, Some("output.W4")).expect("check");
        mutation_caught &= bad.max_relative_error > MUTATION_FLOOR && bad.worst_tensor == "output.W4";
    }
    let pass = worst.0 < GRADIENT_TOLERANCE && mutation_caught;
    (
        pass,
        format!(
            "max relative error {:.2e} at {} (limit {GRADIENT_TOLERANCE:e}); mutation detected: {mutation_caught}",
            worst.0, worst.1
        ),
    )
}

fn training_edm(parser: &Parser, corpus: &[CorpusEntry]) -> f64 {
    let graphs = parser.parse(&sentences(corpus), 64);
    edm_score(corpus, &graphs, EdmMode::Full, 0).expect("edm").all.f1()
}

fn overfit_config(variant: DecoderVariant) -> ModelConfig {
    ModelConfig {
        word_emb_dim: 64,
        hidden_dim: 64,
        decoder_emb_dim: 64,
        dropout_rate: 0.0,
        learning_rate: 0.005,
        batch_size: 10,
        decoder_variant: variant,
        ..ModelConfig::default()
    }
}

fn overfit() -> (bool, String) {
    let corpus = synth(1, 50, 8, true);
    let start = Instant::now();
    let mut stack_edm = 0.0;
    let mut epochs = 0;
    train(&corpus, overfit_config(DecoderVariant::Stack), OVERFIT_EPOCHS, |p, s| {
        epochs = s.epoch;
        if s.epoch % OVERFIT_EVAL_EVERY == 0 || s.epoch == OVERFIT_EPOCHS {
            stack_edm = training_edm(p, &corpus);
            return stack_edm < OVERFIT_EDM;
        }
        true
    })
    .expect("stack training");
    let stack_time = start.elapsed();
    let (soft, _) = train(&corpus, overfit_config(DecoderVariant::Soft), epochs, |_, _| true).expect("soft training");
    let soft_edm = training_edm(&soft, &corpus);
    let pass = stack_edm >= OVERFIT_EDM && stack_time < OVERFIT_TIME_LIMIT && stack_edm >= soft_edm;
    (
        pass,
        format!(
            "stack training EDM {stack_edm:.4} after {epochs} epochs in {:.1}s; soft EDM {soft_edm:.4} after the same epochs",
            stack_time.as_secs_f64()
        ),
    )
}

/// A copy of `g` with one concept replaced and one edge dropped.
fn perturbed(g: &SemanticGraph, i: usize) -> SemanticGraph {
    let mut p = g.clone();
    let n = p.nodes.len();
    let donor = p.nodes[(i + 1) % n].predicate.clone();
    p.nodes[i % n].predicate = donor;
    if !p.edges.is_empty() {
        let k = i % p.edges.len();
        p.edges.remove(k);
    }
    let perm: Vec<usize> = (0..n).map(|k| (k + i) % n).collect();
    p.permuted(&perm)
}

fn smatch_equivalence() -> (bool, String) {
    let a = synth(7, SMATCH_PAIRS, 6, false);
    let b = synth(8, SMATCH_PAIRS, 6, false);
    let opts = SmatchOptions::default();
    let (mut equal, mut exceeded) = (0, 0);
    let mut exact_time = Duration::ZERO;
    for i in 0..SMATCH_PAIRS {
        let gold = &a[i].graph;
        let pred = if i % 2 == 0 { perturbed(gold, i) } else { b[i].graph.clone() };
        let t = Instant::now();
        let exact = smatch_exact(gold, &pred, 8, true).expect("exact");
        exact_time += t.elapsed();
        let climbed = smatch_score(gold, &pred, &opts);
        if climbed.matched > exact.matched + 1e-12 {
            exceeded += 1;
        } else if climbed.matched == exact.matched {
            equal += 1;
        }
    }
    let rate = equal as f64 / SMATCH_PAIRS as f64;
    let pass = rate >= SMATCH_AGREEMENT && exceeded == 0 && exact_time < SMATCH_TIME_LIMIT;
    (
        pass,
        format!(
            "hill-climber equals exact on {equal}/{SMATCH_PAIRS} ({:.1}%), exceeds it on {exceeded}; exact total {:.2}s",
            100.0 * rate,
            exact_time.as_secs_f64()
        ),
    )
}

fn shift_ends(tuples: &[EdmTuple], by: usize) -> Vec<EdmTuple> {
    tuples
        .iter()
        .map(|t| match t {
            EdmTuple::Predicate { label, span } => {
                EdmTuple::Predicate { label: label.clone(), span: (span.0, span.1 + by) }
            }
            EdmTuple::Argument { head, label, dependent } => EdmTuple::Argument {
                head: (head.0, head.1 + by),
                label: label.clone(),
                dependent: (dependent.0, dependent.1 + by),
            },
        })
        .collect()
}

fn edm_hand_check() -> (bool, String) {
    let e = example_entry();
    let gold = vec![edm_tuples(&e.graph, &e.sentence)];
    let id = edm_score_tuples(&gold, &gold, EdmMode::Full, 1).expect("edm");
    let identity =
        [id.all, id.predicates, id.arguments].iter().all(|m| (m.precision(), m.recall(), m.f1()) == (1.0, 1.0, 1.0));
    let by1 = edm_score_tuples(&gold, &[shift_ends(&gold[0], 1)], EdmMode::Full, 1).expect("edm");
    let by2 = edm_score_tuples(&gold, &[shift_ends(&gold[0], 2)], EdmMode::Full, 1).expect("edm");
    let tolerance = by1.all.f1() == 1.0 && by2.predicates.matched == 0.0;
    let two = vec![vec![
        EdmTuple::Predicate { label: "a".into(), span: (0, 3) },
        EdmTuple::Predicate { label: "b".into(), span: (4, 6) },
    ]];
    let one = vec![vec![EdmTuple::Predicate { label: "a".into(), span: (0, 3) }]];
    let half = edm_score_tuples(&two, &one, EdmMode::Full, 1).expect("edm").predicates;
    let arithmetic = half.precision() == 1.0 && half.recall() == 0.5 && (half.f1() - 2.0 / 3.0).abs() < 1e-12;
    let direct =
        edm_score(std::slice::from_ref(&e), std::slice::from_ref(&e.graph), EdmMode::Full, 1).expect("edm").all.f1()
            == 1.0;
    (
        identity && tolerance && arithmetic && direct,
        format!(
            "identity {identity}; +1 char F1 {:.4}, +2 char predicate matches {}; P/R/F1 {:.4}/{:.4}/{:.4}",
            by1.all.f1(),
            by2.predicates.matched,
            half.precision(),
            half.recall(),
            half.f1()
        ),
    )
}

fn batched_decoding() -> (bool, String) {
    let corpus = synth(1, BATCH_SENTENCES, 8, true);
    let parser = Parser::new(ModelConfig::default(), &corpus).expect("parser");
    let sents = sentences(&corpus);
    let tokens: usize = sents.iter().map(Sentence::len).sum();
    let t = Instant::now();
    let single = parser.parse(&sents, 1);
    let t1 = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let batched = parser.parse(&sents, BATCH_SIZE);
    let tb = t.elapsed().as_secs_f64();
    let identical = single.len() == batched.len() && single.iter().zip(&batched).all(|(a, b)| graphs_equal(a, b));
    let (r1, rb) = (tokens as f64 / t1, tokens as f64 / tb);
    let speedup = rb / r1;
    (
        identical && speedup >= BATCH_SPEEDUP,
        format!(
            "identical graphs: {identical}; {r1:.0} tokens/s at batch 1, {rb:.0} at batch {BATCH_SIZE}, speedup {speedup:.2}x (need {BATCH_SPEEDUP}x)"
        ),
    )
}

fn determinism() -> (bool, String) {
    let dir = tempfile::TempDir::new().expect("tempdir");
    let path = |n: &str| dir.path().join(n).display().to_string();
    let mut sink = Vec::new();
    let mut cfg = RunConfig::default();
    for (k, v) in [("size", "20"), ("max_nodes", "6"), ("seed", "5")] {
        cfg.set(k, v).expect("key");
    }
    let mut corpora = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        cfg.set("out", &path(name)).expect("key");
        cmd_synth(&cfg, &mut sink).expect("synth");
        corpora.push(std::fs::read(path(name)).expect("corpus"));
    }
    let synth_same = corpora[0] == corpora[1];
    for (k, v) in [
        ("corpus", path("a.jsonl").as_str()),
        ("epochs", "2"),
        ("word_emb_dim", "8"),
        ("hidden_dim", "8"),
        ("decoder_emb_dim", "6"),
        ("batch_size", "4"),
    ] {
        cfg.set(k, v).expect("key");
    }
    let mut checkpoints = Vec::new();
    for name in ["m1.bin", "m2.bin"] {
        cfg.set("checkpoint", &path(name)).expect("key");
        cmd_train(&cfg, &mut sink, &mut Vec::new()).expect("train");
        let mut bytes = std::fs::read(path(name)).expect("checkpoint");
        for sidecar in [".vocab", ".lemmas"] {
            bytes.extend(std::fs::read(path(&format!("{name}{sidecar}"))).expect("sidecar"));
        }
        checkpoints.push(bytes);
    }
    let train_same = checkpoints[0] == checkpoints[1];
    (
        synth_same && train_same,
        format!(
            "synth corpora identical: {synth_same} ({} bytes); checkpoint and sidecars identical: {train_same} ({} bytes)",
            corpora[0].len(),
            checkpoints[0].len()
        ),
    )
}

fn robustness() -> (bool, String) {
    let (mut bad_top_down, mut bad_actions) = (0, 0);
    for seed in 0..FUZZ_CASES {
        let n = 1 + (seed as usize % 12);
        let ok = catch_unwind(|| parse_top_down(&random_linear_tokens(seed, 60, n), n).0.validate(n).is_empty());
        bad_top_down += usize::from(!matches!(ok, Ok(true)));
        let ok = catch_unwind(|| actions_to_graph(&random_actions(seed, 60, n), n).0.validate(n).is_empty());
        bad_actions += usize::from(!matches!(ok, Ok(true)));
    }
    (
        bad_top_down == 0 && bad_actions == 0,
        format!("{FUZZ_CASES} token sequences: {bad_top_down} failures; {FUZZ_CASES} action sequences: {bad_actions} failures"),
    )
}

#[test]
fn acceptance() {
    let results = [
        criterion(1, "oracle round-trip", oracle_round_trip),
        criterion(2, "in-order cross-arcs are reentrancies", in_order_planarity),
        criterion(3, "top-down linearization round-trip", top_down_round_trip),
        criterion(4, "gradient correctness", gradient_correctness),
        criterion(5, "overfit", overfit),
        criterion(6, "smatch hill-climber vs exact", smatch_equivalence),
        criterion(7, "EDM hand-check", edm_hand_check),
        criterion(8, "batched decoding", batched_decoding),
        criterion(9, "determinism", determinism),
        criterion(10, "robustness fuzz", robustness),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, &p)| !p).map(|(i, _)| i + 1).collect();
    report(&format!("acceptance: {}/{} criteria pass", results.len() - failed.len(), results.len()));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
