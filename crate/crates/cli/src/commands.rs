use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use semgraph::corpus::{
    entry_from_json_line, generate_synthetic_corpus, read_jsonl, read_sentences, write_jsonl, CorpusEntry, Sentence,
};
use semgraph::eval::{edm_score, render_table, smatch_score, EdmMode, MetricReport, SmatchOptions};
use semgraph::graph::{graphs_equal, SemanticGraph};
use semgraph::linearize::{linearize_top_down, parse_top_down, render_tokens, start_aligned, tokenize_linear};
use semgraph::neural::Parser;
use semgraph::transition::{actions_to_graph, format_actions, oracle, parse_actions, Action, OracleConfig, Ordering};

use crate::config::{LinearMode, Metric, RunConfig};
use crate::CliError;

fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    path.as_deref().ok_or_else(|| CliError::Usage(format!("missing required setting '{key}'")))
}

fn with_path<T>(path: &Path, r: semgraph::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn read_corpus(path: &Path) -> Result<Vec<CorpusEntry>, CliError> {
    with_path(path, read_jsonl(path))
}

fn write_entries(path: &Path, entries: &[CorpusEntry]) -> Result<(), CliError> {
    with_path(path, write_jsonl(entries, path))
}

fn edm_f1(parser: &Parser, corpus: &[CorpusEntry], batch: usize) -> semgraph::Result<f64> {
    let sentences: Vec<Sentence> = corpus.iter().map(|e| e.sentence.clone()).collect();
    let graphs = parser.parse(&sentences, batch);
    Ok(edm_score(corpus, &graphs, EdmMode::Full, 0)?.all.f1())
}

/// Writes a synthetic corpus to `out`.
pub fn cmd_synth(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    cfg.synth.check().map_err(CliError::Usage)?;
    let path = required(&cfg.out, "out")?;
    let corpus = generate_synthetic_corpus(&cfg.synth);
    write_entries(path, &corpus)?;
    writeln!(out, "wrote {} entries to {}", corpus.len(), path.display())?;
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleReport {
    pub ordering: Option<Ordering>,
    pub graphs: usize,
    pub round_trips: usize,
    pub actions: BTreeMap<&'static str, usize>,
    /// Arcs built with cross-arc actions.
    pub nonplanar_arcs: usize,
    /// Graphs with at least one such arc.
    pub nonplanar_graphs: usize,
}

fn action_kind(a: &Action) -> &'static str {
    match a {
        Action::Shift { .. } => "shift",
        Action::Reduce { .. } => "reduce",
        Action::LeftArc(_) => "left_arc",
        Action::RightArc(_) => "right_arc",
        Action::UndirectedArc(_) => "undirected_arc",
        Action::CrossArc { .. } => "cross_arc",
        Action::Root => "root",
    }
}

/// Round-trips every corpus graph through the oracle and `actions_to_graph`
/// under each configured ordering. Unreadable lines are reported with their
/// line number and count as failures.
pub fn cmd_oracle_check(
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Vec<OracleReport>, CliError> {
    let path = required(&cfg.corpus, "corpus")?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut entries = Vec::new();
    let mut bad_lines = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match entry_from_json_line(line, i + 1, entries.len()) {
            Ok(e) => entries.push(e),
            Err(e) => {
                bad_lines += 1;
                writeln!(err, "{}:{}: {e}", path.display(), i + 1)?;
            }
        }
    }
    let mut reports = Vec::new();
    let mut failures = bad_lines;
    for ordering in cfg.oracle_orderings.orderings() {
        let oc =
            OracleConfig { ordering, emit_end_spans: cfg.model.emit_end_spans, allow_undirected: cfg.allow_undirected };
        let mut report = OracleReport { ordering: Some(ordering), graphs: entries.len(), ..OracleReport::default() };
        for (i, entry) in entries.iter().enumerate() {
            let actions = match oracle(entry, &oc) {
                Ok(a) => a,
                Err(e) => {
                    writeln!(err, "entry {i}: {e}")?;
                    continue;
                }
            };
            let (graph, _) = actions_to_graph(&actions, entry.sentence.len());
            let same = if oc.emit_end_spans {
                graphs_equal(&graph, &entry.graph)
            } else {
                graphs_equal(&start_aligned(&graph), &start_aligned(&entry.graph))
            };
            if same {
                report.round_trips += 1;
            } else {
                writeln!(err, "entry {i}: round trip differs under {ordering:?}")?;
            }
            let crosses = actions.iter().filter(|a| matches!(a, Action::CrossArc { .. })).count();
            report.nonplanar_arcs += crosses;
            report.nonplanar_graphs += usize::from(crosses > 0);
            for a in &actions {
                *report.actions.entry(action_kind(a)).or_default() += 1;
            }
        }
        failures += report.graphs - report.round_trips;
        let rate = if report.graphs == 0 { 1.0 } else { report.round_trips as f64 / report.graphs as f64 };
        let name = match ordering {
            Ordering::InOrder => "in_order",
            Ordering::Monotone => "monotone",
        };
        writeln!(out, "ordering {name}: round trip {}/{} ({:.2}%)", report.round_trips, report.graphs, 100.0 * rate)?;
        let hist: Vec<String> = report.actions.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "  actions: {}", hist.join(" "))?;
        writeln!(out, "  non-planar arcs: {} in {} graphs", report.nonplanar_arcs, report.nonplanar_graphs)?;
        reports.push(report);
    }
    if bad_lines > 0 {
        writeln!(out, "unreadable lines: {bad_lines}")?;
    }
    if failures > 0 {
        return Err(CliError::Failed(format!("{failures} round-trip failures")));
    }
    Ok(reports)
}

/// Trains a parser and writes the checkpoint and a CSV loss log (by
/// default next to the checkpoint, with `.log.csv` appended).
pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<Parser, CliError> {
    cfg.check()?;
    let corpus_path = required(&cfg.corpus, "corpus")?;
    let checkpoint = required(&cfg.checkpoint, "checkpoint")?;
    let corpus = read_corpus(corpus_path)?;
    let mut parser = Parser::new(cfg.model.clone(), &corpus)?;
    let start = Instant::now();
    let mut write_failed = None;
    let mut eval_failed = None;
    let mut last_edm = None;
    let log = parser.train(&corpus, cfg.epochs, |p, s| {
        let mut line = format!("epoch {} steps {} loss {:.6}", s.epoch, s.steps, s.mean_loss);
        let mut go_on = true;
        if cfg.eval_every > 0 && s.epoch % cfg.eval_every == 0 {
            match edm_f1(p, &corpus, cfg.batch) {
                Ok(f1) => {
                    line.push_str(&format!(" train_edm {f1:.4}"));
                    last_edm = Some(f1);
                    go_on = f1 < cfg.target_edm;
                }
                Err(e) => {
                    eval_failed = Some(e);
                    go_on = false;
                }
            }
        }
        line.push_str(&format!(" elapsed {:.1}s", start.elapsed().as_secs_f64()));
        if let Err(e) = writeln!(err, "{line}") {
            write_failed = Some(e);
        }
        go_on
    })?;
    if let Some(e) = eval_failed {
        return Err(e.into());
    }
    if let Some(e) = write_failed {
        return Err(e.into());
    }
    with_path(checkpoint, parser.save(checkpoint))?;
    let log_path = cfg.log.clone().unwrap_or_else(|| {
        let mut p = checkpoint.as_os_str().to_owned();
        p.push(".log.csv");
        PathBuf::from(p)
    });
    fs::write(&log_path, log.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", log_path.display())))?;
    let epochs = log.rows.last().map_or(0, |r| r.epoch);
    write!(out, "trained {epochs} epochs, {} steps", log.rows.len())?;
    if let Some(loss) = log.epoch_losses().last() {
        write!(out, ", final loss {loss:.6}")?;
    }
    if let Some(f1) = last_edm {
        write!(out, ", training EDM {f1:.4}")?;
    }
    writeln!(out, "\ncheckpoint {}\nlog {}", checkpoint.display(), log_path.display())?;
    Ok(parser)
}

fn load_parser(cfg: &RunConfig) -> Result<Parser, CliError> {
    let path = required(&cfg.checkpoint, "checkpoint")?;
    with_path(path, Parser::load(path))
}

fn read_input_sentences(path: &Path) -> Result<Vec<Sentence>, CliError> {
    with_path(path, read_sentences(path))
}

/// Parses the sentences of `input` and writes one corpus line per sentence
/// to `out`. Prints `tokens_per_second=<float>`.
pub fn cmd_parse(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<Vec<SemanticGraph>, CliError> {
    cfg.check()?;
    let parser = load_parser(cfg)?;
    let input = required(&cfg.input, "input")?;
    let dest = required(&cfg.out, "out")?;
    let sentences = read_input_sentences(input)?;
    let start = Instant::now();
    let outputs = parser.batch_greedy_decode(&sentences, cfg.batch);
    let seconds = start.elapsed().as_secs_f64();
    let tokens: usize = sentences.iter().map(Sentence::len).sum();
    let repaired = outputs.iter().filter(|o| !o.diagnostics.is_empty()).count();
    if repaired > 0 {
        writeln!(err, "{repaired} of {} decoded action sequences needed repair", outputs.len())?;
    }
    let entries: Vec<CorpusEntry> =
        sentences.into_iter().zip(&outputs).map(|(s, o)| CorpusEntry::new(s, o.graph.clone())).collect();
    write_entries(dest, &entries)?;
    let tps = if seconds > 0.0 { tokens as f64 / seconds } else { 0.0 };
    writeln!(out, "tokens_per_second={tps}")?;
    Ok(outputs.into_iter().map(|o| o.graph).collect())
}

/// Scores predicted graphs against gold; both files are corpora with one
/// entry per line, in the same order.
pub fn cmd_evaluate(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<(String, MetricReport)>, CliError> {
    let gold = read_corpus(required(&cfg.gold, "gold")?)?;
    let pred = read_corpus(required(&cfg.pred, "pred")?)?;
    if gold.len() != pred.len() {
        return Err(CliError::Usage(format!("{} gold entries but {} predicted", gold.len(), pred.len())));
    }
    let graphs: Vec<SemanticGraph> = pred.into_iter().map(|e| e.graph).collect();
    let mut rows: Vec<(String, MetricReport)> = Vec::new();
    let mut edm = |mode, prefix: &str| -> Result<(), CliError> {
        let r = edm_score(&gold, &graphs, mode, cfg.edm_tolerance)?;
        rows.push((prefix.to_string(), r.all));
        rows.push((format!("{prefix}_P"), r.predicates));
        rows.push((format!("{prefix}_A"), r.arguments));
        Ok(())
    };
    if matches!(cfg.metric, Metric::Edm | Metric::All) {
        edm(EdmMode::Full, "EDM")?;
    }
    if matches!(cfg.metric, Metric::StartEdm | Metric::All) {
        edm(EdmMode::StartOnly, "START")?;
    }
    if matches!(cfg.metric, Metric::Smatch | Metric::All) {
        let opts = SmatchOptions::default();
        let mut total = MetricReport::default();
        for (g, p) in gold.iter().zip(&graphs) {
            total.add(&smatch_score(&g.graph, p, &opts));
        }
        rows.push(("SMATCH".to_string(), total));
    }
    let table: Vec<(&str, MetricReport)> = rows.iter().map(|(n, r)| (n.as_str(), *r)).collect();
    write!(out, "{}", render_table(&table))?;
    Ok(rows)
}

fn emit_lines(cfg: &RunConfig, lines: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let mut text = lines.join("\n");
    if !lines.is_empty() {
        text.push('\n');
    }
    match &cfg.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Writes one linearization per corpus entry, to `out` when set and to
/// stdout otherwise.
pub fn cmd_linearize(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<String>, CliError> {
    let corpus = read_corpus(required(&cfg.corpus, "corpus")?)?;
    let oc = OracleConfig {
        ordering: cfg.model.ordering,
        emit_end_spans: cfg.model.emit_end_spans,
        allow_undirected: cfg.allow_undirected,
    };
    let lines = corpus
        .iter()
        .map(|e| match cfg.mode {
            LinearMode::TopDown => Ok(render_tokens(&linearize_top_down(&e.graph, cfg.delex))),
            LinearMode::Actions => Ok(format_actions(&oracle(e, &oc)?)),
        })
        .collect::<Result<Vec<String>, CliError>>()?;
    emit_lines(cfg, &lines, out)?;
    Ok(lines)
}

/// Like `parse_actions`, but drops unreadable pieces instead of failing.
fn parse_actions_lenient(line: &str, diags: &mut Vec<String>) -> Vec<Action> {
    match parse_actions(line) {
        Ok(a) => a,
        Err(e) => {
            diags.push(e.to_string());
            line.split_whitespace()
                .filter_map(|piece| match parse_actions(piece) {
                    Ok(a) => Some(a),
                    Err(_) => {
                        diags.push(format!("dropped '{piece}'"));
                        None
                    }
                })
                .flatten()
                .collect()
        }
    }
}

/// Reads linearizations from `input`, one per line, and rebuilds graphs
/// over the matching lines of `sentences`. Malformed lines are repaired
/// with a diagnostic on stderr.
pub fn cmd_delinearize(
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Vec<CorpusEntry>, CliError> {
    let input = required(&cfg.input, "input")?;
    let dest = required(&cfg.out, "out")?;
    let sentences = read_input_sentences(required(&cfg.sentences, "sentences")?)?;
    let text = fs::read_to_string(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != sentences.len() {
        return Err(CliError::Usage(format!("{} linearizations but {} sentences", lines.len(), sentences.len())));
    }
    let mut entries = Vec::with_capacity(lines.len());
    let mut repaired = 0;
    for (i, (line, sentence)) in lines.iter().zip(sentences).enumerate() {
        let (graph, diags) = match cfg.mode {
            LinearMode::TopDown => parse_top_down(&tokenize_linear(line), sentence.len()),
            LinearMode::Actions => {
                let mut diags = Vec::new();
                let actions = parse_actions_lenient(line, &mut diags);
                let (g, more) = actions_to_graph(&actions, sentence.len());
                diags.extend(more);
                (g, diags)
            }
        };
        for d in &diags {
            writeln!(err, "{}:{}: {d}", input.display(), i + 1)?;
        }
        repaired += usize::from(!diags.is_empty());
        entries.push(CorpusEntry::new(sentence, graph));
    }
    write_entries(dest, &entries)?;
    writeln!(out, "wrote {} graphs to {} ({repaired} repaired)", entries.len(), dest.display())?;
    Ok(entries)
}

/// Decodes the corpus sentences at every batch size and prints a
/// tokens-per-second table. Fails when outputs differ across batch sizes.
pub fn cmd_bench(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<(usize, f64)>, CliError> {
    cfg.check()?;
    let parser = load_parser(cfg)?;
    let sentences = read_input_sentences(required(&cfg.corpus, "corpus")?)?;
    let tokens: usize = sentences.iter().map(Sentence::len).sum();
    let mut reference: Option<Vec<SemanticGraph>> = None;
    let mut rows = Vec::new();
    writeln!(out, "batch\tseconds\ttokens_per_second\tspeedup")?;
    for &b in &cfg.batch_sizes {
        let start = Instant::now();
        let graphs = parser.parse(&sentences, b);
        let seconds = start.elapsed().as_secs_f64();
        let tps = if seconds > 0.0 { tokens as f64 / seconds } else { 0.0 };
        if let Some(r) = &reference {
            if r.len() != graphs.len() || r.iter().zip(&graphs).any(|(a, b)| !graphs_equal(a, b)) {
                return Err(CliError::Failed(format!("batch {b} output differs from batch {}", cfg.batch_sizes[0])));
            }
        } else {
            reference = Some(graphs);
        }
        let base = rows.first().map_or(tps, |&(_, t)| t);
        let speedup = if base > 0.0 { tps / base } else { 0.0 };
        writeln!(out, "{b}\t{seconds:.3}\t{tps:.2}\t{speedup:.2}")?;
        rows.push((b, tps));
    }
    Ok(rows)
}
