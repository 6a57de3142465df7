//! Argument parsing. Every flag is a config key; flags given on the
//! command line override `--config` files and `--set` pairs.

use std::io::Write;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::commands::*;
use crate::{CliError, RunConfig};

const MODEL_KEYS: &[(&str, &str)] = &[
    ("variant", "Decoder variant: soft, hard or stack"),
    ("word_emb_dim", "Word embedding size"),
    ("pos_emb_dim", "POS tag embedding size"),
    ("ne_emb_dim", "Named-entity tag embedding size"),
    ("hidden_dim", "LSTM hidden size"),
    ("decoder_emb_dim", "Transition embedding size"),
    ("dropout_rate", "Dropout rate"),
    ("learning_rate", "Adam learning rate"),
    ("batch_size", "Training minibatch size"),
    ("grad_clip_norm", "Global gradient norm clip"),
    ("singleton_unk_prob", "Probability of replacing a singleton word by UNK"),
    ("seed", "Random seed"),
    ("emit_end_spans", "Predict end spans at reduce"),
    ("alignment_weight", "Weight of the alignment and end-span losses"),
    ("ordering", "Node ordering: in_order or monotone"),
    ("max_cross_depth", "Deepest cross-arc with its own output symbols"),
    ("init_scale", "Half-width of the uniform initialization"),
];

type Keys = Vec<(&'static str, &'static str)>;

fn commands() -> Vec<(&'static str, &'static str, Keys)> {
    let mut train = vec![
        ("corpus", "Training corpus (JSONL)"),
        ("checkpoint", "Checkpoint to write"),
        ("log", "CSV loss log [default: <checkpoint>.log.csv]"),
        ("epochs", "Maximum number of epochs"),
        ("eval_every", "Measure training-set EDM every N epochs (0: never)"),
        ("target_edm", "Stop once training-set EDM reaches this F1"),
        ("batch", "Decoding batch size for training-set EDM"),
    ];
    train.extend_from_slice(MODEL_KEYS);
    vec![
        (
            "synth",
            "Generate a synthetic corpus",
            vec![
                ("seed", "Random seed"),
                ("size", "Number of entries"),
                ("max_nodes", "Maximum nodes per graph"),
                ("word_vocab", "Distinct open-class lemmas"),
                ("predicate_senses", "Senses per lemma"),
                ("edge_labels", "Argument labels available to verbs"),
                ("reentrancy_prob", "Probability of adding a reentrancy"),
                ("nonplanar_prob", "Probability of adding a crossing edge"),
                ("unique_reentrancy_targets", "Restrict reentrancies to uniquely identifiable targets"),
                ("out", "Output corpus (JSONL)"),
            ],
        ),
        (
            "oracle-check",
            "Round-trip a corpus through the transition oracle",
            vec![
                ("corpus", "Corpus (JSONL)"),
                ("ordering", "Node ordering: in_order, monotone or both"),
                ("emit_end_spans", "Include end spans in reduce actions"),
                ("allow_undirected", "Build undirected edges with undirected arcs"),
            ],
        ),
        ("train", "Train a parser", train),
        (
            "parse",
            "Parse sentences with a trained parser",
            vec![
                ("checkpoint", "Checkpoint to load"),
                ("input", "Sentences (JSONL; graph fields are ignored)"),
                ("out", "Output corpus (JSONL)"),
                ("batch", "Decoding batch size"),
            ],
        ),
        (
            "evaluate",
            "Score predicted graphs against gold graphs",
            vec![
                ("gold", "Gold corpus (JSONL)"),
                ("pred", "Predicted corpus (JSONL)"),
                ("metric", "edm, start-edm, smatch or all"),
                ("edm_tolerance", "Character tolerance for EDM span matching"),
            ],
        ),
        (
            "linearize",
            "Write graphs as bracketed strings or action sequences",
            vec![
                ("corpus", "Corpus (JSONL)"),
                ("out", "Output text file [default: stdout]"),
                ("mode", "topdown or actions"),
                ("delex", "Delexicalize top-down strings"),
                ("ordering", "Node ordering for actions: in_order or monotone"),
            ],
        ),
        (
            "delinearize",
            "Rebuild graphs from linearizations",
            vec![
                ("input", "Linearizations, one per line"),
                ("sentences", "Matching sentences (JSONL)"),
                ("out", "Output corpus (JSONL)"),
                ("mode", "topdown or actions"),
            ],
        ),
        (
            "bench",
            "Measure decoding speed at several batch sizes",
            vec![
                ("checkpoint", "Checkpoint to load"),
                ("corpus", "Sentences (JSONL)"),
                ("batch_sizes", "Comma-separated batch sizes"),
            ],
        ),
    ]
}

fn default_text(command: &str, key: &str, defaults: &RunConfig) -> Option<String> {
    let lookup = match (command, key) {
        ("oracle-check", "ordering") => return Some("both".into()),
        (_, "variant") => "decoder_variant",
        _ => key,
    };
    defaults.to_pairs().into_iter().find(|(k, _)| k == lookup).map(|(_, v)| v).filter(|v| !v.is_empty())
}

/// The `semgraph` command line.
pub fn command() -> Command {
    let defaults = RunConfig::default();
    let mut app = Command::new("semgraph")
        .about("Transition-based parsing of sentences into aligned semantic graphs")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about, keys) in commands() {
        let mut sub = Command::new(name)
            .about(about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("Flat key = value config file"))
            .arg(
                Arg::new("set")
                    .long("set")
                    .value_name("KEY=VALUE")
                    .action(ArgAction::Append)
                    .help("Extra config setting; may be repeated"),
            );
        for (key, help) in keys {
            let help = match default_text(name, key, &defaults) {
                Some(d) if !help.contains("[default:") => format!("{help} [default: {d}]"),
                _ => help.to_string(),
            };
            sub = sub.arg(Arg::new(key).long(key.replace('_', "-")).value_name("VALUE").help(help));
        }
        app = app.subcommand(sub);
    }
    app
}

/// Resolves the configuration of a subcommand: defaults, then the
/// `--config` file, then `--set` pairs, then explicit flags.
pub fn config_from_matches(sub: &ArgMatches) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = sub.get_one::<String>("config") {
        cfg.apply_file(Path::new(path))?;
    }
    for pair in sub.get_many::<String>("set").into_iter().flatten() {
        let (k, v) =
            pair.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{pair}'")))?;
        cfg.set(k, v)?;
    }
    for id in sub.ids() {
        let id = id.as_str();
        if id == "config" || id == "set" || sub.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        if let Some(v) = sub.get_one::<String>(id) {
            cfg.set(id, v)?;
        }
    }
    Ok(cfg)
}

/// Runs the selected subcommand. The resolved config goes to `err` first.
pub fn run_matches(matches: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (name, sub) = matches.subcommand().ok_or_else(|| CliError::Usage("no command given".into()))?;
    let cfg = config_from_matches(sub)?;
    for line in cfg.to_text().lines() {
        writeln!(err, "# {line}")?;
    }
    match name {
        "synth" => cmd_synth(&cfg, out),
        "oracle-check" => cmd_oracle_check(&cfg, out, err).map(drop),
        "train" => cmd_train(&cfg, out, err).map(drop),
        "parse" => cmd_parse(&cfg, out, err).map(drop),
        "evaluate" => cmd_evaluate(&cfg, out).map(drop),
        "linearize" => cmd_linearize(&cfg, out).map(drop),
        "delinearize" => cmd_delinearize(&cfg, out, err).map(drop),
        "bench" => cmd_bench(&cfg, out).map(drop),
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}
