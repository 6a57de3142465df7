//! Flat `key = value` run configuration shared by every command.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use semgraph::corpus::SynthConfig;
use semgraph::neural::ModelConfig;
use semgraph::transition::Ordering;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LinearMode {
    #[default]
    TopDown,
    Actions,
}

impl LinearMode {
    pub fn name(self) -> &'static str {
        match self {
            LinearMode::TopDown => "topdown",
            LinearMode::Actions => "actions",
        }
    }
}

impl FromStr for LinearMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "topdown" | "top_down" => Ok(LinearMode::TopDown),
            "actions" => Ok(LinearMode::Actions),
            _ => Err(format!("unknown linearization mode '{s}' (expected topdown or actions)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Metric {
    #[default]
    All,
    Edm,
    StartEdm,
    Smatch,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::All => "all",
            Metric::Edm => "edm",
            Metric::StartEdm => "start-edm",
            Metric::Smatch => "smatch",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(Metric::All),
            "edm" => Ok(Metric::Edm),
            "start-edm" | "start_edm" => Ok(Metric::StartEdm),
            "smatch" => Ok(Metric::Smatch),
            _ => Err(format!("unknown metric '{s}' (expected edm, start-edm, smatch or all)")),
        }
    }
}

/// Orderings checked by `oracle-check`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OrderingChoice {
    #[default]
    Both,
    One(Ordering),
}

impl OrderingChoice {
    pub fn orderings(self) -> Vec<Ordering> {
        match self {
            OrderingChoice::Both => vec![Ordering::InOrder, Ordering::Monotone],
            OrderingChoice::One(o) => vec![o],
        }
    }
}

fn ordering_name(o: Ordering) -> &'static str {
    match o {
        Ordering::InOrder => "in_order",
        Ordering::Monotone => "monotone",
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub synth: SynthConfig,
    pub oracle_orderings: OrderingChoice,
    pub allow_undirected: bool,
    pub epochs: usize,
    /// Training-set EDM is measured every this many epochs; 0 disables it.
    pub eval_every: usize,
    /// Training stops once training-set EDM reaches this F1.
    pub target_edm: f64,
    /// Decoding batch size.
    pub batch: usize,
    pub batch_sizes: Vec<usize>,
    pub metric: Metric,
    pub edm_tolerance: usize,
    pub mode: LinearMode,
    pub delex: bool,
    pub corpus: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub sentences: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::default(),
            synth: SynthConfig::default(),
            oracle_orderings: OrderingChoice::Both,
            allow_undirected: true,
            epochs: 30,
            eval_every: 0,
            target_edm: 1.0,
            batch: 64,
            batch_sizes: vec![1, 128],
            metric: Metric::All,
            edm_tolerance: 0,
            mode: LinearMode::TopDown,
            delex: false,
            corpus: None,
            input: None,
            out: None,
            checkpoint: None,
            log: None,
            gold: None,
            pred: None,
            sentences: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Usage(format!("bad value '{value}' for {key}")))
}

fn parse_with<T>(value: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T, CliError> {
    f(value).map_err(CliError::Usage)
}

impl RunConfig {
    /// Sets one key. `seed` drives both corpus generation and training.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let path = || Some(PathBuf::from(value));
        match key.as_str() {
            "seed" => {
                self.synth.seed = parse(&key, value)?;
                self.model.seed = self.synth.seed;
            }
            "variant" => self.model.set("decoder_variant", value).map_err(|e| CliError::Usage(e.to_string()))?,
            "ordering" => match value {
                "both" => self.oracle_orderings = OrderingChoice::Both,
                _ => {
                    let o: Ordering = parse_with(value, str::parse)?;
                    self.oracle_orderings = OrderingChoice::One(o);
                    self.model.ordering = o;
                }
            },
            "size" => self.synth.size = parse(&key, value)?,
            "max_nodes" => self.synth.max_nodes = parse(&key, value)?,
            "word_vocab" => self.synth.word_vocab = parse(&key, value)?,
            "predicate_senses" => self.synth.predicate_senses = parse(&key, value)?,
            "edge_labels" => self.synth.edge_labels = parse(&key, value)?,
            "reentrancy_prob" => self.synth.reentrancy_prob = parse(&key, value)?,
            "nonplanar_prob" => self.synth.nonplanar_prob = parse(&key, value)?,
            "unique_reentrancy_targets" => self.synth.unique_reentrancy_targets = parse(&key, value)?,
            "allow_undirected" => self.allow_undirected = parse(&key, value)?,
            "epochs" => self.epochs = parse(&key, value)?,
            "eval_every" => self.eval_every = parse(&key, value)?,
            "target_edm" => self.target_edm = parse(&key, value)?,
            "batch" => self.batch = parse(&key, value)?,
            "batch_sizes" => {
                self.batch_sizes =
                    value.split(',').map(|v| parse(&key, v.trim())).collect::<Result<Vec<usize>, CliError>>()?
            }
            "metric" => self.metric = parse_with(value, str::parse)?,
            "edm_tolerance" => self.edm_tolerance = parse(&key, value)?,
            "mode" => self.mode = parse_with(value, str::parse)?,
            "delex" => self.delex = parse(&key, value)?,
            "corpus" => self.corpus = path(),
            "input" => self.input = path(),
            "out" => self.out = path(),
            "checkpoint" => self.checkpoint = path(),
            "log" => self.log = path(),
            "gold" => self.gold = path(),
            "pred" => self.pred = path(),
            "sentences" => self.sentences = path(),
            other => {
                if self.model.to_pairs().iter().any(|(k, _)| *k == other) {
                    self.model.set(other, value).map_err(|e| CliError::Usage(e.to_string()))?;
                } else {
                    return Err(CliError::Usage(format!("unknown config key '{other}'")));
                }
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are
    /// skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value, got '{line}'", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn check(&self) -> Result<(), CliError> {
        self.model.check().map_err(|e| CliError::Usage(e.to_string()))?;
        self.synth.check().map_err(CliError::Usage)?;
        if self.batch == 0 || self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            return Err(CliError::Usage("batch sizes must be at least 1".into()));
        }
        Ok(())
    }

    /// Every key with its resolved value, in a stable order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> =
            self.model.to_pairs().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let s = &self.synth;
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let more = [
            ("size", s.size.to_string()),
            ("max_nodes", s.max_nodes.to_string()),
            ("word_vocab", s.word_vocab.to_string()),
            ("predicate_senses", s.predicate_senses.to_string()),
            ("edge_labels", s.edge_labels.to_string()),
            ("reentrancy_prob", s.reentrancy_prob.to_string()),
            ("nonplanar_prob", s.nonplanar_prob.to_string()),
            ("unique_reentrancy_targets", s.unique_reentrancy_targets.to_string()),
            (
                "oracle_orderings",
                match self.oracle_orderings {
                    OrderingChoice::Both => "both".to_string(),
                    OrderingChoice::One(o) => ordering_name(o).to_string(),
                },
            ),
            ("allow_undirected", self.allow_undirected.to_string()),
            ("epochs", self.epochs.to_string()),
            ("eval_every", self.eval_every.to_string()),
            ("target_edm", self.target_edm.to_string()),
            ("batch", self.batch.to_string()),
            ("batch_sizes", self.batch_sizes.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",")),
            ("metric", self.metric.name().to_string()),
            ("edm_tolerance", self.edm_tolerance.to_string()),
            ("mode", self.mode.name().to_string()),
            ("delex", self.delex.to_string()),
            ("corpus", path(&self.corpus)),
            ("input", path(&self.input)),
            ("out", path(&self.out)),
            ("checkpoint", path(&self.checkpoint)),
            ("log", path(&self.log)),
            ("gold", path(&self.gold)),
            ("pred", path(&self.pred)),
            ("sentences", path(&self.sentences)),
        ];
        out.extend(more.into_iter().map(|(k, v)| (k.to_string(), v)));
        out
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
