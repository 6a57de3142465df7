//! Delexicalization: surface predicates lose their lemma and constants are
//! dropped; relexicalization restores both from the aligned tokens.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use crate::corpus::{CorpusEntry, Sentence};
use crate::error::{Error, Result};
use crate::graph::{Predicate, SemanticGraph, CARG_SUFFIX, UNKNOWN_SENSE};

/// Word-form to lemma lookup keyed by (form, POS tag), with a form-only
/// fallback. Entries whose POS is `*` only populate the fallback.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LemmaDictionary {
    by_pair: BTreeMap<(String, String), String>,
    wildcard: BTreeMap<String, String>,
    any_pos: BTreeMap<String, String>,
}

impl LemmaDictionary {
    pub fn new() -> LemmaDictionary {
        LemmaDictionary::default()
    }

    pub fn insert(&mut self, word: &str, pos: &str, lemma: &str) {
        if pos == "*" {
            self.wildcard.insert(word.to_string(), lemma.to_string());
        } else {
            self.by_pair.insert((word.to_string(), pos.to_string()), lemma.to_string());
            self.any_pos.entry(word.to_string()).or_insert_with(|| lemma.to_string());
        }
    }

    pub fn len(&self) -> usize {
        self.by_pair.len() + self.wildcard.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lookup(&self, word: &str, pos: &str) -> Option<&str> {
        let lower = word.to_lowercase();
        for w in [word, lower.as_str()] {
            if let Some(l) = self.by_pair.get(&(w.to_string(), pos.to_string())) {
                return Some(l);
            }
        }
        for w in [word, lower.as_str()] {
            if let Some(l) = self.wildcard.get(w).or_else(|| self.any_pos.get(w)) {
                return Some(l);
            }
        }
        None
    }

    /// Parses `word<TAB>pos<TAB>lemma` lines; blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse(text: &str) -> Result<LemmaDictionary> {
        let mut d = LemmaDictionary::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                [word, pos, lemma] if !word.is_empty() && !lemma.is_empty() => d.insert(word, pos, lemma),
                _ => return Err(Error::Parse { line: i + 1, message: "expected word<TAB>pos<TAB>lemma".into() }),
            }
        }
        Ok(d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LemmaDictionary> {
        LemmaDictionary::parse(&fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((w, p), l) in &self.by_pair {
            out.push_str(&format!("{w}\t{p}\t{l}\n"));
        }
        for (w, l) in &self.wildcard {
            out.push_str(&format!("{w}\t*\t{l}\n"));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Lexicon of (aligned start token, POS tag) → lemma pairs over the
    /// surface predicates of a corpus.
    pub fn from_corpus(entries: &[CorpusEntry]) -> LemmaDictionary {
        let mut d = LemmaDictionary::new();
        for e in entries {
            for n in &e.graph.nodes {
                if let (true, Some(lemma)) = (n.predicate.is_surface, &n.predicate.lemma) {
                    if n.predicate.sense.as_deref() == Some(UNKNOWN_SENSE) {
                        continue;
                    }
                    let i = n.alignment.start.min(e.sentence.len() - 1);
                    d.insert(&e.sentence.tokens[i], &e.sentence.pos_tags[i], lemma);
                }
            }
        }
        d
    }
}

/// A graph with lemmas and constants factored out, plus which nodes need
/// them back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelexGraph {
    pub graph: SemanticGraph,
    pub needs_lemma: Vec<bool>,
    pub needs_constant: Vec<bool>,
}

impl DelexGraph {
    /// Reads the flags off predicates: lemma-less surface predicates need a
    /// lemma, `_CARG` labels need a constant.
    pub fn from_graph(graph: SemanticGraph) -> DelexGraph {
        let needs_lemma = graph.nodes.iter().map(|n| n.predicate.is_surface && n.predicate.lemma.is_none()).collect();
        let needs_constant =
            graph.nodes.iter().map(|n| !n.predicate.is_surface && n.predicate.label.ends_with(CARG_SUFFIX)).collect();
        DelexGraph { graph, needs_lemma, needs_constant }
    }
}

pub fn delexicalize_predicate(p: &Predicate, has_constant: bool) -> Predicate {
    if p.is_surface {
        Predicate::delexicalized(p.pos.as_deref().unwrap_or("u"), p.sense.as_deref())
    } else if has_constant && p.is_constant_bearing() {
        Predicate::abstract_(&format!("{}{CARG_SUFFIX}", p.label))
    } else {
        p.clone()
    }
}

pub fn delexicalize(g: &SemanticGraph) -> DelexGraph {
    let mut graph = g.clone();
    for n in &mut graph.nodes {
        n.predicate = delexicalize_predicate(&n.predicate, n.constant.is_some());
        n.constant = None;
    }
    DelexGraph::from_graph(graph)
}

/// Dictionary lookup, then suffix rules.
pub fn predict_lemma(token: &str, pos: &str, dict: &LemmaDictionary) -> String {
    match dict.lookup(token, pos) {
        Some(l) => l.to_string(),
        None => rule_lemma(token),
    }
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Repairs a stem left by stripping `-ed`/`-ing`: undoubles a final double
/// consonant (`runn` → `run`) and restores a dropped `e` after short
/// consonant-vowel-consonant stems and stems ending in `v` (`mak` → `make`).
fn repair_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    let cvc = n == 3 && !is_vowel(b[0]) && is_vowel(b[1]) && !is_vowel(b[2]) && !matches!(b[2], b'w' | b'x' | b'y');
    if cvc || b[n - 1] == b'v' {
        return format!("{stem}e");
    }
    stem.to_string()
}

/// Lowercases and strips one inflectional suffix (`s`, `es`, `ed`, `ing`,
/// `ly`).
pub fn rule_lemma(token: &str) -> String {
    let w = token.to_lowercase();
    if w.len() <= 3 || !w.is_ascii() {
        return w;
    }
    if let Some(stem) = w.strip_suffix("ies") {
        return format!("{stem}y");
    }
    if let Some(stem) = w.strip_suffix("ied") {
        return format!("{stem}y");
    }
    if let Some(stem) = w.strip_suffix("ing") {
        if stem.len() >= 2 && stem.bytes().any(is_vowel) {
            return repair_stem(stem);
        }
    }
    if let Some(stem) = w.strip_suffix("ed") {
        if stem.len() >= 2 && stem.bytes().any(is_vowel) {
            return repair_stem(stem);
        }
    }
    if let Some(stem) = w.strip_suffix("ily") {
        return format!("{stem}y");
    }
    if let Some(stem) = w.strip_suffix("ly") {
        if stem.len() >= 3 {
            return stem.to_string();
        }
    }
    if let Some(stem) = w.strip_suffix("es") {
        if ["s", "x", "z", "ch", "sh"].iter().any(|s| stem.ends_with(s)) {
            return stem.to_string();
        }
    }
    if w.ends_with('s') && !["ss", "us", "is"].iter().any(|s| w.ends_with(s)) {
        return w[..w.len() - 1].to_string();
    }
    w
}

const NUMBER_VALUES: &[(&str, u64)] = &[
    ("zero", 0),
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
    ("eleven", 11),
    ("twelve", 12),
    ("thirteen", 13),
    ("fourteen", 14),
    ("fifteen", 15),
    ("sixteen", 16),
    ("seventeen", 17),
    ("eighteen", 18),
    ("nineteen", 19),
    ("twenty", 20),
    ("thirty", 30),
    ("forty", 40),
    ("fifty", 50),
    ("sixty", 60),
    ("seventy", 70),
    ("eighty", 80),
    ("ninety", 90),
];

/// Value of a spelled-out or digit number, if every token is part of one.
pub fn parse_number(tokens: &[&str]) -> Option<u64> {
    let words: Vec<String> = tokens
        .iter()
        .flat_map(|t| t.split('-'))
        .map(|w| w.trim().to_lowercase())
        .filter(|w| !w.is_empty() && w != "and")
        .collect();
    if words.is_empty() {
        return None;
    }
    if let [w] = words.as_slice() {
        let digits: String = w.chars().filter(|&c| c != ',').collect();
        if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
            return digits.parse().ok();
        }
    }
    let values: HashMap<&str, u64> = NUMBER_VALUES.iter().copied().collect();
    let (mut total, mut current) = (0u64, 0u64);
    let mut seen_any = false;
    for w in &words {
        match w.as_str() {
            "hundred" => current = current.max(1).checked_mul(100)?,
            "thousand" => {
                total = total.checked_add(current.max(1).checked_mul(1_000)?)?;
                current = 0;
            }
            "million" => {
                total = total.checked_add(current.max(1).checked_mul(1_000_000)?)?;
                current = 0;
            }
            other => current = current.checked_add(*values.get(other)?)?,
        }
        seen_any = true;
    }
    seen_any.then_some(total + current)
}

/// Constant for a named-entity or number span: number words become digits
/// unless the span is tagged as a name; otherwise tokens are joined with
/// `_` and quotes are stripped.
pub fn normalize_constant(tokens: &[&str], ne_tag: &str) -> String {
    let is_name = matches!(
        ne_tag.to_uppercase().as_str(),
        "PERSON" | "PER" | "ORGANIZATION" | "ORG" | "LOCATION" | "LOC" | "GPE" | "MISC"
    );
    if !is_name {
        if let Some(n) = parse_number(tokens) {
            return n.to_string();
        }
    }
    tokens
        .iter()
        .map(|t| t.trim_matches(|c| c == '"' || c == '\''))
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

/// Restores lemmas (from the token at each node's alignment start) and
/// constants (from each node's aligned span).
pub fn relexicalize(dg: &DelexGraph, sentence: &Sentence, dict: &LemmaDictionary) -> SemanticGraph {
    let mut g = dg.graph.clone();
    let last = sentence.len().saturating_sub(1);
    for (i, n) in g.nodes.iter_mut().enumerate() {
        let start = n.alignment.start.min(last);
        let end = n.alignment.end.clamp(start, last);
        if dg.needs_lemma[i] {
            let token = &sentence.tokens[start];
            let tag = &sentence.pos_tags[start];
            let lemma = if n.predicate.sense.as_deref() == Some(UNKNOWN_SENSE) {
                format!("{token}/{tag}")
            } else {
                predict_lemma(token, tag, dict)
            };
            let pos = n.predicate.pos.clone().unwrap_or_else(|| "u".into());
            n.predicate = Predicate::surface(&lemma, &pos, n.predicate.sense.as_deref());
        }
        if dg.needs_constant[i] {
            let label = n.predicate.label.trim_end_matches(CARG_SUFFIX).to_string();
            n.predicate = Predicate::abstract_(&label);
            let tokens: Vec<&str> = sentence.tokens[start..=end].iter().map(String::as_str).collect();
            n.constant = Some(normalize_constant(&tokens, &sentence.ne_tags[start]));
        }
    }
    g
}
