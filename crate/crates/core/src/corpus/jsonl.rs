use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusEntry, Sentence};
use crate::error::{Error, Result};
use crate::graph::{Alignment, Edge, Node, NodeId, Predicate, SemanticGraph};

#[derive(Serialize, Deserialize)]
struct JsonNode {
    id: usize,
    label: String,
    is_surface: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lemma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sense: Option<String>,
    start: usize,
    end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    head: usize,
    label: String,
    dep: usize,
    #[serde(default = "default_directed")]
    directed: bool,
}

fn default_directed() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonEntry {
    tokens: Vec<String>,
    pos: Vec<String>,
    ne: Vec<String>,
    offsets: Vec<(usize, usize)>,
    nodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
    root: usize,
}

pub fn entry_to_json_line(entry: &CorpusEntry) -> String {
    let s = &entry.sentence;
    let g = &entry.graph;
    let json = JsonEntry {
        tokens: s.tokens.clone(),
        pos: s.pos_tags.clone(),
        ne: s.ne_tags.clone(),
        offsets: s.char_offsets.clone(),
        nodes: g
            .nodes
            .iter()
            .map(|n| JsonNode {
                id: n.id.0,
                label: n.predicate.render(),
                is_surface: n.predicate.is_surface,
                lemma: n.predicate.lemma.clone(),
                pos: n.predicate.pos.clone(),
                sense: n.predicate.sense.clone(),
                start: n.alignment.start,
                end: n.alignment.end,
                constant: n.constant.clone(),
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| JsonEdge { head: e.head.0, label: e.label.clone(), dep: e.dependent.0, directed: e.directed })
            .collect(),
        root: g.root.0,
    };
    serde_json::to_string(&json).expect("corpus entries serialize")
}

/// Parses one JSONL line. `line` is 1-based and `index` 0-based, both only
/// used in error messages.
pub fn entry_from_json_line(text: &str, line: usize, index: usize) -> Result<CorpusEntry> {
    let json: JsonEntry = serde_json::from_str(text).map_err(|e| Error::Parse { line, message: e.to_string() })?;
    let sentence = Sentence { tokens: json.tokens, pos_tags: json.pos, ne_tags: json.ne, char_offsets: json.offsets };
    sentence.check().map_err(|message| Error::InvalidSentence { index, message })?;

    let mut nodes: Vec<Node> = json
        .nodes
        .into_iter()
        .map(|n| {
            let predicate = match (n.is_surface, n.pos.as_deref()) {
                (true, Some(pos)) => match n.lemma.as_deref() {
                    Some(lemma) => Predicate::surface(lemma, pos, n.sense.as_deref()),
                    None => Predicate::delexicalized(pos, n.sense.as_deref()),
                },
                (true, None) => Predicate::parse(&n.label),
                (false, _) => Predicate::abstract_(&n.label),
            };
            Node { id: NodeId(n.id), predicate, alignment: Alignment::new(n.start, n.end), constant: n.constant }
        })
        .collect();
    nodes.sort_by_key(|n| n.id);
    let graph = SemanticGraph {
        nodes,
        edges: json
            .edges
            .into_iter()
            .map(|e| Edge { head: NodeId(e.head), label: e.label, dependent: NodeId(e.dep), directed: e.directed })
            .collect(),
        root: NodeId(json.root),
    };
    let violations = graph.validate(sentence.len());
    if !violations.is_empty() {
        return Err(Error::InvalidGraph { index, violations });
    }
    Ok(CorpusEntry { sentence, graph })
}

#[derive(Deserialize)]
struct JsonSentence {
    tokens: Vec<String>,
    #[serde(default)]
    pos: Option<Vec<String>>,
    #[serde(default)]
    ne: Option<Vec<String>>,
    #[serde(default)]
    offsets: Option<Vec<(usize, usize)>>,
}

/// Reads the sentence of a JSONL line. Graph fields are ignored, and
/// missing tags or offsets fall back to those of [`Sentence::from_tokens`].
pub fn sentence_from_json_line(text: &str, line: usize, index: usize) -> Result<Sentence> {
    let json: JsonSentence = serde_json::from_str(text).map_err(|e| Error::Parse { line, message: e.to_string() })?;
    let mut sentence = Sentence::from_tokens(&json.tokens);
    if let Some(pos) = json.pos {
        sentence.pos_tags = pos;
    }
    if let Some(ne) = json.ne {
        sentence.ne_tags = ne;
    }
    if let Some(offsets) = json.offsets {
        sentence.char_offsets = offsets;
    }
    sentence.check().map_err(|message| Error::InvalidSentence { index, message })?;
    Ok(sentence)
}

/// Reads the sentences of a JSONL file; blank lines are skipped.
pub fn read_sentences(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(sentence_from_json_line(&line, i + 1, out.len())?);
    }
    Ok(out)
}

/// Reads a corpus from JSONL text; blank lines are skipped.
pub fn read_jsonl_str(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(entry_from_json_line(line, i + 1, out.len())?);
    }
    Ok(out)
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(entry_from_json_line(&line, i + 1, out.len())?);
    }
    Ok(out)
}

pub fn write_jsonl(entries: &[CorpusEntry], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for e in entries {
        w.write_all(entry_to_json_line(e).as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
