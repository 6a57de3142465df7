//! Sentences, corpus entries and the on-disk corpus formats.

mod jsonl;
mod penman;
mod spans;
mod synth;

pub use jsonl::{
    entry_from_json_line, entry_to_json_line, read_jsonl, read_jsonl_str, read_sentences, sentence_from_json_line,
    write_jsonl,
};
pub use penman::{read_penman, write_penman};
pub use spans::char_spans_to_token_spans;
pub use synth::{generate_synthetic_corpus, SynthConfig};

use crate::graph::{Alignment, SemanticGraph};

/// A tokenized sentence with per-token tags and character offsets into the
/// raw string (end exclusive).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub pos_tags: Vec<String>,
    pub ne_tags: Vec<String>,
    pub char_offsets: Vec<(usize, usize)>,
}

impl Sentence {
    /// Builds a sentence from whitespace-joined tokens with fallback tags
    /// (`X` for POS, `O` for NE).
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Sentence {
        let tokens: Vec<String> = tokens.iter().map(|t| t.as_ref().to_string()).collect();
        let n = tokens.len();
        Sentence {
            char_offsets: offsets_for(&tokens),
            tokens,
            pos_tags: vec!["X".to_string(); n],
            ne_tags: vec!["O".to_string(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for (tok, (start, _)) in self.tokens.iter().zip(&self.char_offsets) {
            while out.chars().count() < *start {
                out.push(' ');
            }
            out.push_str(tok);
        }
        out
    }

    /// Character span covered by a token alignment.
    pub fn char_span(&self, a: Alignment) -> (usize, usize) {
        let last = self.len().saturating_sub(1);
        (self.char_offsets[a.start.min(last)].0, self.char_offsets[a.end.min(last)].1)
    }

    pub fn check(&self) -> Result<(), String> {
        let n = self.tokens.len();
        if n == 0 {
            return Err("sentence has no tokens".into());
        }
        if self.pos_tags.len() != n || self.ne_tags.len() != n || self.char_offsets.len() != n {
            return Err(format!(
                "list lengths differ: {} tokens, {} pos, {} ne, {} offsets",
                n,
                self.pos_tags.len(),
                self.ne_tags.len(),
                self.char_offsets.len()
            ));
        }
        for (i, &(s, e)) in self.char_offsets.iter().enumerate() {
            if s >= e {
                return Err(format!("token {i} has empty character span {s}..{e}"));
            }
            if i > 0 && self.char_offsets[i - 1].1 > s {
                return Err(format!("token {i} overlaps the previous token"));
            }
        }
        Ok(())
    }
}

/// Offsets of tokens joined by single spaces.
pub fn offsets_for(tokens: &[String]) -> Vec<(usize, usize)> {
    let mut pos = 0;
    tokens
        .iter()
        .map(|t| {
            let len = t.chars().count().max(1);
            let span = (pos, pos + len);
            pos += len + 1;
            span
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub sentence: Sentence,
    pub graph: SemanticGraph,
}

impl CorpusEntry {
    pub fn new(sentence: Sentence, graph: SemanticGraph) -> CorpusEntry {
        CorpusEntry { sentence, graph }
    }
}
