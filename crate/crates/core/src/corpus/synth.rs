//! Synthetic sentence/graph pairs from a small semantic grammar.
//!
//! Clauses have a verb whose arguments are pronoun, bare, determined, named,
//! numbered or compound noun phrases. Control verbs ("wants to meet")
//! produce a reentrancy on the subject. An adverb followed by a post-nominal
//! adjective ("sees cats today hungry") produces crossing arcs in surface
//! order. Tokens are inflected forms of the predicate lemmas, so a
//! dictionary extracted from the corpus relexicalizes it exactly.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{offsets_for, CorpusEntry, Sentence};
use crate::graph::{spanning_tree, Alignment, ChildOrder, Edge, Node, NodeId, Predicate, SemanticGraph};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub size: usize,
    pub max_nodes: usize,
    /// Distinct open-class lemmas, split over nouns, verbs and adjectives.
    pub word_vocab: usize,
    /// Sense labels per open-class lemma (`_v_1`, `_v_2`, ...).
    pub predicate_senses: usize,
    /// Argument labels available to verbs (`ARG1`..`ARGn`, at most 3 used).
    /// Control reentrancies need at least 2.
    pub edge_labels: usize,
    pub reentrancy_prob: f64,
    pub nonplanar_prob: f64,
    /// Restrict reentrancies to subject control, whose target is the only
    /// node with its predicate at its alignment start. When false,
    /// reentrancies may join arbitrary node pairs.
    pub unique_reentrancy_targets: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            size: 100,
            max_nodes: 8,
            word_vocab: 60,
            predicate_senses: 2,
            edge_labels: 3,
            reentrancy_prob: 0.3,
            nonplanar_prob: 0.2,
            unique_reentrancy_targets: true,
        }
    }
}

impl SynthConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.size == 0 || self.max_nodes == 0 || self.word_vocab == 0 {
            return Err("size, max_nodes and word_vocab must be at least 1".into());
        }
        if self.predicate_senses == 0 || self.edge_labels == 0 {
            return Err("predicate_senses and edge_labels must be at least 1".into());
        }
        for (name, p) in [("reentrancy_prob", self.reentrancy_prob), ("nonplanar_prob", self.nonplanar_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }
}

const CONSONANTS: &[u8] = b"bdfgklmnprtvz";
const VOWELS: &[u8] = b"aeiou";
const PRONOUNS: &[&str] = &["he", "she", "it", "they", "we"];
const UNITS: &[&str] = &["", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"];
const TENS: &[&str] = &["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];
const TEENS: &[&str] =
    &["ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"];
const ATTEMPTS: usize = 400;

/// Pseudo-word `CVCVC`; never ends in `s`, `e` or `y`.
fn pseudo_word(i: usize) -> String {
    let mut i = i;
    let mut out = String::new();
    for k in 0..5 {
        let set = if k % 2 == 0 { CONSONANTS } else { VOWELS };
        out.push(set[i % set.len()] as char);
        i /= set.len();
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// English words for `1..=99`.
pub(crate) fn number_words(n: usize) -> Vec<&'static str> {
    match n {
        0..=9 => vec![UNITS[n]],
        10..=19 => vec![TEENS[n - 10]],
        _ if n.is_multiple_of(10) => vec![TENS[n / 10]],
        _ => vec![TENS[n / 10], UNITS[n % 10]],
    }
}

struct Lexicon {
    nouns: Vec<String>,
    verbs: Vec<String>,
    adjectives: Vec<String>,
    names: Vec<String>,
    senses: usize,
}

impl Lexicon {
    fn new(cfg: &SynthConfig) -> Lexicon {
        let per = (cfg.word_vocab / 3).max(1);
        let space = CONSONANTS.len().pow(3) * VOWELS.len().pow(2);
        // Stride through the word space so consecutive lemmas look unrelated.
        let word = |k: usize| pseudo_word(k * 7919 % space);
        Lexicon {
            nouns: (0..per).map(word).collect(),
            verbs: (per..2 * per).map(word).collect(),
            adjectives: (2 * per..cfg.word_vocab.max(3 * per)).map(word).collect(),
            names: (0..per.max(4)).map(|k| capitalize(&pseudo_word((k * 104_729 + 11) % space))).collect(),
            senses: cfg.predicate_senses,
        }
    }

    fn sense(&self, lemma: &str) -> String {
        let h = lemma.bytes().fold(0usize, |a, b| a.wrapping_mul(31).wrapping_add(b as usize));
        (h % self.senses + 1).to_string()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NpKind {
    Pronoun,
    Bare,
    Determined,
    Name,
    Number,
    Compound,
}

const NP_KINDS: &[NpKind] =
    &[NpKind::Pronoun, NpKind::Bare, NpKind::Determined, NpKind::Name, NpKind::Number, NpKind::Compound];

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    lex: &'a Lexicon,
    tokens: Vec<(String, &'static str, &'static str)>,
    nodes: Vec<(Predicate, Alignment, Option<String>)>,
    edges: Vec<Edge>,
}

impl Builder<'_> {
    fn tok(&mut self, form: impl Into<String>, pos: &'static str, ne: &'static str) -> usize {
        self.tokens.push((form.into(), pos, ne));
        self.tokens.len() - 1
    }

    fn node(&mut self, p: Predicate, start: usize, end: usize) -> usize {
        self.nodes.push((p, Alignment::new(start, end), None));
        self.nodes.len() - 1
    }

    fn edge(&mut self, head: usize, label: &str, dep: usize) {
        self.edges.push(Edge::new(NodeId(head), label, NodeId(dep)));
    }

    fn pick(&mut self, list: &[String]) -> String {
        list[self.rng.gen_range(0..list.len())].clone()
    }

    fn surface(&self, lemma: &str, pos: &str) -> Predicate {
        Predicate::surface(lemma, pos, Some(&self.lex.sense(lemma)))
    }

    fn adjective(&mut self) -> (usize, usize) {
        let lemma = self.pick(&self.lex.adjectives);
        let t = self.tok(lemma.clone(), "JJ", "O");
        let p = self.surface(&lemma, "a");
        (self.node(p, t, t), t)
    }

    fn noun(&mut self, plural: bool) -> (usize, usize) {
        let lemma = self.pick(&self.lex.nouns);
        let t = if plural { self.tok(format!("{lemma}s"), "NNS", "O") } else { self.tok(lemma.clone(), "NN", "O") };
        let p = self.surface(&lemma, "n");
        (self.node(p, t, t), t)
    }

    /// Builds a noun phrase and returns its head node.
    fn np(&mut self, kind: NpKind) -> usize {
        let with_adj = self.rng.gen_bool(0.3);
        match kind {
            NpKind::Pronoun => {
                let form = *PRONOUNS.choose(self.rng).unwrap();
                let t = self.tok(form, "PRP", "O");
                let head = self.node(Predicate::abstract_("pron"), t, t);
                let q = self.node(Predicate::abstract_("pronoun_q"), t, t);
                self.edge(q, "BV", head);
                head
            }
            NpKind::Bare => {
                let first = self.tokens.len();
                let adj = with_adj.then(|| self.adjective().0);
                let (head, t) = self.noun(true);
                if let Some(a) = adj {
                    self.edge(a, "ARG1", head);
                }
                let q = self.node(Predicate::abstract_("udef_q"), first, t);
                self.edge(q, "BV", head);
                head
            }
            NpKind::Determined => {
                let det = if self.rng.gen_bool(0.5) { "the" } else { "a" };
                let dt = self.tok(det, "DT", "O");
                let q = self.node(Predicate::surface(det, "q", None), dt, dt);
                let adj = with_adj.then(|| self.adjective().0);
                let (head, _) = self.noun(false);
                if let Some(a) = adj {
                    self.edge(a, "ARG1", head);
                }
                self.edge(q, "BV", head);
                head
            }
            NpKind::Name => {
                let parts = self.rng.gen_range(1..=2);
                let words: Vec<String> = (0..parts).map(|_| self.pick(&self.lex.names)).collect();
                let first = self.tokens.len();
                for w in &words {
                    self.tok(w.clone(), "NNP", "PERSON");
                }
                let last = self.tokens.len() - 1;
                let head = self.node(Predicate::abstract_("named"), first, last);
                self.nodes[head].2 = Some(words.join("_"));
                let q = self.node(Predicate::abstract_("proper_q"), first, last);
                self.edge(q, "BV", head);
                head
            }
            NpKind::Number => {
                let n = self.rng.gen_range(2..100);
                let first = self.tokens.len();
                for w in number_words(n) {
                    self.tok(w, "CD", "NUMBER");
                }
                let card = self.node(Predicate::abstract_("card"), first, self.tokens.len() - 1);
                self.nodes[card].2 = Some(n.to_string());
                let (head, t) = self.noun(true);
                self.edge(card, "ARG1", head);
                let q = self.node(Predicate::abstract_("udef_q"), first, t);
                self.edge(q, "BV", head);
                head
            }
            NpKind::Compound => {
                let (modifier, t1) = self.noun(false);
                let q1 = self.node(Predicate::abstract_("udef_q"), t1, t1);
                self.edge(q1, "BV", modifier);
                let (head, t2) = self.noun(true);
                let c = self.node(Predicate::abstract_("compound"), t1, t2);
                self.edge(c, "ARG1", head);
                self.edge(c, "ARG2", modifier);
                let q2 = self.node(Predicate::abstract_("udef_q"), t1, t2);
                self.edge(q2, "BV", head);
                head
            }
        }
    }

    fn random_np(&mut self, cheap: bool) -> usize {
        let kinds = if cheap { &NP_KINDS[..4] } else { NP_KINDS };
        let kind = *kinds.choose(self.rng).unwrap();
        self.np(kind)
    }

    fn verb(&mut self, form: &'static str) -> usize {
        let lemma = self.pick(&self.lex.verbs);
        let t = match form {
            "VBZ" => self.tok(format!("{lemma}s"), form, "O"),
            "VBD" => self.tok(format!("{lemma}ed"), form, "O"),
            _ => self.tok(lemma.clone(), form, "O"),
        };
        let p = self.surface(&lemma, "v");
        self.node(p, t, t)
    }

    /// Verb plus objects; with `nonplanar`, appends an adverb on the verb
    /// and then an adjective on the first object.
    fn predicate_phrase(&mut self, verb: usize, cfg: &SynthConfig, nonplanar: bool) {
        let max_args = cfg.edge_labels.min(3);
        let objects =
            if nonplanar { self.rng.gen_range(1..=max_args.max(2) - 1) } else { self.rng.gen_range(0..max_args) };
        let mut first_object = None;
        for k in 0..objects {
            let cheap = nonplanar || self.rng.gen_bool(0.5);
            let o = self.random_np(cheap);
            self.edge(verb, &format!("ARG{}", k + 2), o);
            first_object.get_or_insert(o);
        }
        let adverb = nonplanar || self.rng.gen_bool(0.15);
        if adverb {
            let lemma = self.pick(&self.lex.adjectives);
            let t = self.tok(format!("{lemma}ly"), "RB", "O");
            let p = self.surface(&lemma, "a");
            let a = self.node(p, t, t);
            self.edge(a, "ARG1", verb);
        }
        if let (true, Some(o)) = (nonplanar, first_object) {
            let (j, _) = self.adjective();
            self.edge(j, "ARG1", o);
        }
    }

    /// Builds one clause; returns its root.
    fn clause(&mut self, cfg: &SynthConfig, control: bool, nonplanar: bool) -> usize {
        if cfg.max_nodes < 3 {
            // "it rains [quickly]"
            self.tok("it", "PRP", "O");
            let v = self.verb("VBZ");
            if cfg.max_nodes == 2 && (nonplanar || self.rng.gen_bool(0.5)) {
                let lemma = self.pick(&self.lex.adjectives);
                let t = self.tok(format!("{lemma}ly"), "RB", "O");
                let p = self.surface(&lemma, "a");
                let a = self.node(p, t, t);
                self.edge(a, "ARG1", v);
            }
            return v;
        }
        let cheap = self.rng.gen_bool(0.6);
        let subject = self.random_np(cheap);
        if control {
            let v = self.verb("VBZ");
            self.edge(v, "ARG1", subject);
            self.tok("to", "TO", "O");
            let inner = self.verb("VB");
            self.edge(v, "ARG2", inner);
            self.edge(inner, "ARG1", subject);
            self.predicate_phrase(inner, cfg, nonplanar);
            v
        } else {
            let form = if self.rng.gen_bool(0.5) { "VBZ" } else { "VBD" };
            let v = self.verb(form);
            self.edge(v, "ARG1", subject);
            self.predicate_phrase(v, cfg, nonplanar);
            v
        }
    }

    fn finish(self, root: usize, max_nodes: usize) -> Option<CorpusEntry> {
        let mut tokens = self.tokens;
        if tokens.len() > 2 * max_nodes {
            return None;
        }
        if tokens.len() < 2 * max_nodes {
            tokens.push((".".into(), ".", "O"));
        }
        let fillers = ["indeed", "then", "again", "here", "now"];
        let mut k = 0;
        while tokens.len() < max_nodes {
            let last = tokens.len() - usize::from(tokens.last().is_some_and(|t| t.0 == "."));
            tokens.insert(last, (fillers[k % fillers.len()].into(), "RB", "O"));
            k += 1;
        }
        let forms: Vec<String> = tokens.iter().map(|t| t.0.clone()).collect();
        let sentence = Sentence {
            char_offsets: offsets_for(&forms),
            tokens: forms,
            pos_tags: tokens.iter().map(|t| t.1.to_string()).collect(),
            ne_tags: tokens.iter().map(|t| t.2.to_string()).collect(),
        };
        let graph = SemanticGraph {
            nodes: self
                .nodes
                .into_iter()
                .enumerate()
                .map(|(i, (predicate, alignment, constant))| Node { id: NodeId(i), predicate, alignment, constant })
                .collect(),
            edges: self.edges,
            root: NodeId(root),
        };
        Some(CorpusEntry { sentence, graph })
    }
}

/// True when some spanning-tree edge strictly encloses one endpoint of a
/// reentrancy edge (by in-order position) and ends before the other one.
/// Under in-order ordering such an edge can only be attached with a
/// cross-arc, because the enclosed endpoint stays on the stack waiting for
/// its reentrancy partner.
pub(crate) fn reentrancy_blocks_tree_edge(g: &SemanticGraph) -> bool {
    let st = spanning_tree(g, ChildOrder::Alignment);
    let order = st.in_order(g);
    let mut pos = vec![0; g.len()];
    for (i, n) in order.iter().enumerate() {
        pos[n.0] = i;
    }
    let span = |a: NodeId, b: NodeId| {
        let (x, y) = (pos[a.0], pos[b.0]);
        (x.min(y), x.max(y))
    };
    st.reentrancy_edges.iter().any(|r| {
        let (x, y) = span(r.owner, r.target);
        st.tree_edges.iter().any(|t| {
            let (d, b) = span(t.parent, t.child);
            d < x && x < b && b < y
        })
    })
}

/// Whether every reentrancy target is the only node with its predicate
/// (full and delexicalized rendering) at its alignment start.
pub(crate) fn reentrancy_targets_unique(g: &SemanticGraph) -> bool {
    let st = spanning_tree(g, ChildOrder::Alignment);
    st.reentrancy_edges.iter().all(|r| {
        let t = g.node(r.target);
        g.nodes.iter().filter(|n| n.alignment.start == t.alignment.start).all(|n| {
            n.id == t.id
                || (n.predicate.render() != t.predicate.render()
                    && n.predicate.render_delex() != t.predicate.render_delex())
        })
    })
}

fn has_crossing_arcs(g: &SemanticGraph) -> bool {
    let spans: Vec<(usize, usize)> = g
        .edges
        .iter()
        .map(|e| {
            let (a, b) = (g.node(e.head).alignment.start, g.node(e.dependent).alignment.start);
            (a.min(b), a.max(b))
        })
        .collect();
    spans.iter().any(|&(a, b)| spans.iter().any(|&(c, d)| a < c && c < b && b < d))
}

/// Adds one reentrancy between a random unconnected node pair.
fn add_free_reentrancy(rng: &mut ChaCha8Rng, g: &mut SemanticGraph, labels: usize) -> bool {
    let connected: HashSet<(usize, usize)> =
        g.edges.iter().flat_map(|e| [(e.head.0, e.dependent.0), (e.dependent.0, e.head.0)]).collect();
    let mut pairs: Vec<(usize, usize)> = (0..g.len())
        .flat_map(|a| (0..g.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && !connected.contains(&(a, b)))
        .collect();
    pairs.shuffle(rng);
    for (head, dep) in pairs {
        let label = format!("ARG{}", rng.gen_range(1..=labels.min(3)));
        g.edges.push(Edge::new(NodeId(head), &label, NodeId(dep)));
        if !spanning_tree(g, ChildOrder::Alignment).reentrancy_edges.is_empty() && !reentrancy_blocks_tree_edge(g) {
            return true;
        }
        g.edges.pop();
    }
    false
}

fn generate_one(
    rng: &mut ChaCha8Rng,
    lex: &Lexicon,
    cfg: &SynthConfig,
    reentrant: bool,
    nonplanar: bool,
) -> Option<CorpusEntry> {
    let control = reentrant && cfg.unique_reentrancy_targets && cfg.edge_labels >= 2 && cfg.max_nodes >= 4;
    let free = reentrant && !cfg.unique_reentrancy_targets;
    let mut b = Builder { rng: &mut *rng, lex, tokens: Vec::new(), nodes: Vec::new(), edges: Vec::new() };
    let root = b.clause(cfg, control, nonplanar);
    if b.nodes.len() + usize::from(free) > cfg.max_nodes {
        return None;
    }
    let mut entry = b.finish(root, cfg.max_nodes)?;
    let g = &mut entry.graph;
    if free && !add_free_reentrancy(rng, g, cfg.edge_labels) {
        return None;
    }
    if reentrancy_blocks_tree_edge(g) || !g.validate(entry.sentence.len()).is_empty() {
        return None;
    }
    let has_reentrancy = !spanning_tree(g, ChildOrder::Alignment).reentrancy_edges.is_empty();
    if has_reentrancy != (control || free) || (nonplanar && !has_crossing_arcs(g)) {
        return None;
    }
    if cfg.unique_reentrancy_targets && !reentrancy_targets_unique(g) {
        return None;
    }
    Some(entry)
}

/// Generates `cfg.size` entries deterministically from `cfg.seed`.
///
/// Each entry independently gets a reentrancy with probability
/// `reentrancy_prob` and a crossing-arc construction with probability
/// `nonplanar_prob`, when `max_nodes` leaves room for them. Reentrancies
/// never force a spanning-tree edge onto a cross-arc under in-order
/// ordering.
pub fn generate_synthetic_corpus(cfg: &SynthConfig) -> Vec<CorpusEntry> {
    let lex = Lexicon::new(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.size)
        .map(|_| {
            let reentrant = rng.gen_bool(cfg.reentrancy_prob);
            let nonplanar = rng.gen_bool(cfg.nonplanar_prob) && cfg.max_nodes >= 7;
            let wishes = [(reentrant, nonplanar), (reentrant, false), (false, false)];
            for (r, n) in wishes {
                for _ in 0..ATTEMPTS {
                    if let Some(e) = generate_one(&mut rng, &lex, cfg, r, n) {
                        return e;
                    }
                }
            }
            fallback(&lex, cfg)
        })
        .collect()
}

/// "it <verb>s ." padded to `max_nodes` tokens.
fn fallback(lex: &Lexicon, cfg: &SynthConfig) -> CorpusEntry {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = Builder { rng: &mut rng, lex, tokens: Vec::new(), nodes: Vec::new(), edges: Vec::new() };
    b.tok("it", "PRP", "O");
    let v = b.verb("VBZ");
    b.finish(v, cfg.max_nodes).expect("two tokens fit any budget")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::entry_to_json_line;

    fn corpus(size: usize, reentrancy: f64, nonplanar: f64) -> Vec<CorpusEntry> {
        generate_synthetic_corpus(&SynthConfig {
            size,
            reentrancy_prob: reentrancy,
            nonplanar_prob: nonplanar,
            ..SynthConfig::default()
        })
    }

    #[test]
    fn deterministic() {
        let a: Vec<String> = corpus(10, 0.3, 0.2).iter().map(entry_to_json_line).collect();
        let b: Vec<String> = corpus(10, 0.3, 0.2).iter().map(entry_to_json_line).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn all_valid_with_token_counts_in_range() {
        for max_nodes in [1, 2, 3, 5, 8, 12] {
            let cfg = SynthConfig { size: 200, max_nodes, ..SynthConfig::default() };
            for e in generate_synthetic_corpus(&cfg) {
                assert!(e.graph.validate(e.sentence.len()).is_empty(), "{}", entry_to_json_line(&e));
                assert!(e.graph.len() <= max_nodes);
                assert!((max_nodes..=2 * max_nodes).contains(&e.sentence.len()), "{}", e.sentence.text());
                e.sentence.check().unwrap();
            }
        }
    }

    #[test]
    fn no_reentrancy_without_probability() {
        for e in corpus(300, 0.0, 0.0) {
            assert!(spanning_tree(&e.graph, ChildOrder::Alignment).reentrancy_edges.is_empty());
            assert!(!has_crossing_arcs(&e.graph));
        }
    }

    #[test]
    fn rates_track_configuration() {
        let c = corpus(1000, 0.3, 0.2);
        let re =
            c.iter().filter(|e| !spanning_tree(&e.graph, ChildOrder::Alignment).reentrancy_edges.is_empty()).count()
                as f64
                / 1000.0;
        let np = c.iter().filter(|e| has_crossing_arcs(&e.graph)).count() as f64 / 1000.0;
        assert!((re - 0.3).abs() <= 0.05, "reentrancy rate {re}");
        assert!(np >= 0.15, "nonplanar rate {np}");
    }

    #[test]
    fn emits_every_construction() {
        let c = corpus(300, 0.3, 0.2);
        let labels: HashSet<String> =
            c.iter().flat_map(|e| e.graph.nodes.iter().map(|n| n.predicate.render_delex())).collect();
        for l in ["named", "card", "compound", "pron", "udef_q", "proper_q", "_q", "_v_1", "_n_1", "_a_1"] {
            assert!(labels.contains(l), "missing {l}: {labels:?}");
        }
        assert!(c.iter().any(|e| e.graph.nodes.iter().any(|n| n.constant.is_some())));
    }

    #[test]
    fn surface_lemmas_agree_with_tokens() {
        for e in corpus(200, 0.3, 0.2) {
            for n in &e.graph.nodes {
                if let Some(lemma) = &n.predicate.lemma {
                    assert!(e.sentence.tokens[n.alignment.start].starts_with(lemma.as_str()));
                }
            }
        }
    }

    #[test]
    fn unconstrained_mode_yields_free_reentrancies() {
        let cfg = SynthConfig {
            size: 300,
            max_nodes: 12,
            reentrancy_prob: 0.5,
            unique_reentrancy_targets: false,
            ..SynthConfig::default()
        };
        let c = generate_synthetic_corpus(&cfg);
        assert!(c.iter().all(|e| e.graph.validate(e.sentence.len()).is_empty()));
        assert!(c.iter().any(|e| !reentrancy_targets_unique(&e.graph)));
    }

    #[test]
    fn number_words_spell_out() {
        assert_eq!(number_words(7), vec!["seven"]);
        assert_eq!(number_words(13), vec!["thirteen"]);
        assert_eq!(number_words(40), vec!["forty"]);
        assert_eq!(number_words(42), vec!["forty", "two"]);
    }
}
