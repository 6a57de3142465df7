//! Encoder vocabularies and the decoder's joint transition/predicate symbol
//! set.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use crate::corpus::CorpusEntry;
use crate::delex::delexicalize;
use crate::error::{Error, Result};
use crate::graph::Predicate;
use crate::transition::{Action, ArcDirection};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
const RESERVED: [&str; 2] = ["<pad>", "<unk>"];

/// String ↔ index map with reserved padding and unknown entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Index {
    items: Vec<String>,
    counts: Vec<usize>,
    map: HashMap<String, usize>,
}

impl Index {
    pub fn from_counts(counts: &BTreeMap<String, usize>) -> Index {
        let mut sorted: Vec<(&String, &usize)> = counts.iter().collect();
        sorted.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        let mut index = Index::default();
        for r in RESERVED {
            index.push(r, 0);
        }
        for (item, &count) in sorted {
            index.push(item, count);
        }
        index
    }

    fn push(&mut self, item: &str, count: usize) {
        self.map.insert(item.to_string(), self.items.len());
        self.items.push(item.to_string());
        self.counts.push(count);
    }

    pub fn get(&self, item: &str) -> usize {
        self.map.get(item).copied().unwrap_or(UNK)
    }

    pub fn item(&self, i: usize) -> &str {
        &self.items[i]
    }

    pub fn count(&self, i: usize) -> usize {
        self.counts[i]
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.len() == RESERVED.len()
    }

    fn entries(&self) -> impl Iterator<Item = (&str, usize)> {
        self.items.iter().zip(&self.counts).skip(RESERVED.len()).map(|(s, &c)| (s.as_str(), c))
    }
}

/// One decoder output symbol: a transition, with shifts carrying their
/// delexicalized predicate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Reduce,
    LeftArc(String),
    RightArc(String),
    UndirectedArc(String),
    CrossArc { depth: usize, label: String, direction: ArcDirection },
    Root,
    Shift(String),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Reduce => f.write_str("re"),
            Symbol::LeftArc(l) => write!(f, "la({l})"),
            Symbol::RightArc(l) => write!(f, "ra({l})"),
            Symbol::UndirectedArc(l) => write!(f, "ua({l})"),
            Symbol::CrossArc { depth, label, direction } => {
                let dir = match direction {
                    ArcDirection::ToStack => "to_stack",
                    ArcDirection::ToBuffer => "to_buffer",
                    ArcDirection::Undirected => "undirected",
                };
                write!(f, "xa({depth},{label},{dir})")
            }
            Symbol::Root => f.write_str("root"),
            Symbol::Shift(p) => write!(f, "sh({p})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    pub words: Index,
    pub pos: Index,
    pub ne: Index,
    /// Edge labels with counts.
    pub labels: Vec<(String, usize)>,
    /// Delexicalized predicates with counts.
    pub predicates: Vec<(Predicate, usize)>,
    pub max_cross_depth: usize,
    /// Word indices seen once in training.
    pub singletons: HashSet<usize>,
    symbols: Vec<Symbol>,
    symbol_index: HashMap<Symbol, usize>,
}

fn count<'a>(items: impl Iterator<Item = &'a str>) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for s in items {
        *m.entry(s.to_string()).or_insert(0) += 1;
    }
    m
}

fn sorted_counts(m: BTreeMap<String, usize>) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = m.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

impl Vocab {
    /// Builds vocabularies from training entries (graphs are delexicalized
    /// here).
    pub fn build(entries: &[CorpusEntry], max_cross_depth: usize) -> Vocab {
        let sentences = entries.iter().map(|e| &e.sentence);
        let words = count(sentences.clone().flat_map(|s| s.tokens.iter().map(String::as_str)));
        let pos = count(sentences.clone().flat_map(|s| s.pos_tags.iter().map(String::as_str)));
        let ne = count(sentences.flat_map(|s| s.ne_tags.iter().map(String::as_str)));
        let labels = count(entries.iter().flat_map(|e| e.graph.edges.iter().map(|x| x.label.as_str())));
        let delex: Vec<String> = entries
            .iter()
            .flat_map(|e| delexicalize(&e.graph).graph.nodes.into_iter().map(|n| n.predicate.render()))
            .collect();
        let predicates = count(delex.iter().map(String::as_str));
        Vocab::from_parts(
            Index::from_counts(&words),
            Index::from_counts(&pos),
            Index::from_counts(&ne),
            sorted_counts(labels),
            sorted_counts(predicates).into_iter().map(|(p, c)| (Predicate::parse(&p), c)).collect(),
            max_cross_depth,
        )
    }

    fn from_parts(
        words: Index,
        pos: Index,
        ne: Index,
        labels: Vec<(String, usize)>,
        predicates: Vec<(Predicate, usize)>,
        max_cross_depth: usize,
    ) -> Vocab {
        let singletons = (RESERVED.len()..words.len()).filter(|&i| words.count(i) == 1).collect();
        let mut symbols = vec![Symbol::Reduce];
        let names: Vec<&String> = labels.iter().map(|(l, _)| l).collect();
        symbols.extend(names.iter().map(|l| Symbol::LeftArc((*l).clone())));
        symbols.extend(names.iter().map(|l| Symbol::RightArc((*l).clone())));
        symbols.extend(names.iter().map(|l| Symbol::UndirectedArc((*l).clone())));
        for depth in 1..=max_cross_depth {
            for l in &names {
                for direction in [ArcDirection::ToStack, ArcDirection::ToBuffer, ArcDirection::Undirected] {
                    symbols.push(Symbol::CrossArc { depth, label: (*l).clone(), direction });
                }
            }
        }
        symbols.push(Symbol::Root);
        symbols.extend(predicates.iter().map(|(p, _)| Symbol::Shift(p.render())));
        let symbol_index = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Vocab { words, pos, ne, labels, predicates, max_cross_depth, singletons, symbols, symbol_index }
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, i: usize) -> &Symbol {
        &self.symbols[i]
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Output symbol for an action; cross-arc depths beyond the cap share
    /// the deepest symbol. `None` for unseen labels or predicates.
    pub fn symbol_of(&self, action: &Action) -> Option<usize> {
        let s = match action {
            Action::Shift { predicate, .. } => Symbol::Shift(predicate.render()),
            Action::Reduce { .. } => Symbol::Reduce,
            Action::LeftArc(l) => Symbol::LeftArc(l.clone()),
            Action::RightArc(l) => Symbol::RightArc(l.clone()),
            Action::UndirectedArc(l) => Symbol::UndirectedArc(l.clone()),
            Action::CrossArc { depth, label, direction } => Symbol::CrossArc {
                depth: (*depth).min(self.max_cross_depth),
                label: label.clone(),
                direction: *direction,
            },
            Action::Root => Symbol::Root,
        };
        self.symbol_index.get(&s).copied()
    }

    /// The action for symbol `i`, with the shift start and reduce end filled
    /// in.
    pub fn action(&self, i: usize, start: usize, end: Option<usize>) -> Action {
        match &self.symbols[i] {
            Symbol::Reduce => Action::Reduce { end },
            Symbol::LeftArc(l) => Action::LeftArc(l.clone()),
            Symbol::RightArc(l) => Action::RightArc(l.clone()),
            Symbol::UndirectedArc(l) => Action::UndirectedArc(l.clone()),
            Symbol::CrossArc { depth, label, direction } => {
                Action::CrossArc { depth: *depth, label: label.clone(), direction: *direction }
            }
            Symbol::Root => Action::Root,
            Symbol::Shift(_) => {
                let k = i - (self.symbols.len() - self.predicates.len());
                Action::shift(start, self.predicates[k].0.clone())
            }
        }
    }

    pub fn is_shift(&self, i: usize) -> bool {
        matches!(self.symbols[i], Symbol::Shift(_))
    }

    /// Sectioned text: `[words]`, `[pos]`, `[ne]`, `[labels]`,
    /// `[predicates]`, one `symbol<TAB>count` per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("[cross_depth]\n{}\n", self.max_cross_depth);
        let mut section = |name: &str, rows: Vec<(String, usize)>| {
            out.push_str(&format!("[{name}]\n"));
            for (s, c) in rows {
                out.push_str(&format!("{s}\t{c}\n"));
            }
        };
        let index_rows = |ix: &Index| ix.entries().map(|(s, c)| (s.to_string(), c)).collect();
        section("words", index_rows(&self.words));
        section("pos", index_rows(&self.pos));
        section("ne", index_rows(&self.ne));
        section("labels", self.labels.clone());
        section("predicates", self.predicates.iter().map(|(p, c)| (p.render(), *c)).collect());
        out
    }

    pub fn parse(text: &str) -> Result<Vocab> {
        let mut sections: BTreeMap<String, Vec<(String, usize)>> = BTreeMap::new();
        let mut current: Option<String> = None;
        let mut depth = None;
        for (n, line) in text.lines().enumerate() {
            let bad = |m: &str| Error::Parse { line: n + 1, message: m.to_string() };
            if line.is_empty() {
                continue;
            }
            if let Some(name) =
                line.strip_prefix('[').and_then(|l| l.strip_suffix(']')).filter(|_| !line.contains('\t'))
            {
                current = Some(name.to_string());
                sections.entry(name.to_string()).or_default();
                continue;
            }
            match current.as_deref() {
                Some("cross_depth") => depth = Some(line.trim().parse::<usize>().map_err(|_| bad("bad cross depth"))?),
                Some(name) => {
                    let (sym, c) = line.rsplit_once('\t').ok_or_else(|| bad("expected symbol<TAB>count"))?;
                    let c = c.parse().map_err(|_| bad("bad count"))?;
                    sections.get_mut(name).expect("section opened").push((sym.to_string(), c));
                }
                None => return Err(bad("entry before any section header")),
            }
        }
        let mut take = |name: &str| -> Result<Vec<(String, usize)>> {
            sections.remove(name).ok_or_else(|| Error::Parse { line: 0, message: format!("missing [{name}] section") })
        };
        let index = |rows: Vec<(String, usize)>| {
            let mut ix = Index::default();
            for r in RESERVED {
                ix.push(r, 0);
            }
            for (s, c) in rows {
                ix.push(&s, c);
            }
            ix
        };
        let words = index(take("words")?);
        let pos = index(take("pos")?);
        let ne = index(take("ne")?);
        let labels = take("labels")?;
        let predicates = take("predicates")?.into_iter().map(|(p, c)| (Predicate::parse(&p), c)).collect();
        let depth = depth.ok_or_else(|| Error::Parse { line: 0, message: "missing [cross_depth] section".into() })?;
        Ok(Vocab::from_parts(words, pos, ne, labels, predicates, depth))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Vocab> {
        Vocab::parse(&std::fs::read_to_string(path)?)
    }
}
