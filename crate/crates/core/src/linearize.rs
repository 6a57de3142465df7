//! Top-down bracketed linearization of a graph's spanning tree, e.g.
//! `:root( <2> _v_1 :ARG1( <1> person ) )`, and a total parser back to
//! graphs.
//!
//! Reversed tree edges carry `-of`; reentrancy edges carry `*` and repeat
//! the target's alignment and predicate as a leaf. Only alignment starts
//! are written, so parsed nodes have single-token alignments.

use std::fmt;

use crate::delex::delexicalize_predicate;
use crate::graph::{
    spanning_tree, Alignment, ChildOrder, Edge, Node, NodeId, Predicate, SemanticGraph, TreeChild, CARG_SUFFIX,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LinearToken {
    OpenEdge {
        label: String,
        reversed: bool,
        reentrant: bool,
    },
    Close,
    Align(usize),
    Predicate(String),
    /// Constant of the preceding `_CARG` predicate.
    Constant(String),
}

impl fmt::Display for LinearToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearToken::OpenEdge { label, reversed, reentrant } => {
                let of = if *reversed { "-of" } else { "" };
                let star = if *reentrant { "*" } else { "" };
                write!(f, ":{label}{of}{star}(")
            }
            LinearToken::Close => f.write_str(")"),
            LinearToken::Align(i) => write!(f, "<{i}>"),
            LinearToken::Predicate(p) => f.write_str(p),
            LinearToken::Constant(c) => {
                f.write_str("\"")?;
                for ch in c.chars() {
                    if ch == '"' || ch == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{ch}")?;
                }
                f.write_str("\"")
            }
        }
    }
}

pub fn render_tokens(tokens: &[LinearToken]) -> String {
    tokens.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Splits linearization text into tokens. Never fails: `:LBL (` written
/// with a space is accepted, a bare `:LBL` opens an edge, `))` yields two
/// closes, and anything unrecognized is read as a predicate.
pub fn tokenize_linear(text: &str) -> Vec<LinearToken> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == ')' {
            chars.next();
            out.push(LinearToken::Close);
        } else if c == '(' {
            // Opening bracket separated from its edge label.
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            while let Some(ch) = chars.next() {
                match ch {
                    '\\' => {
                        if let Some(e) = chars.next() {
                            s.push(e);
                        }
                    }
                    '"' => break,
                    _ => s.push(ch),
                }
            }
            out.push(LinearToken::Constant(s));
        } else {
            let mut word = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() || ch == ')' || ch == '"' {
                    break;
                }
                word.push(ch);
                chars.next();
                if ch == '(' {
                    break;
                }
            }
            out.push(classify(&word));
        }
    }
    out
}

fn classify(word: &str) -> LinearToken {
    if let Some(rest) = word.strip_prefix(':') {
        let mut label = rest.strip_suffix('(').unwrap_or(rest);
        let reentrant = match label.strip_suffix('*') {
            Some(l) => {
                label = l;
                true
            }
            None => false,
        };
        let reversed = match label.strip_suffix("-of") {
            Some(l) if !l.is_empty() => {
                label = l;
                true
            }
            _ => false,
        };
        return LinearToken::OpenEdge { label: label.to_string(), reversed, reentrant };
    }
    if let Some(i) = word.strip_prefix('<').and_then(|w| w.strip_suffix('>')).and_then(|w| w.parse().ok()) {
        return LinearToken::Align(i);
    }
    LinearToken::Predicate(word.trim_end_matches('(').to_string())
}

fn node_label(n: &Node, delex: bool) -> String {
    if delex {
        return delexicalize_predicate(&n.predicate, n.constant.is_some()).render();
    }
    match (&n.constant, n.predicate.is_constant_bearing()) {
        (Some(_), true) => format!("{}{CARG_SUFFIX}", n.predicate.render()),
        _ => n.predicate.render(),
    }
}

/// Pre-order linearization of the spanning tree. With `delex`, surface
/// predicates lose their lemma and constants are omitted; otherwise
/// constant-bearing nodes are written as `named_CARG "John"`.
pub fn linearize_top_down(g: &SemanticGraph, delex: bool) -> Vec<LinearToken> {
    let st = spanning_tree(g, ChildOrder::Alignment);
    let mut out = vec![LinearToken::OpenEdge { label: "root".into(), reversed: false, reentrant: false }];
    emit(g, &st, g.root, delex, &mut out);
    out.push(LinearToken::Close);
    out
}

fn emit(g: &SemanticGraph, st: &crate::graph::SpanningTree, n: NodeId, delex: bool, out: &mut Vec<LinearToken>) {
    let node = g.node(n);
    out.push(LinearToken::Align(node.alignment.start));
    out.push(LinearToken::Predicate(node_label(node, delex)));
    if let (false, Some(c), true) = (delex, &node.constant, node.predicate.is_constant_bearing()) {
        out.push(LinearToken::Constant(c.clone()));
    }
    for child in st.children(n) {
        match child {
            TreeChild::Tree(t) => {
                out.push(LinearToken::OpenEdge {
                    label: g.edges[t.edge].label.clone(),
                    reversed: t.reversed,
                    reentrant: false,
                });
                emit(g, st, t.child, delex, out);
                out.push(LinearToken::Close);
            }
            TreeChild::Reentrancy(r) => {
                let target = g.node(r.target);
                out.push(LinearToken::OpenEdge {
                    label: g.edges[r.edge].label.clone(),
                    reversed: r.reversed,
                    reentrant: true,
                });
                out.push(LinearToken::Align(target.alignment.start));
                out.push(LinearToken::Predicate(node_label(target, delex)));
                out.push(LinearToken::Close);
            }
        }
    }
}

struct Frame {
    label: String,
    reversed: bool,
    reentrant: bool,
    parent: Option<usize>,
    node: Option<usize>,
    align: Option<usize>,
}

/// Parses a token sequence into a valid graph over `sentence_len` tokens,
/// repairing malformed input. Returns the graph and one diagnostic per
/// repair.
///
/// A `*` leaf attaches to an existing node other than its parent: the first
/// with the same predicate string and alignment start, else the nearest by
/// alignment with the same predicate, else the nearest by alignment; a new
/// node only when no other node exists.
pub fn parse_top_down(tokens: &[LinearToken], sentence_len: usize) -> (SemanticGraph, Vec<String>) {
    let last = sentence_len.max(1) - 1;
    let mut diags = Vec::new();
    if tokens.is_empty() {
        diags.push("empty linearization".to_string());
        return (SemanticGraph::single(Predicate::abstract_("unknown"), Alignment::token(0)), diags);
    }
    let mut nodes: Vec<Node> = Vec::new();
    let mut raw: Vec<String> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut frames: Vec<Frame> = Vec::new();
    let mut last_align: Option<usize> = None;

    let current_node = |frames: &[Frame]| frames.iter().rev().find_map(|f| f.node);
    let root_frame =
        || Frame { label: "root".into(), reversed: false, reentrant: false, parent: None, node: None, align: None };

    for (i, tok) in tokens.iter().enumerate() {
        match tok {
            LinearToken::OpenEdge { label, reversed, reentrant } => {
                let label = if label.is_empty() {
                    diags.push(format!("token {i}: empty edge label replaced"));
                    "unknown".to_string()
                } else {
                    label.clone()
                };
                let parent = current_node(&frames);
                if frames.last().is_some_and(|f| f.node.is_none()) {
                    diags.push(format!("token {i}: edge opened before its parent's predicate"));
                }
                frames.push(Frame {
                    label,
                    reversed: *reversed,
                    reentrant: *reentrant,
                    parent,
                    node: None,
                    align: None,
                });
            }
            LinearToken::Close => match frames.pop() {
                None => diags.push(format!("token {i}: unmatched close ignored")),
                Some(f) if f.node.is_none() => diags.push(format!("token {i}: edge without a node")),
                Some(_) => {}
            },
            LinearToken::Align(a) => {
                let a = if *a > last {
                    diags.push(format!("token {i}: alignment {a} clamped to {last}"));
                    last
                } else {
                    *a
                };
                last_align = Some(a);
                if frames.is_empty() {
                    diags.push(format!("token {i}: implicit root edge"));
                    frames.push(root_frame());
                }
                let f = frames.last_mut().expect("non-empty");
                if f.node.is_some() {
                    diags.push(format!("token {i}: stray alignment ignored"));
                } else {
                    f.align = Some(a);
                }
            }
            LinearToken::Predicate(p) => {
                if frames.is_empty() {
                    diags.push(format!("token {i}: implicit root edge"));
                    frames.push(root_frame());
                }
                let f = frames.last_mut().expect("non-empty");
                if f.node.is_some() {
                    diags.push(format!("token {i}: stray predicate {p} skipped"));
                    continue;
                }
                let p = if p.is_empty() {
                    diags.push(format!("token {i}: empty predicate replaced"));
                    "unknown".to_string()
                } else {
                    p.clone()
                };
                let align = match f.align.or(last_align) {
                    Some(a) => a,
                    None => {
                        diags.push(format!("token {i}: predicate without alignment"));
                        0
                    }
                };
                let resolved = if f.reentrant { resolve(&nodes, &raw, f.parent, &p, align) } else { None };
                let id = match resolved {
                    Some(id) => id,
                    None => {
                        if f.reentrant {
                            diags.push(format!("token {i}: reentrancy target {p} not found; new node"));
                        }
                        nodes.push(Node {
                            id: NodeId(nodes.len()),
                            predicate: Predicate::parse(&p),
                            alignment: Alignment::token(align),
                            constant: None,
                        });
                        raw.push(p);
                        nodes.len() - 1
                    }
                };
                f.node = Some(id);
                if let Some(parent) = f.parent {
                    let edge = if f.reversed {
                        Edge::new(NodeId(id), &f.label, NodeId(parent))
                    } else {
                        Edge::new(NodeId(parent), &f.label, NodeId(id))
                    };
                    if parent == id {
                        diags.push(format!("token {i}: self-loop skipped"));
                    } else if edges.iter().any(|e| e.key() == edge.key()) {
                        diags.push(format!("token {i}: duplicate edge skipped"));
                    } else {
                        edges.push(edge);
                    }
                }
            }
            LinearToken::Constant(c) => {
                let target = frames.last().and_then(|f| f.node);
                let Some(n) = target.filter(|&n| nodes[n].constant.is_none()) else {
                    diags.push(format!("token {i}: stray constant skipped"));
                    continue;
                };
                let base = raw[n].strip_suffix(CARG_SUFFIX).map(Predicate::abstract_);
                match base {
                    Some(b) if b.is_constant_bearing() => {
                        nodes[n].predicate = b;
                        nodes[n].constant = Some(c.clone());
                    }
                    _ => diags.push(format!("token {i}: constant on {} skipped", raw[n])),
                }
            }
        }
    }
    for _ in 0..frames.len() {
        diags.push("inserted close".to_string());
    }
    if nodes.is_empty() {
        diags.push("no predicates; fallback node".to_string());
        return (SemanticGraph::single(Predicate::abstract_("unknown"), Alignment::token(0)), diags);
    }
    let mut g = SemanticGraph { nodes, edges, root: NodeId(0) };
    let dropped = g.retain_root_component();
    if dropped > 0 {
        diags.push(format!("{dropped} nodes disconnected from the root dropped"));
    }
    (g, diags)
}

fn resolve(nodes: &[Node], raw: &[String], parent: Option<usize>, pred: &str, align: usize) -> Option<usize> {
    let candidates = || (0..nodes.len()).filter(|&n| Some(n) != parent);
    let dist = |n: usize| nodes[n].alignment.start.abs_diff(align);
    candidates()
        .find(|&n| raw[n] == pred && nodes[n].alignment.start == align)
        .or_else(|| candidates().filter(|&n| raw[n] == pred).min_by_key(|&n| (dist(n), n)))
        .or_else(|| candidates().min_by_key(|&n| (dist(n), n)))
}

/// Copy with every alignment reduced to its start token, the information
/// a top-down linearization keeps.
pub fn start_aligned(g: &SemanticGraph) -> SemanticGraph {
    let mut g = g.clone();
    for n in &mut g.nodes {
        n.alignment.end = n.alignment.start;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delex::delexicalize;
    use crate::fixtures::{example_graph, EXAMPLE_TOP_DOWN};
    use crate::graph::graphs_equal;

    #[test]
    fn example_linearization() {
        let toks = linearize_top_down(&example_graph(), true);
        assert_eq!(render_tokens(&toks), EXAMPLE_TOP_DOWN);
        assert_eq!(tokenize_linear(EXAMPLE_TOP_DOWN), toks);
        let lexical = render_tokens(&linearize_top_down(&example_graph(), false));
        assert!(lexical.contains("<5> named_CARG \"John\""), "{lexical}");
        assert!(lexical.starts_with(":root( <2> _want_v_1"), "{lexical}");
    }

    #[test]
    fn single_node() {
        let g = SemanticGraph::single(Predicate::abstract_("thing"), Alignment::token(0));
        assert_eq!(render_tokens(&linearize_top_down(&g, true)), ":root( <0> thing )");
    }

    #[test]
    fn reversed_edge_gets_of_suffix() {
        // Root b with an edge a -ARG1-> b: the tree reaches a through a
        // reversed edge.
        let mut g = SemanticGraph::single(Predicate::abstract_("b"), Alignment::token(1));
        g.nodes.push(Node {
            id: NodeId(1),
            predicate: Predicate::abstract_("a"),
            alignment: Alignment::token(0),
            constant: None,
        });
        g.edges.push(Edge::new(NodeId(1), "ARG1", NodeId(0)));
        let text = render_tokens(&linearize_top_down(&g, true));
        assert_eq!(text, ":root( <1> b :ARG1-of( <0> a ) )");
        let (back, diags) = parse_top_down(&tokenize_linear(&text), 2);
        assert!(diags.is_empty());
        assert!(graphs_equal(&back, &g));
    }

    #[test]
    fn example_round_trips() {
        let g = example_graph();
        let (back, diags) = parse_top_down(&linearize_top_down(&g, false), 6);
        assert!(diags.is_empty(), "{diags:?}");
        assert!(graphs_equal(&back, &g));
        let (back, _) = parse_top_down(&linearize_top_down(&g, true), 6);
        assert!(graphs_equal(&back, &delexicalize(&g).graph));
    }

    #[test]
    fn missing_final_close_is_inserted() {
        let text = EXAMPLE_TOP_DOWN.strip_suffix(" )").unwrap();
        let (g, diags) = parse_top_down(&tokenize_linear(text), 6);
        assert_eq!(diags, vec!["inserted close".to_string()]);
        assert!(graphs_equal(&g, &delexicalize(&example_graph()).graph));
    }

    #[test]
    fn empty_input() {
        let (g, diags) = parse_top_down(&[], 3);
        assert_eq!(g.len(), 1);
        assert_eq!(diags, vec!["empty linearization".to_string()]);
    }

    #[test]
    fn recovery_rules() {
        let (g, diags) = parse_top_down(&tokenize_linear(") :root( x :ARG1( <9> y ) ) )"), 3);
        assert!(g.validate(3).is_empty());
        assert_eq!(g.len(), 2);
        assert_eq!(g.nodes[1].alignment.start, 2);
        assert_eq!(diags.len(), 4, "{diags:?}");
        let spaced = tokenize_linear(":root( <0> a :BV-of ( <1> b ) )");
        assert_eq!(spaced[3], LinearToken::OpenEdge { label: "BV".into(), reversed: true, reentrant: false });
    }

    #[test]
    fn reentrancy_heuristic_prefers_exact_then_nearest() {
        let text = ":root( <0> a :ARG1( <2> b ) :ARG2( <5> c :ARG1*( <3> b ) ) )";
        let (g, _) = parse_top_down(&tokenize_linear(text), 6);
        assert_eq!(g.len(), 3);
        assert!(g.edges.contains(&Edge::new(NodeId(2), "ARG1", NodeId(1))));
        let text = ":root( <0> a :ARG1( <2> b ) :ARG2( <5> c :ARG1*( <4> z ) ) )";
        let (g, _) = parse_top_down(&tokenize_linear(text), 6);
        assert!(g.edges.contains(&Edge::new(NodeId(2), "ARG1", NodeId(1))));
    }

    #[test]
    fn synthetic_round_trip() {
        use crate::corpus::{generate_synthetic_corpus, SynthConfig};
        for e in generate_synthetic_corpus(&SynthConfig { size: 300, ..SynthConfig::default() }) {
            let (g, diags) = parse_top_down(&linearize_top_down(&e.graph, false), e.sentence.len());
            assert!(diags.is_empty(), "{diags:?}");
            assert!(graphs_equal(&g, &start_aligned(&e.graph)));
            let (g, _) = parse_top_down(&linearize_top_down(&e.graph, true), e.sentence.len());
            assert!(graphs_equal(&g, &start_aligned(&delexicalize(&e.graph).graph)));
        }
    }
}
