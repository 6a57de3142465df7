//! PENMAN-style bracketed notation with mandatory `:alignment s-e`
//! metadata, e.g. `(w / want :alignment 1-1 :ARG1 (p / person :alignment 0-0))`.
//!
//! Relations ending in `-of` are inverted. A quoted string (or bare number)
//! value sets the node constant; any other bare symbol must be a variable
//! defined somewhere in the graph.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{spanning_tree, Alignment, ChildOrder, Edge, Node, NodeId, Predicate, SemanticGraph, TreeChild};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Slash,
    Role(String),
    Str(String),
    Sym(String),
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push(Tok::Open);
            }
            ')' => {
                chars.next();
                out.push(Tok::Close);
            }
            '/' => {
                chars.next();
                out.push(Tok::Slash);
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('\\') => match chars.next() {
                            Some(e) => s.push(e),
                            None => return Err(Error::Penman("unterminated string".into())),
                        },
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                        None => return Err(Error::Penman("unterminated string".into())),
                    }
                }
                out.push(Tok::Str(s));
            }
            _ => {
                let var_position = matches!(out.last(), Some(Tok::Open));
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || matches!(ch, '(' | ')' | '"') || (ch == '/' && var_position) {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                match s.strip_prefix(':') {
                    Some(role) if !role.is_empty() => out.push(Tok::Role(role.to_string())),
                    Some(_) => return Err(Error::Penman("empty role".into())),
                    None => out.push(Tok::Sym(s)),
                }
            }
        }
    }
    Ok(out)
}

enum Value {
    Node(usize),
    Var(String),
    Const(String),
}

struct RawNode {
    var: String,
    concept: String,
    alignment: Option<Alignment>,
    relations: Vec<(String, Value)>,
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    nodes: Vec<RawNode>,
}

impl Parser {
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn node(&mut self) -> Result<usize> {
        match self.next() {
            Some(Tok::Open) => {}
            other => return Err(Error::Penman(format!("expected '(' but found {other:?}"))),
        }
        let var = match self.next() {
            Some(Tok::Sym(v)) => v,
            other => return Err(Error::Penman(format!("expected variable but found {other:?}"))),
        };
        if self.next() != Some(Tok::Slash) {
            return Err(Error::Penman(format!("expected '/' after variable {var}")));
        }
        let concept = match self.next() {
            Some(Tok::Sym(c)) => c,
            Some(Tok::Str(c)) => c,
            other => return Err(Error::Penman(format!("expected concept for {var} but found {other:?}"))),
        };
        let idx = self.nodes.len();
        self.nodes.push(RawNode { var: var.clone(), concept, alignment: None, relations: Vec::new() });
        loop {
            match self.next() {
                Some(Tok::Close) => return Ok(idx),
                Some(Tok::Role(role)) if role == "alignment" => {
                    let span = match self.next() {
                        Some(Tok::Sym(s)) => s,
                        other => return Err(Error::Penman(format!("bad alignment for {var}: {other:?}"))),
                    };
                    self.nodes[idx].alignment = Some(
                        parse_span(&span).ok_or_else(|| Error::Penman(format!("bad alignment '{span}' for {var}")))?,
                    );
                }
                Some(Tok::Role(role)) => {
                    let value = match self.peek() {
                        Some(Tok::Open) => Value::Node(self.node()?),
                        Some(Tok::Str(_)) => match self.next() {
                            Some(Tok::Str(s)) => Value::Const(s),
                            _ => unreachable!(),
                        },
                        Some(Tok::Sym(_)) => match self.next() {
                            Some(Tok::Sym(s)) if s.parse::<f64>().is_ok() => Value::Const(s),
                            Some(Tok::Sym(s)) => Value::Var(s),
                            _ => unreachable!(),
                        },
                        other => return Err(Error::Penman(format!("missing value for :{role}: {other:?}"))),
                    };
                    self.nodes[idx].relations.push((role, value));
                }
                None => return Err(Error::Penman("unbalanced parentheses: missing ')'".into())),
                Some(other) => return Err(Error::Penman(format!("unexpected {other:?} in node {var}"))),
            }
        }
    }
}

fn parse_span(s: &str) -> Option<Alignment> {
    let (a, b) = s.split_once('-')?;
    Some(Alignment::new(a.parse().ok()?, b.parse().ok()?))
}

pub fn read_penman(text: &str) -> Result<SemanticGraph> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0, nodes: Vec::new() };
    let root = p.node()?;
    if let Some(t) = p.peek() {
        let msg = match t {
            Tok::Close => "unbalanced parentheses: extra ')'".to_string(),
            other => format!("trailing content after graph: {other:?}"),
        };
        return Err(Error::Penman(msg));
    }

    let mut by_var = HashMap::new();
    for (i, n) in p.nodes.iter().enumerate() {
        if by_var.insert(n.var.clone(), i).is_some() {
            return Err(Error::Penman(format!("variable {} defined twice", n.var)));
        }
    }
    let mut nodes = Vec::with_capacity(p.nodes.len());
    let mut edges = Vec::new();
    for (i, raw) in p.nodes.iter().enumerate() {
        let alignment = raw.alignment.ok_or_else(|| Error::Penman(format!("node {} has no :alignment", raw.var)))?;
        let mut constant = None;
        for (role, value) in &raw.relations {
            let target = match value {
                Value::Node(j) => *j,
                Value::Var(v) => {
                    *by_var.get(v).ok_or_else(|| Error::Penman(format!("variable {v} is never defined")))?
                }
                Value::Const(c) => {
                    if constant.replace(c.clone()).is_some() {
                        return Err(Error::Penman(format!("node {} has two constants", raw.var)));
                    }
                    continue;
                }
            };
            let edge = match role.strip_suffix("-of") {
                Some(base) if !base.is_empty() => Edge::new(NodeId(target), base, NodeId(i)),
                _ => Edge::new(NodeId(i), role, NodeId(target)),
            };
            edges.push(edge);
        }
        nodes.push(Node { id: NodeId(i), predicate: Predicate::parse(&raw.concept), alignment, constant });
    }
    let graph = SemanticGraph { nodes, edges, root: NodeId(root) };
    let violations = graph.validate(usize::MAX);
    if let Some(v) = violations.first() {
        return Err(Error::Penman(format!("invalid graph: {v}")));
    }
    Ok(graph)
}

/// Writes a graph in the same notation, one variable per node (`n0`, `n1`,
/// ...), with reentrancies as repeated variables. Undirected edges are
/// written head to dependent and lose their undirected flag.
pub fn write_penman(g: &SemanticGraph) -> String {
    let st = spanning_tree(g, ChildOrder::Alignment);
    let mut out = String::new();
    write_node(g, &st, g.root, &mut out, 0);
    out
}

fn write_node(g: &SemanticGraph, st: &crate::graph::SpanningTree, n: NodeId, out: &mut String, depth: usize) {
    let node = g.node(n);
    let a = node.alignment;
    let _ = write!(out, "(n{} / {} :alignment {}-{}", n.0, node.predicate.render(), a.start, a.end);
    if let Some(c) = &node.constant {
        let _ = write!(out, " :carg {}", quote(c));
    }
    for child in st.children(n) {
        let indent = "  ".repeat(depth + 1);
        match child {
            TreeChild::Tree(t) => {
                let label = &g.edges[t.edge].label;
                let suffix = if t.reversed { "-of" } else { "" };
                let _ = write!(out, "\n{indent}:{label}{suffix} ");
                write_node(g, st, t.child, out, depth + 1);
            }
            TreeChild::Reentrancy(r) => {
                let label = &g.edges[r.edge].label;
                let suffix = if r.reversed { "-of" } else { "" };
                let _ = write!(out, "\n{indent}:{label}{suffix} n{}", r.target.0);
            }
        }
    }
    out.push(')');
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_graph;
    use crate::graph::graphs_equal;

    #[test]
    fn two_node_graph() {
        let g = read_penman("(w / want :alignment 1-1 :ARG1 (p / person :alignment 0-0))").unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges, vec![Edge::new(NodeId(0), "ARG1", NodeId(1))]);
        assert_eq!(g.root, NodeId(0));
    }

    #[test]
    fn repeated_variable_is_reentrancy() {
        let g = read_penman(
            "(w / want :alignment 1-1 :ARG1 (p / person :alignment 0-0) \
             :ARG2 (m / meet :alignment 3-3 :ARG1 p))",
        )
        .unwrap();
        assert_eq!(g.nodes.len(), 3);
        let into_p = g.edges.iter().filter(|e| e.dependent == NodeId(1)).count();
        assert_eq!(into_p, 2);
    }

    #[test]
    fn example_graph_by_hand() {
        let text = r#"
            (w / _want_v_1 :alignment 2-2
               :ARG1 (p / person :alignment 1-1
                        :BV-of (q / every_q :alignment 1-1))
               :ARG2 (m / _meet_v_1 :alignment 4-4
                        :ARG1 p
                        :ARG2 (n / named :alignment 5-5 :carg "John"
                                 :BV-of (q2 / proper_q :alignment 5-5))))"#;
        let g = read_penman(text).unwrap();
        assert!(graphs_equal(&g, &example_graph()));
        let round = read_penman(&write_penman(&g)).unwrap();
        assert!(graphs_equal(&round, &g));
    }

    #[test]
    fn errors() {
        assert!(read_penman("(w / want :alignment 1-1 :ARG1 (p / person :alignment 0-0)")
            .unwrap_err()
            .to_string()
            .contains("unbalanced"));
        assert!(read_penman("(w / want :alignment 1-1 :ARG1 x)").unwrap_err().to_string().contains("never defined"));
        assert!(read_penman("(w / want :ARG1 (p / person :alignment 0-0))")
            .unwrap_err()
            .to_string()
            .contains("no :alignment"));
        assert!(read_penman("(w / want :alignment 0-0))").unwrap_err().to_string().contains("extra"));
    }
}
