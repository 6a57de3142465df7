//! Arc-eager graph transition system with a one-node buffer, cross-arcs to
//! deeper stack elements, and a static oracle under two node orderings.

use std::collections::HashSet;
use std::fmt;

use crate::corpus::CorpusEntry;
use crate::error::{Error, Result};
use crate::graph::{spanning_tree, Alignment, ChildOrder, Edge, Node, NodeId, Predicate, SemanticGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArcDirection {
    /// Buffer node is the head.
    ToStack,
    /// Stack node is the head.
    ToBuffer,
    Undirected,
}

impl ArcDirection {
    fn as_str(self) -> &'static str {
        match self {
            ArcDirection::ToStack => "to_stack",
            ArcDirection::ToBuffer => "to_buffer",
            ArcDirection::Undirected => "undirected",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// Moves the buffer node (if any) onto the stack and generates a new
    /// buffer node. The first action of a sequence is a shift into the empty
    /// initial state.
    Shift {
        start: usize,
        predicate: Predicate,
        constant: Option<String>,
    },
    /// Pops the stack top, or with an empty stack and the root set, retires
    /// the buffer node and ends the sequence.
    Reduce {
        end: Option<usize>,
    },
    /// Edge buffer → stack top.
    LeftArc(String),
    /// Edge stack top → buffer.
    RightArc(String),
    UndirectedArc(String),
    /// Arc between the buffer and the stack element `depth` below the top.
    CrossArc {
        depth: usize,
        label: String,
        direction: ArcDirection,
    },
    Root,
}

impl Action {
    pub fn shift(start: usize, predicate: Predicate) -> Action {
        Action::Shift { start, predicate, constant: None }
    }

    pub fn is_arc(&self) -> bool {
        matches!(self, Action::LeftArc(_) | Action::RightArc(_) | Action::UndirectedArc(_) | Action::CrossArc { .. })
    }

    fn render(&self, first: bool) -> String {
        match self {
            Action::Shift { start, predicate, constant } => {
                let name = if first { "init" } else { "sh" };
                match constant {
                    Some(c) => format!("{name}({start},{},{})", predicate.render(), quote(c)),
                    None => format!("{name}({start},{})", predicate.render()),
                }
            }
            Action::Reduce { end: Some(e) } => format!("re({e})"),
            Action::Reduce { end: None } => "re".into(),
            Action::LeftArc(l) => format!("la({l})"),
            Action::RightArc(l) => format!("ra({l})"),
            Action::UndirectedArc(l) => format!("ua({l})"),
            Action::CrossArc { depth, label, direction } => {
                format!("xa({depth},{label},{})", direction.as_str())
            }
            Action::Root => "root".into(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
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

/// Renders a sequence in the one-line text format; the leading shift is
/// written as `init`.
pub fn format_actions(actions: &[Action]) -> String {
    actions.iter().enumerate().map(|(i, a)| a.render(i == 0)).collect::<Vec<_>>().join(" ")
}

/// Parses the text format written by [`format_actions`].
pub fn parse_actions(text: &str) -> Result<Vec<Action>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut name = String::new();
        while let Some(&(_, c)) = chars.peek() {
            if c == '(' || c.is_whitespace() {
                break;
            }
            name.push(c);
            chars.next();
        }
        let mut args: Vec<String> = Vec::new();
        let mut quoted: Vec<bool> = Vec::new();
        if chars.peek().map(|&(_, c)| c) == Some('(') {
            chars.next();
            let mut cur = String::new();
            let mut is_quoted = false;
            loop {
                match chars.next() {
                    Some((_, '"')) => {
                        is_quoted = true;
                        loop {
                            match chars.next() {
                                Some((_, '\\')) => match chars.next() {
                                    Some((_, e)) => cur.push(e),
                                    None => return Err(bad_action(i, "unterminated string")),
                                },
                                Some((_, '"')) => break,
                                Some((_, ch)) => cur.push(ch),
                                None => return Err(bad_action(i, "unterminated string")),
                            }
                        }
                    }
                    Some((_, ',')) => {
                        args.push(std::mem::take(&mut cur));
                        quoted.push(std::mem::take(&mut is_quoted));
                    }
                    Some((_, ')')) => {
                        args.push(cur);
                        quoted.push(is_quoted);
                        break;
                    }
                    Some((_, ch)) => cur.push(ch),
                    None => return Err(bad_action(i, "missing ')'")),
                }
            }
        }
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad_action(i, &format!("bad index '{s}'")));
        let action = match (name.as_str(), args.len()) {
            ("init" | "sh", 2 | 3) => Action::Shift {
                start: num(&args[0])?,
                predicate: Predicate::parse(&args[1]),
                constant: (args.len() == 3 && quoted[2]).then(|| args[2].clone()),
            },
            ("re", 0) => Action::Reduce { end: None },
            ("re", 1) => Action::Reduce { end: Some(num(&args[0])?) },
            ("la", 1) => Action::LeftArc(args[0].clone()),
            ("ra", 1) => Action::RightArc(args[0].clone()),
            ("ua", 1) => Action::UndirectedArc(args[0].clone()),
            ("xa", 3) => Action::CrossArc {
                depth: num(&args[0])?,
                label: args[1].clone(),
                direction: match args[2].as_str() {
                    "to_stack" => ArcDirection::ToStack,
                    "to_buffer" => ArcDirection::ToBuffer,
                    "undirected" => ArcDirection::Undirected,
                    d => return Err(bad_action(i, &format!("unknown direction '{d}'"))),
                },
            },
            ("root", 0) => Action::Root,
            _ => return Err(bad_action(i, &format!("unknown action '{name}' with {} arguments", args.len()))),
        };
        out.push(action);
    }
    Ok(out)
}

fn bad_action(offset: usize, message: &str) -> Error {
    Error::Parse { line: 1, message: format!("action at byte {offset}: {message}") }
}

/// Parser configuration: a stack, a single-node buffer and the graph built
/// so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParserState {
    pub stack: Vec<NodeId>,
    pub buffer: Option<NodeId>,
    /// Generated nodes; alignment end equals start until the node is reduced.
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub root: Option<NodeId>,
    pub end_alignments: Vec<Option<usize>>,
    edge_keys: HashSet<(NodeId, String, NodeId, bool)>,
}

impl ParserState {
    /// State after the initial shift.
    pub fn initial(start: usize, predicate: Predicate, constant: Option<String>) -> ParserState {
        let mut s = ParserState {
            stack: Vec::new(),
            buffer: None,
            nodes: Vec::new(),
            edges: Vec::new(),
            root: None,
            end_alignments: Vec::new(),
            edge_keys: HashSet::new(),
        };
        s.push_node(start, predicate, constant);
        s
    }

    fn push_node(&mut self, start: usize, predicate: Predicate, constant: Option<String>) {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node { id, predicate, alignment: Alignment::token(start), constant });
        self.end_alignments.push(None);
        self.buffer = Some(id);
    }

    /// True once the buffer node has been retired by the final reduce.
    pub fn is_finished(&self) -> bool {
        self.buffer.is_none()
    }

    pub fn top(&self) -> Option<NodeId> {
        self.stack.last().copied()
    }

    /// Stack element `depth` below the top (0 is the top).
    pub fn at_depth(&self, depth: usize) -> Option<NodeId> {
        self.stack.len().checked_sub(depth + 1).map(|i| self.stack[i])
    }

    /// The node an action would reduce: the stack top, or the buffer for the
    /// final reduce.
    pub fn reduce_target(&self) -> Option<NodeId> {
        match self.top() {
            Some(t) => Some(t),
            None if self.root.is_some() => self.buffer,
            None => None,
        }
    }

    fn arc_edge(&self, action: &Action) -> Option<Edge> {
        let b = self.buffer?;
        let (other, label, dir) = match action {
            Action::LeftArc(l) => (self.top()?, l, ArcDirection::ToStack),
            Action::RightArc(l) => (self.top()?, l, ArcDirection::ToBuffer),
            Action::UndirectedArc(l) => (self.top()?, l, ArcDirection::Undirected),
            Action::CrossArc { depth, label, direction } => (self.at_depth(*depth)?, label, *direction),
            _ => return None,
        };
        Some(match dir {
            ArcDirection::ToStack => Edge::new(b, label, other),
            ArcDirection::ToBuffer => Edge::new(other, label, b),
            ArcDirection::Undirected => Edge::undirected(other, label, b),
        })
    }

    /// Why `action` is illegal here, or `None` when it may be applied.
    pub fn violation(&self, action: &Action) -> Option<String> {
        if self.is_finished() {
            return Some("parsing has finished".into());
        }
        match action {
            Action::Shift { .. } => None,
            Action::Reduce { end } => match self.reduce_target() {
                None if self.stack.is_empty() => Some("reduce needs a non-empty stack or a set root".into()),
                None => unreachable!(),
                Some(t) => match end {
                    Some(e) if *e < self.nodes[t.0].alignment.start => {
                        Some(format!("end {e} precedes start {} of node {t}", self.nodes[t.0].alignment.start))
                    }
                    _ => None,
                },
            },
            Action::Root if self.root.is_some() => Some("root already set".into()),
            Action::Root => None,
            Action::CrossArc { depth: 0, .. } => Some("cross-arc depth must be at least 1".into()),
            Action::CrossArc { depth, .. } if *depth >= self.stack.len() => {
                Some(format!("cross-arc depth {depth} but stack holds {}", self.stack.len()))
            }
            _ => {
                if self.stack.is_empty() {
                    return Some("arc needs a non-empty stack".into());
                }
                let edge = self.arc_edge(action)?;
                if edge.label.is_empty() {
                    Some("empty arc label".into())
                } else if self.edge_keys.contains(&edge.key()) {
                    Some(format!("arc {} -{}-> {} already exists", edge.head, edge.label, edge.dependent))
                } else {
                    None
                }
            }
        }
    }

    pub fn is_legal(&self, action: &Action) -> bool {
        self.violation(action).is_none()
    }

    pub fn legal_kinds(&self) -> LegalKinds {
        let open = !self.is_finished();
        LegalKinds {
            shift: open,
            reduce: open && self.reduce_target().is_some(),
            arc: open && !self.stack.is_empty(),
            max_cross_depth: if open { self.stack.len().saturating_sub(1) } else { 0 },
            root: open && self.root.is_none(),
        }
    }

    pub fn apply(&mut self, action: &Action) -> Result<()> {
        if let Some(reason) = self.violation(action) {
            return Err(Error::IllegalAction { action: action.to_string(), reason });
        }
        match action {
            Action::Shift { start, predicate, constant } => {
                if let Some(b) = self.buffer {
                    self.stack.push(b);
                }
                self.push_node(*start, predicate.clone(), constant.clone());
            }
            Action::Reduce { end } => {
                let t = match self.stack.pop() {
                    Some(t) => t,
                    None => self.buffer.take().expect("checked by violation"),
                };
                let node = &mut self.nodes[t.0];
                let e = end.unwrap_or(node.alignment.start);
                node.alignment.end = e;
                self.end_alignments[t.0] = Some(e);
            }
            Action::Root => self.root = self.buffer,
            _ => {
                let edge = self.arc_edge(action).expect("checked by violation");
                self.edge_keys.insert(edge.key());
                self.edges.push(edge);
            }
        }
        Ok(())
    }

    /// The graph built so far (not necessarily valid).
    pub fn graph(&self) -> SemanticGraph {
        SemanticGraph { nodes: self.nodes.clone(), edges: self.edges.clone(), root: self.root.unwrap_or(NodeId(0)) }
    }
}

/// Coarse legality summary; label-specific duplicate checks need
/// [`ParserState::is_legal`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LegalKinds {
    pub shift: bool,
    pub reduce: bool,
    pub arc: bool,
    pub max_cross_depth: usize,
    pub root: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Ordering {
    /// In-order traversal of the spanning tree, children ordered by
    /// alignment.
    #[default]
    InOrder,
    /// Non-decreasing alignment start, ties in in-order position.
    Monotone,
}

impl std::str::FromStr for Ordering {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "in_order" | "inorder" => Ok(Ordering::InOrder),
            "monotone" => Ok(Ordering::Monotone),
            _ => Err(format!("unknown ordering '{s}' (expected in_order or monotone)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub ordering: Ordering,
    pub emit_end_spans: bool,
    pub allow_undirected: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { ordering: Ordering::InOrder, emit_end_spans: true, allow_undirected: true }
    }
}

/// Node generation order for a graph.
pub fn node_order(g: &SemanticGraph, ordering: Ordering) -> Vec<NodeId> {
    let in_order = spanning_tree(g, ChildOrder::Alignment).in_order(g);
    match ordering {
        Ordering::InOrder => in_order,
        Ordering::Monotone => {
            let mut v: Vec<(usize, usize, NodeId)> =
                in_order.iter().enumerate().map(|(i, &n)| (g.node(n).alignment.start, i, n)).collect();
            v.sort();
            v.into_iter().map(|(_, _, n)| n).collect()
        }
    }
}

/// Static oracle: the canonical action sequence that rebuilds `entry.graph`.
///
/// Per generated node: arcs between the buffer and the stack top (left,
/// then right, then undirected, by label), then a reduce of the top if it
/// has no arcs left to the buffer or to ungenerated nodes and either ends
/// before the buffer starts or blocks an arc of a deeper node; repeated
/// until no reduce applies. Remaining arcs to deeper nodes become
/// cross-arcs, deepest first. `root` follows the arcs of the root's step.
/// After the last node the stack is drained and the buffer node retired.
pub fn oracle(entry: &CorpusEntry, config: &OracleConfig) -> Result<Vec<Action>> {
    let g = &entry.graph;
    if let Some(v) = g.validate(entry.sentence.len().max(1)).first() {
        return Err(Error::Oracle(format!("invalid graph: {v}")));
    }
    if !config.allow_undirected && g.edges.iter().any(|e| !e.directed) {
        return Err(Error::Oracle("undirected edge but undirected arcs are disabled".into()));
    }
    let order = node_order(g, config.ordering);
    let mut rank = vec![0; g.len()];
    for (i, n) in order.iter().enumerate() {
        rank[n.0] = i;
    }
    // Incident edges of each gold node that are not yet built.
    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); g.len()];
    for (i, e) in g.edges.iter().enumerate() {
        pending[e.head.0].push(i);
        pending[e.dependent.0].push(i);
    }
    let mut done = vec![false; g.edges.len()];

    let mut out = Vec::new();
    let mut stack: Vec<NodeId> = Vec::new();
    let end_of = |n: NodeId| config.emit_end_spans.then_some(g.node(n).alignment.end);
    let shift = |n: NodeId| {
        let node = g.node(n);
        Action::Shift {
            start: node.alignment.start,
            predicate: node.predicate.clone(),
            constant: node.constant.clone(),
        }
    };

    for (step, &buf) in order.iter().enumerate() {
        out.push(shift(buf));
        if step > 0 {
            stack.push(order[step - 1]);
        }
        let open_to = |n: NodeId, done: &[bool], min_rank: usize| {
            pending[n.0].iter().any(|&e| !done[e] && rank[g.edges[e].other(n).0] >= min_rank)
        };
        while let Some(&top) = stack.last() {
            for (direction, label, e) in arcs_between(g, &pending[top.0], &done, top, buf) {
                out.push(match direction {
                    ArcDirection::ToStack => Action::LeftArc(label),
                    ArcDirection::ToBuffer => Action::RightArc(label),
                    ArcDirection::Undirected => Action::UndirectedArc(label),
                });
                done[e] = true;
            }
            if open_to(top, &done, step) {
                break;
            }
            let below = &stack[..stack.len() - 1];
            let ends_before = g.node(top).alignment.end < g.node(buf).alignment.start;
            let blocks = below.iter().any(|&d| pending[d.0].iter().any(|&e| !done[e] && g.edges[e].other(d) == buf));
            if !(ends_before || blocks) {
                break;
            }
            out.push(Action::Reduce { end: end_of(top) });
            stack.pop();
        }
        for depth in (1..stack.len()).rev() {
            let d = stack[stack.len() - 1 - depth];
            for (direction, label, e) in arcs_between(g, &pending[d.0], &done, d, buf) {
                out.push(Action::CrossArc { depth, label, direction });
                done[e] = true;
            }
        }
        if buf == g.root {
            out.push(Action::Root);
        }
    }
    while let Some(top) = stack.pop() {
        out.push(Action::Reduce { end: end_of(top) });
    }
    let last = *order.last().expect("validated graphs are non-empty");
    out.push(Action::Reduce { end: end_of(last) });
    if let Some(e) = done.iter().position(|d| !d) {
        return Err(Error::Oracle(format!("edge {e} was never built")));
    }
    Ok(out)
}

/// Unbuilt edges between stack node `s` and buffer node `buf`, in canonical
/// order: buffer-headed, stack-headed, undirected, then by label.
fn arcs_between(
    g: &SemanticGraph,
    incident: &[usize],
    done: &[bool],
    s: NodeId,
    buf: NodeId,
) -> Vec<(ArcDirection, String, usize)> {
    let mut arcs: Vec<(u8, ArcDirection, String, usize)> = incident
        .iter()
        .filter(|&&e| !done[e] && g.edges[e].other(s) == buf)
        .map(|&e| {
            let edge = &g.edges[e];
            let (rank, dir) = match (edge.directed, edge.head == buf) {
                (true, true) => (0, ArcDirection::ToStack),
                (true, false) => (1, ArcDirection::ToBuffer),
                (false, _) => (2, ArcDirection::Undirected),
            };
            (rank, dir, edge.label.clone(), e)
        })
        .collect();
    arcs.sort_by(|a, b| (a.0, &a.2, a.3).cmp(&(b.0, &b.2, b.3)));
    arcs.into_iter().map(|(_, d, l, e)| (d, l, e)).collect()
}

/// Number of gold arcs the oracle builds with cross-arcs.
pub fn count_nonplanar(entry: &CorpusEntry, ordering: Ordering) -> Result<usize> {
    let config = OracleConfig { ordering, ..OracleConfig::default() };
    Ok(oracle(entry, &config)?.iter().filter(|a| matches!(a, Action::CrossArc { .. })).count())
}

/// Replays an action sequence into a valid graph over a sentence of
/// `sentence_len` tokens, repairing or skipping whatever does not fit.
/// Returns the graph and one diagnostic per repair.
pub fn actions_to_graph(actions: &[Action], sentence_len: usize) -> (SemanticGraph, Vec<String>) {
    let last_token = sentence_len.max(1) - 1;
    let mut diagnostics = Vec::new();
    let mut state: Option<ParserState> = None;
    for (i, action) in actions.iter().enumerate() {
        let mut action = action.clone();
        if let Action::Shift { start, predicate, constant } = &mut action {
            if *start > last_token {
                diagnostics.push(format!("action {i}: start {start} clamped to {last_token}"));
                *start = last_token;
            }
            if predicate.render().is_empty() {
                diagnostics.push(format!("action {i}: empty predicate replaced"));
                *predicate = Predicate::abstract_("unknown");
            }
            if constant.is_some() && !predicate.is_constant_bearing() {
                diagnostics.push(format!("action {i}: constant on {} dropped", predicate.render()));
                *constant = None;
            }
        }
        let Some(s) = state.as_mut() else {
            match action {
                Action::Shift { start, predicate, constant } => {
                    state = Some(ParserState::initial(start, predicate, constant));
                }
                other => diagnostics.push(format!("action {i}: {other} before the first shift skipped")),
            }
            continue;
        };
        if let Action::Reduce { end } = &mut action {
            if let Some(t) = s.reduce_target() {
                let start = s.nodes[t.0].alignment.start;
                let fixed = end.unwrap_or(start).clamp(start, last_token.max(start));
                if *end != Some(fixed) && end.is_some() {
                    diagnostics.push(format!("action {i}: end {:?} adjusted to {fixed}", end));
                }
                *end = Some(fixed);
            }
        }
        if let Err(e) = s.apply(&action) {
            diagnostics.push(format!("action {i}: {e}; skipped"));
        }
    }
    let Some(state) = state else {
        diagnostics.push("no shift action; fallback node".into());
        return (SemanticGraph::single(Predicate::abstract_("unknown"), Alignment::token(0)), diagnostics);
    };
    let mut g = state.graph();
    if state.root.is_none() {
        let mut has_incoming = vec![false; g.len()];
        for e in g.edges.iter().filter(|e| e.directed) {
            has_incoming[e.dependent.0] = true;
        }
        let candidates: Vec<usize> = (0..g.len()).filter(|&n| !has_incoming[n]).collect();
        g.root = NodeId(if candidates.len() == 1 { candidates[0] } else { 0 });
        diagnostics.push(format!("no root action; root set to node {}", g.root));
    }
    let dropped = g.retain_root_component();
    if dropped > 0 {
        diagnostics.push(format!("{dropped} nodes disconnected from the root dropped"));
    }
    (g, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_entry, example_graph};
    use crate::graph::graphs_equal;

    fn p(s: &str) -> Predicate {
        Predicate::parse(s)
    }

    fn entry(graph: SemanticGraph, len: usize) -> CorpusEntry {
        let tokens: Vec<String> = (0..len).map(|i| format!("w{i}")).collect();
        CorpusEntry::new(crate::corpus::Sentence::from_tokens(&tokens), graph)
    }

    fn crossing() -> SemanticGraph {
        let nodes = ["a", "b", "c", "d"]
            .iter()
            .enumerate()
            .map(|(i, l)| Node { id: NodeId(i), predicate: p(l), alignment: Alignment::token(i), constant: None })
            .collect();
        SemanticGraph {
            nodes,
            edges: vec![
                Edge::new(NodeId(0), "ARG1", NodeId(2)),
                Edge::new(NodeId(1), "ARG1", NodeId(3)),
                Edge::new(NodeId(0), "ARG2", NodeId(1)),
            ],
            root: NodeId(0),
        }
    }

    #[test]
    fn initial_state_holds_the_first_node() {
        let s = ParserState::initial(1, p("person"), None);
        assert!(s.stack.is_empty());
        assert_eq!(s.buffer, Some(NodeId(0)));
        assert_eq!(s.nodes[0].alignment.start, 1);
        assert_eq!(s, ParserState::initial(1, p("person"), None));
        assert!(s.is_legal(&Action::shift(2, p("x"))));
        assert!(!s.is_legal(&Action::Reduce { end: None }));
        assert!(s.is_legal(&Action::Root));
    }

    #[test]
    fn legality() {
        let mut s = ParserState::initial(0, p("a"), None);
        s.apply(&Action::shift(1, p("b"))).unwrap();
        let xa = Action::CrossArc { depth: 1, label: "L".into(), direction: ArcDirection::ToBuffer };
        assert!(!s.is_legal(&xa));
        s.apply(&Action::LeftArc("ARG1".into())).unwrap();
        assert!(!s.is_legal(&Action::LeftArc("ARG1".into())));
        assert!(s.is_legal(&Action::RightArc("ARG1".into())));
        assert!(s.is_legal(&Action::LeftArc("ARG2".into())));
        s.apply(&Action::shift(2, p("c"))).unwrap();
        assert!(s.is_legal(&xa));
        s.apply(&Action::Root).unwrap();
        let err = s.apply(&Action::Root).unwrap_err();
        assert!(err.to_string().contains("root already set"));
        assert_eq!(s.legal_kinds().max_cross_depth, 1);
    }

    #[test]
    fn reduce_on_empty_stack_is_an_error() {
        let mut s = ParserState::initial(0, p("a"), None);
        assert!(s.apply(&Action::Reduce { end: Some(0) }).is_err());
    }

    #[test]
    fn fig3_prefix_replays() {
        let mut s = ParserState::initial(1, p("person"), None);
        s.apply(&Action::shift(1, p("every_q"))).unwrap();
        s.apply(&Action::LeftArc("BV".into())).unwrap();
        assert_eq!(s.edges, vec![Edge::new(NodeId(1), "BV", NodeId(0))]);
        s.apply(&Action::shift(2, p("_v_1"))).unwrap();
        s.apply(&Action::Reduce { end: Some(1) }).unwrap();
        assert_eq!(s.stack, vec![NodeId(0)]);
        assert_eq!(s.buffer, Some(NodeId(2)));
        s.apply(&Action::LeftArc("ARG1".into())).unwrap();
        assert_eq!(s.edges[1], Edge::new(NodeId(2), "ARG1", NodeId(0)));
    }

    #[test]
    fn fig1_oracle_matches_fig3() {
        let actions = oracle(&example_entry(), &OracleConfig::default()).unwrap();
        let text = format_actions(&actions);
        assert!(text.starts_with("init(1,person) sh(1,every_q) la(BV) sh(2,_want_v_1) re(1) la(ARG1)"), "{text}");
        assert_eq!(
            text,
            "init(1,person) sh(1,every_q) la(BV) sh(2,_want_v_1) re(1) la(ARG1) root \
             sh(4,_meet_v_1) ra(ARG2) re(2) la(ARG1) re(1) sh(5,named,\"John\") ra(ARG2) re(4) \
             sh(5,proper_q) la(BV) re(5) re(5)"
        );
        assert_eq!(parse_actions(&text).unwrap(), actions);
        let (g, diags) = actions_to_graph(&actions, 6);
        assert!(diags.is_empty(), "{diags:?}");
        assert!(graphs_equal(&g, &example_graph()));
        assert_eq!(count_nonplanar(&example_entry(), Ordering::InOrder).unwrap(), 0);
    }

    #[test]
    fn single_node_oracle() {
        let e = entry(SemanticGraph::single(p("thing"), Alignment::token(0)), 1);
        let actions = oracle(&e, &OracleConfig::default()).unwrap();
        assert_eq!(actions, vec![Action::shift(0, p("thing")), Action::Root, Action::Reduce { end: Some(0) }]);
    }

    #[test]
    fn crossing_arcs_need_one_cross_arc_under_monotone() {
        let e = entry(crossing(), 4);
        let mono = OracleConfig { ordering: Ordering::Monotone, ..OracleConfig::default() };
        let actions = oracle(&e, &mono).unwrap();
        let xa: Vec<_> = actions.iter().filter(|a| matches!(a, Action::CrossArc { .. })).collect();
        assert_eq!(xa.len(), 1, "{}", format_actions(&actions));
        assert_eq!(count_nonplanar(&e, Ordering::Monotone).unwrap(), 1);
        assert_eq!(count_nonplanar(&e, Ordering::InOrder).unwrap(), 0);
        for cfg in [mono, OracleConfig::default()] {
            let (g, _) = actions_to_graph(&oracle(&e, &cfg).unwrap(), 4);
            assert!(graphs_equal(&g, &e.graph));
        }
    }

    #[test]
    fn undirected_edges_round_trip() {
        let mut g = crossing();
        g.edges.push(Edge::undirected(NodeId(2), "MOD", NodeId(3)));
        g.edges.push(Edge::undirected(NodeId(0), "EQ", NodeId(3)));
        let e = entry(g, 4);
        for ordering in [Ordering::InOrder, Ordering::Monotone] {
            let actions = oracle(&e, &OracleConfig { ordering, ..OracleConfig::default() }).unwrap();
            let (back, diags) = actions_to_graph(&actions, 4);
            assert!(diags.is_empty(), "{diags:?}");
            assert!(graphs_equal(&back, &e.graph), "{}", format_actions(&actions));
        }
        let strict = OracleConfig { allow_undirected: false, ..OracleConfig::default() };
        assert!(oracle(&e, &strict).is_err());
    }

    #[test]
    fn without_end_spans_reduce_has_no_payload() {
        let cfg = OracleConfig { emit_end_spans: false, ..OracleConfig::default() };
        let actions = oracle(&example_entry(), &cfg).unwrap();
        assert!(actions.iter().all(|a| !matches!(a, Action::Reduce { end: Some(_) })));
    }

    #[test]
    fn recovery() {
        let mut actions = oracle(&example_entry(), &OracleConfig::default()).unwrap();
        actions.insert(1, Action::Reduce { end: Some(1) });
        let (g, diags) = actions_to_graph(&actions, 6);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert!(graphs_equal(&g, &example_graph()));

        let (g, diags) = actions_to_graph(&[], 6);
        assert_eq!(g.len(), 1);
        assert_eq!(diags.len(), 1);

        let (g, _) =
            actions_to_graph(&[Action::shift(9, p("a")), Action::shift(0, p("b")), Action::Reduce { end: Some(4) }], 3);
        assert!(g.validate(3).is_empty());
    }

    #[test]
    fn action_text_round_trip() {
        let actions = vec![
            Action::Shift { start: 3, predicate: p("named"), constant: Some("New \"York\"".into()) },
            Action::shift(0, p("_v_1")),
            Action::CrossArc { depth: 2, label: "ARG1".into(), direction: ArcDirection::Undirected },
            Action::UndirectedArc("MOD".into()),
            Action::Reduce { end: None },
            Action::Root,
        ];
        assert_eq!(parse_actions(&format_actions(&actions)).unwrap(), actions);
        assert!(parse_actions("sh(1").is_err());
        assert!(parse_actions("zz(1)").is_err());
    }

    #[test]
    fn synthetic_corpus_invariants() {
        use crate::corpus::{generate_synthetic_corpus, SynthConfig};
        let corpus = generate_synthetic_corpus(&SynthConfig { size: 300, ..SynthConfig::default() });
        for e in &corpus {
            for ordering in [Ordering::InOrder, Ordering::Monotone] {
                let actions = oracle(e, &OracleConfig { ordering, ..OracleConfig::default() }).unwrap();
                let mut state: Option<ParserState> = None;
                let mut last_start = 0;
                for a in &actions {
                    match state.as_mut() {
                        None => match a {
                            Action::Shift { start, predicate, constant } => {
                                state = Some(ParserState::initial(*start, predicate.clone(), constant.clone()))
                            }
                            _ => panic!("sequence must open with a shift"),
                        },
                        Some(s) => s.apply(a).unwrap(),
                    }
                    if let (Ordering::Monotone, Action::Shift { start, .. }) = (ordering, a) {
                        assert!(*start >= last_start);
                        last_start = *start;
                    }
                }
                assert!(state.unwrap().is_finished());
                let count = |f: fn(&Action) -> bool| actions.iter().filter(|a| f(a)).count();
                assert_eq!(count(|a| matches!(a, Action::Shift { .. })), e.graph.len());
                assert_eq!(count(|a| matches!(a, Action::Reduce { .. })), e.graph.len());
                assert_eq!(count(Action::is_arc), e.graph.edges.len());
                let (g, diags) = actions_to_graph(&actions, e.sentence.len());
                assert!(diags.is_empty());
                assert!(graphs_equal(&g, &e.graph), "{}", format_actions(&actions));
            }
        }
    }
}
