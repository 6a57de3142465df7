//! Aligned semantic graphs: predicates, alignments, constants and labelled
//! edges, plus validation, spanning-tree decomposition and isomorphism.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense node index, `0..N` within one graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Coarse part-of-speech letters that may follow the lemma of a surface
/// predicate.
pub const SURFACE_POS: &[&str] = &["n", "v", "a", "p", "q", "x", "c", "u", "s"];

/// Abstract predicates that carry a string constant.
pub const CONSTANT_PREDICATES: &[&str] = &[
    "named",
    "named_n",
    "card",
    "ord",
    "yofc",
    "mofy",
    "dofw",
    "dofm",
    "season",
    "fraction",
    "numbered_hour",
    "timezone_p",
    "excl",
];

/// Suffix marking a constant-bearing predicate whose constant is predicted
/// separately.
pub const CARG_SUFFIX: &str = "_CARG";

/// Sense label of surface predicates that are absent from the lexicon; their
/// lemma is the surface form plus its tag.
pub const UNKNOWN_SENSE: &str = "unknown";

/// A node label. Surface predicates render as `_lemma_pos[_sense]`, or
/// `_pos[_sense]` when delexicalized; abstract predicates render as their
/// bare label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    pub label: String,
    pub is_surface: bool,
    pub lemma: Option<String>,
    pub pos: Option<String>,
    pub sense: Option<String>,
}

impl Predicate {
    pub fn surface(lemma: &str, pos: &str, sense: Option<&str>) -> Predicate {
        let mut p = Predicate {
            label: String::new(),
            is_surface: true,
            lemma: Some(lemma.to_string()),
            pos: Some(pos.to_string()),
            sense: sense.map(str::to_string),
        };
        p.label = p.render();
        p
    }

    /// A surface predicate whose lemma has been factored out.
    pub fn delexicalized(pos: &str, sense: Option<&str>) -> Predicate {
        let mut p = Predicate {
            label: String::new(),
            is_surface: true,
            lemma: None,
            pos: Some(pos.to_string()),
            sense: sense.map(str::to_string),
        };
        p.label = p.render();
        p
    }

    pub fn abstract_(label: &str) -> Predicate {
        Predicate { label: label.to_string(), is_surface: false, lemma: None, pos: None, sense: None }
    }

    pub fn render(&self) -> String {
        if !self.is_surface {
            return self.label.clone();
        }
        let mut out = String::from("_");
        if let Some(lemma) = &self.lemma {
            out.push_str(lemma);
            out.push('_');
        }
        out.push_str(self.pos.as_deref().unwrap_or("u"));
        if let Some(sense) = &self.sense {
            out.push('_');
            out.push_str(sense);
        }
        out
    }

    /// Rendering with the lemma removed; abstract predicates are unchanged.
    pub fn render_delex(&self) -> String {
        if self.is_surface {
            let mut p = self.clone();
            p.lemma = None;
            p.render()
        } else {
            self.label.clone()
        }
    }

    /// Parses a rendered predicate. A leading underscore marks a surface
    /// predicate; `_x_y...` is read as delexicalized when `x` is a POS letter
    /// and `y` is not, otherwise as `_lemma_pos_sense`.
    pub fn parse(s: &str) -> Predicate {
        let Some(rest) = s.strip_prefix('_') else {
            return Predicate::abstract_(s);
        };
        let parts: Vec<&str> = rest.split('_').collect();
        if parts.iter().any(|p| p.is_empty()) || parts.is_empty() {
            return Predicate::abstract_(s);
        }
        let is_pos = |p: &str| SURFACE_POS.contains(&p);
        let delex = is_pos(parts[0]) && (parts.len() == 1 || !is_pos(parts[1]));
        if delex {
            let sense = (parts.len() > 1).then(|| parts[1..].join("_"));
            Predicate::delexicalized(parts[0], sense.as_deref())
        } else if parts.len() >= 2 {
            let sense = (parts.len() > 2).then(|| parts[2..].join("_"));
            Predicate::surface(parts[0], parts[1], sense.as_deref())
        } else {
            Predicate::abstract_(s)
        }
    }

    pub fn is_constant_bearing(&self) -> bool {
        !self.is_surface && CONSTANT_PREDICATES.contains(&self.label.as_str())
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Inclusive token span.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alignment {
    pub start: usize,
    pub end: usize,
}

impl Alignment {
    pub fn new(start: usize, end: usize) -> Alignment {
        Alignment { start, end }
    }

    pub fn token(i: usize) -> Alignment {
        Alignment { start: i, end: i }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub predicate: Predicate,
    pub alignment: Alignment,
    pub constant: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub head: NodeId,
    pub label: String,
    pub dependent: NodeId,
    pub directed: bool,
}

impl Edge {
    pub fn new(head: NodeId, label: &str, dependent: NodeId) -> Edge {
        Edge { head, label: label.to_string(), dependent, directed: true }
    }

    pub fn undirected(a: NodeId, label: &str, b: NodeId) -> Edge {
        Edge { head: a, label: label.to_string(), dependent: b, directed: false }
    }

    /// Identity key: undirected edges compare as unordered pairs.
    pub fn key(&self) -> (NodeId, String, NodeId, bool) {
        if self.directed || self.head <= self.dependent {
            (self.head, self.label.clone(), self.dependent, self.directed)
        } else {
            (self.dependent, self.label.clone(), self.head, self.directed)
        }
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.head == n || self.dependent == n
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if self.head == n {
            self.dependent
        } else {
            self.head
        }
    }
}

/// Rooted, connected, labelled graph whose nodes are aligned to tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub root: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    NodeIdMismatch { position: usize, id: NodeId },
    RootOutOfRange(NodeId),
    UnknownEndpoint { edge: usize, node: NodeId },
    SelfLoop { edge: usize },
    DuplicateEdge { edge: usize },
    EmptyEdgeLabel { edge: usize },
    EmptyPredicate(NodeId),
    BadAlignment { node: NodeId, start: usize, end: usize },
    AlignmentOutOfRange { node: NodeId, end: usize, sentence_len: usize },
    UnexpectedConstant(NodeId),
    NotConnected { unreachable: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph has no nodes"),
            Violation::NodeIdMismatch { position, id } => {
                write!(f, "node at position {position} has id {id}")
            }
            Violation::RootOutOfRange(r) => write!(f, "root {r} is not a node"),
            Violation::UnknownEndpoint { edge, node } => {
                write!(f, "edge {edge} references unknown node {node}")
            }
            Violation::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            Violation::DuplicateEdge { edge } => write!(f, "edge {edge} is a duplicate"),
            Violation::EmptyEdgeLabel { edge } => write!(f, "edge {edge} has an empty label"),
            Violation::EmptyPredicate(n) => write!(f, "node {n} has an empty predicate"),
            Violation::BadAlignment { node, start, end } => {
                write!(f, "node {node} alignment {start}-{end} has start > end")
            }
            Violation::AlignmentOutOfRange { node, end, sentence_len } => {
                write!(f, "node {node} alignment end {end} outside sentence of length {sentence_len}")
            }
            Violation::UnexpectedConstant(n) => {
                write!(f, "node {n} carries a constant on a non constant-bearing predicate")
            }
            Violation::NotConnected { unreachable } => {
                write!(f, "not connected ({unreachable} nodes unreachable from root)")
            }
        }
    }
}

impl SemanticGraph {
    pub fn single(predicate: Predicate, alignment: Alignment) -> SemanticGraph {
        SemanticGraph {
            nodes: vec![Node { id: NodeId(0), predicate, alignment, constant: None }],
            edges: vec![],
            root: NodeId(0),
        }
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lists every violated graph invariant; empty means valid.
    pub fn validate(&self, sentence_len: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.nodes.len();
        if n == 0 {
            out.push(Violation::Empty);
            return out;
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id.0 != i {
                out.push(Violation::NodeIdMismatch { position: i, id: node.id });
            }
            if node.predicate.render().is_empty() {
                out.push(Violation::EmptyPredicate(node.id));
            }
            let a = node.alignment;
            if a.start > a.end {
                out.push(Violation::BadAlignment { node: node.id, start: a.start, end: a.end });
            }
            if a.end >= sentence_len {
                out.push(Violation::AlignmentOutOfRange { node: node.id, end: a.end, sentence_len });
            }
            if node.constant.is_some() && !node.predicate.is_constant_bearing() {
                out.push(Violation::UnexpectedConstant(node.id));
            }
        }
        if self.root.0 >= n {
            out.push(Violation::RootOutOfRange(self.root));
        }
        let mut seen = HashSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            for end in [e.head, e.dependent] {
                if end.0 >= n {
                    out.push(Violation::UnknownEndpoint { edge: i, node: end });
                }
            }
            if e.head == e.dependent {
                out.push(Violation::SelfLoop { edge: i });
            }
            if e.label.is_empty() {
                out.push(Violation::EmptyEdgeLabel { edge: i });
            }
            if !seen.insert(e.key()) {
                out.push(Violation::DuplicateEdge { edge: i });
            }
        }
        if self.root.0 < n {
            let reached = self.reachable_from(self.root);
            let unreachable = reached.iter().filter(|r| !**r).count();
            if unreachable > 0 {
                out.push(Violation::NotConnected { unreachable });
            }
        }
        out
    }

    /// Nodes reachable from `start` with edges taken as undirected.
    pub fn reachable_from(&self, start: NodeId) -> Vec<bool> {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            if e.head.0 < n && e.dependent.0 < n {
                adj[e.head.0].push(e.dependent.0);
                adj[e.dependent.0].push(e.head.0);
            }
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start.0]);
        seen[start.0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Keeps only the component containing the root, renumbering nodes.
    /// Returns the number of nodes dropped.
    pub fn retain_root_component(&mut self) -> usize {
        let keep = self.reachable_from(self.root);
        let dropped = keep.iter().filter(|k| !**k).count();
        if dropped == 0 {
            return 0;
        }
        let mut remap = vec![None; self.nodes.len()];
        let mut nodes = Vec::new();
        for node in &self.nodes {
            if keep[node.id.0] {
                remap[node.id.0] = Some(NodeId(nodes.len()));
                let mut node = node.clone();
                node.id = NodeId(nodes.len());
                nodes.push(node);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                Some(Edge {
                    head: remap[e.head.0]?,
                    label: e.label.clone(),
                    dependent: remap[e.dependent.0]?,
                    directed: e.directed,
                })
            })
            .collect();
        self.root = remap[self.root.0].expect("root is kept");
        self.nodes = nodes;
        self.edges = edges;
        dropped
    }

    /// Returns a copy whose node ids are permuted: node `i` becomes
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> SemanticGraph {
        let mut nodes = self.nodes.clone();
        for node in &mut nodes {
            node.id = NodeId(perm[node.id.0]);
        }
        nodes.sort_by_key(|n| n.id);
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                head: NodeId(perm[e.head.0]),
                label: e.label.clone(),
                dependent: NodeId(perm[e.dependent.0]),
                directed: e.directed,
            })
            .collect();
        SemanticGraph { nodes, edges, root: NodeId(perm[self.root.0]) }
    }
}

/// How siblings are ordered during traversal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ChildOrder {
    /// Alignment start, then node id.
    #[default]
    Alignment,
    /// Node id only.
    NodeId,
}

impl ChildOrder {
    fn key(self, g: &SemanticGraph, n: NodeId) -> (usize, usize) {
        match self {
            ChildOrder::Alignment => (g.node(n).alignment.start, n.0),
            ChildOrder::NodeId => (0, n.0),
        }
    }
}

/// A tree edge of the decomposition, oriented parent to child.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeEdge {
    pub edge: usize,
    pub parent: NodeId,
    pub child: NodeId,
    /// The child is the head of the underlying edge.
    pub reversed: bool,
}

/// A non-tree edge, attached to whichever endpoint comes later in pre-order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReentrancyEdge {
    pub edge: usize,
    pub owner: NodeId,
    pub target: NodeId,
    /// The owner is the dependent of the underlying edge.
    pub reversed: bool,
}

/// An outgoing item of a node in the decomposition, in traversal order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeChild {
    Tree(TreeEdge),
    Reentrancy(ReentrancyEdge),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    pub root: NodeId,
    pub tree_edges: Vec<TreeEdge>,
    pub reentrancy_edges: Vec<ReentrancyEdge>,
    /// Pre-order over the tree with ordered children.
    pub visit_order: Vec<NodeId>,
    children: Vec<Vec<TreeChild>>,
}

impl SpanningTree {
    /// Tree children and reentrancy leaves of `n`, ordered by the policy.
    pub fn children(&self, n: NodeId) -> &[TreeChild] {
        &self.children[n.0]
    }

    pub fn tree_children(&self, n: NodeId) -> impl Iterator<Item = &TreeEdge> {
        self.children[n.0].iter().filter_map(|c| match c {
            TreeChild::Tree(t) => Some(t),
            TreeChild::Reentrancy(_) => None,
        })
    }

    pub fn is_reentrancy(&self, edge: usize) -> bool {
        self.reentrancy_edges.iter().any(|r| r.edge == edge)
    }

    /// In-order traversal: children aligned strictly before their parent
    /// precede it, the rest follow.
    pub fn in_order(&self, g: &SemanticGraph) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(g.len());
        self.in_order_from(g, self.root, &mut out);
        out
    }

    fn in_order_from(&self, g: &SemanticGraph, n: NodeId, out: &mut Vec<NodeId>) {
        let start = g.node(n).alignment.start;
        let kids: Vec<NodeId> = self.tree_children(n).map(|t| t.child).collect();
        for &c in kids.iter().filter(|c| g.node(**c).alignment.start < start) {
            self.in_order_from(g, c, out);
        }
        out.push(n);
        for &c in kids.iter().filter(|c| g.node(**c).alignment.start >= start) {
            self.in_order_from(g, c, out);
        }
    }
}

/// Decomposes a valid graph into a spanning tree rooted at the graph root
/// plus reentrancy edges. Edges followed in their own direction are
/// preferred; an edge is only traversed dependent-to-head (flagged reversed)
/// to reach nodes that no forward path reaches.
pub fn spanning_tree(g: &SemanticGraph, order: ChildOrder) -> SpanningTree {
    let n = g.len();
    let mut incident: Vec<Vec<(usize, NodeId, bool)>> = vec![Vec::new(); n];
    for (i, e) in g.edges.iter().enumerate() {
        incident[e.head.0].push((i, e.dependent, true));
        incident[e.dependent.0].push((i, e.head, !e.directed));
    }
    for list in &mut incident {
        list.sort_by(|a, b| {
            (order.key(g, a.1), &g.edges[a.0].label, a.0).cmp(&(order.key(g, b.1), &g.edges[b.0].label, b.0))
        });
    }

    let mut visited = vec![false; n];
    let mut discovered = Vec::with_capacity(n);
    let mut tree_edges: Vec<TreeEdge> = Vec::new();
    let mut in_tree = vec![false; g.edges.len()];

    fn forward(
        v: NodeId,
        incident: &[Vec<(usize, NodeId, bool)>],
        visited: &mut [bool],
        discovered: &mut Vec<NodeId>,
        tree_edges: &mut Vec<TreeEdge>,
        in_tree: &mut [bool],
    ) {
        visited[v.0] = true;
        discovered.push(v);
        for &(e, w, fwd) in &incident[v.0] {
            if fwd && !visited[w.0] {
                in_tree[e] = true;
                tree_edges.push(TreeEdge { edge: e, parent: v, child: w, reversed: false });
                forward(w, incident, visited, discovered, tree_edges, in_tree);
            }
        }
    }

    forward(g.root, &incident, &mut visited, &mut discovered, &mut tree_edges, &mut in_tree);
    loop {
        let next = discovered
            .iter()
            .find_map(|&v| incident[v.0].iter().find(|(_, w, _)| !visited[w.0]).map(|&(e, w, fwd)| (v, e, w, fwd)));
        let Some((v, e, w, fwd)) = next else { break };
        in_tree[e] = true;
        tree_edges.push(TreeEdge { edge: e, parent: v, child: w, reversed: !fwd });
        forward(w, &incident, &mut visited, &mut discovered, &mut tree_edges, &mut in_tree);
    }

    let mut children: Vec<Vec<TreeChild>> = vec![Vec::new(); n];
    for t in &tree_edges {
        children[t.parent.0].push(TreeChild::Tree(t.clone()));
    }
    for list in &mut children {
        list.sort_by_key(|c| match c {
            TreeChild::Tree(t) => (order.key(g, t.child), t.edge),
            TreeChild::Reentrancy(r) => (order.key(g, r.target), r.edge),
        });
    }
    let mut visit_order = Vec::with_capacity(n);
    let mut stack = vec![g.root];
    while let Some(v) = stack.pop() {
        visit_order.push(v);
        for c in children[v.0].iter().rev() {
            if let TreeChild::Tree(t) = c {
                stack.push(t.child);
            }
        }
    }
    let mut position = vec![0; n];
    for (i, v) in visit_order.iter().enumerate() {
        position[v.0] = i;
    }

    let mut reentrancy_edges = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if in_tree[i] {
            continue;
        }
        let (owner, target) =
            if position[e.head.0] > position[e.dependent.0] { (e.head, e.dependent) } else { (e.dependent, e.head) };
        let reversed = e.directed && owner == e.dependent;
        reentrancy_edges.push(ReentrancyEdge { edge: i, owner, target, reversed });
    }
    for r in &reentrancy_edges {
        children[r.owner.0].push(TreeChild::Reentrancy(r.clone()));
    }
    for list in &mut children {
        list.sort_by_key(|c| match c {
            TreeChild::Tree(t) => (order.key(g, t.child), t.edge),
            TreeChild::Reentrancy(r) => (order.key(g, r.target), r.edge),
        });
    }

    SpanningTree { root: g.root, tree_edges, reentrancy_edges, visit_order, children }
}

type NodeSignature = (String, Alignment, Option<String>);

fn signature(n: &Node) -> NodeSignature {
    (n.predicate.render(), n.alignment, n.constant.clone())
}

/// True iff a node bijection exists preserving rendered predicates,
/// alignments, constants, the root and every labelled edge.
pub fn graphs_equal(g1: &SemanticGraph, g2: &SemanticGraph) -> bool {
    if g1.len() != g2.len() || g1.edges.len() != g2.edges.len() {
        return false;
    }
    if g1.is_empty() {
        return true;
    }
    let mut sig_count: HashMap<NodeSignature, isize> = HashMap::new();
    for n in &g1.nodes {
        *sig_count.entry(signature(n)).or_default() += 1;
    }
    for n in &g2.nodes {
        *sig_count.entry(signature(n)).or_default() -= 1;
    }
    if sig_count.values().any(|c| *c != 0) {
        return false;
    }
    if signature(g1.node(g1.root)) != signature(g2.node(g2.root)) {
        return false;
    }

    let edges2: HashSet<_> = g2.edges.iter().map(Edge::key).collect();
    if edges2.len() != g2.edges.len() {
        return false;
    }
    let mut by_sig: HashMap<NodeSignature, Vec<NodeId>> = HashMap::new();
    for n in &g2.nodes {
        by_sig.entry(signature(n)).or_default().push(n.id);
    }
    let mut adj1: Vec<Vec<&Edge>> = vec![Vec::new(); g1.len()];
    for e in &g1.edges {
        adj1[e.head.0].push(e);
        if e.dependent != e.head {
            adj1[e.dependent.0].push(e);
        }
    }

    // Root first, then breadth-first so constraints bite early.
    let mut order = Vec::with_capacity(g1.len());
    let mut seen = vec![false; g1.len()];
    let mut queue = VecDeque::from([g1.root]);
    seen[g1.root.0] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for e in &adj1[v.0] {
            let w = e.other(v);
            if !seen[w.0] {
                seen[w.0] = true;
                queue.push_back(w);
            }
        }
    }
    for n in &g1.nodes {
        if !seen[n.id.0] {
            order.push(n.id);
        }
    }

    struct Search<'a> {
        g1: &'a SemanticGraph,
        order: Vec<NodeId>,
        by_sig: HashMap<NodeSignature, Vec<NodeId>>,
        adj1: Vec<Vec<&'a Edge>>,
        edges2: HashSet<(NodeId, String, NodeId, bool)>,
        map: Vec<Option<NodeId>>,
        used: Vec<bool>,
    }

    impl Search<'_> {
        fn consistent(&self, v: NodeId) -> bool {
            self.adj1[v.0].iter().all(|e| match (self.map[e.head.0], self.map[e.dependent.0]) {
                (Some(h), Some(d)) => {
                    let mapped = Edge { head: h, label: e.label.clone(), dependent: d, directed: e.directed };
                    self.edges2.contains(&mapped.key())
                }
                _ => true,
            })
        }

        fn run(&mut self, depth: usize) -> bool {
            if depth == self.order.len() {
                return true;
            }
            let v = self.order[depth];
            let candidates = self.by_sig[&signature(self.g1.node(v))].clone();
            for c in candidates {
                if self.used[c.0] {
                    continue;
                }
                self.map[v.0] = Some(c);
                self.used[c.0] = true;
                if self.consistent(v) && self.run(depth + 1) {
                    return true;
                }
                self.map[v.0] = None;
                self.used[c.0] = false;
            }
            false
        }
    }

    let mut search = Search { g1, order, by_sig, adj1, edges2, map: vec![None; g1.len()], used: vec![false; g2.len()] };
    // Root must map to root.
    search.map[g1.root.0] = Some(g2.root);
    search.used[g2.root.0] = true;
    if !search.consistent(g1.root) {
        return false;
    }
    search.run(1)
}

/// Counts per edge label; handy for reports.
pub fn label_histogram(g: &SemanticGraph) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for e in &g.edges {
        *out.entry(e.label.clone()).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig1() -> SemanticGraph {
        crate::fixtures::example_graph()
    }

    fn chain() -> SemanticGraph {
        let mut g = SemanticGraph::single(Predicate::abstract_("a"), Alignment::token(0));
        for (i, l) in ["b", "c"].iter().enumerate() {
            g.nodes.push(Node {
                id: NodeId(i + 1),
                predicate: Predicate::abstract_(l),
                alignment: Alignment::token(i + 1),
                constant: None,
            });
            g.edges.push(Edge::new(NodeId(i), "ARG1", NodeId(i + 1)));
        }
        g
    }

    #[test]
    fn predicate_rendering() {
        assert_eq!(Predicate::surface("want", "v", Some("1")).render(), "_want_v_1");
        assert_eq!(Predicate::surface("want", "v", Some("1")).render_delex(), "_v_1");
        assert_eq!(Predicate::surface("the", "q", None).render(), "_the_q");
        assert_eq!(Predicate::abstract_("person").render_delex(), "person");
        for s in ["_want_v_1", "_v_1", "_the_q", "_q", "_a_q", "_a_1", "person", "named_CARG"] {
            assert_eq!(Predicate::parse(s).render(), s, "{s}");
        }
        assert_eq!(Predicate::parse("_v_1").lemma, None);
        assert_eq!(Predicate::parse("_a_q").lemma.as_deref(), Some("a"));
    }

    #[test]
    fn fig1_is_valid() {
        assert!(fig1().validate(6).is_empty());
        assert!(!fig1().validate(5).is_empty());
    }

    #[test]
    fn single_node_is_valid() {
        let g = SemanticGraph::single(Predicate::abstract_("thing"), Alignment::token(0));
        assert!(g.validate(1).is_empty());
    }

    #[test]
    fn two_disconnected_nodes() {
        let mut g = SemanticGraph::single(Predicate::abstract_("thing"), Alignment::token(0));
        g.nodes.push(Node {
            id: NodeId(1),
            predicate: Predicate::abstract_("other"),
            alignment: Alignment::token(0),
            constant: None,
        });
        let report = g.validate(1);
        assert_eq!(report, vec![Violation::NotConnected { unreachable: 1 }]);
        assert!(report[0].to_string().contains("not connected"));
    }

    #[test]
    fn validate_catches_structural_errors() {
        let mut g = chain();
        g.edges.push(Edge::new(NodeId(0), "ARG1", NodeId(1)));
        g.edges.push(Edge::new(NodeId(2), "X", NodeId(2)));
        g.edges.push(Edge::new(NodeId(2), "X", NodeId(7)));
        g.nodes[1].constant = Some("x".into());
        let report = g.validate(3);
        assert!(report.contains(&Violation::DuplicateEdge { edge: 2 }));
        assert!(report.contains(&Violation::SelfLoop { edge: 3 }));
        assert!(report.contains(&Violation::UnknownEndpoint { edge: 4, node: NodeId(7) }));
        assert!(report.contains(&Violation::UnexpectedConstant(NodeId(1))));
    }

    #[test]
    fn fig1_spanning_tree() {
        let g = fig1();
        let st = spanning_tree(&g, ChildOrder::Alignment);
        let mut tree: Vec<(usize, usize, &str, bool)> =
            st.tree_edges.iter().map(|t| (t.parent.0, t.child.0, g.edges[t.edge].label.as_str(), t.reversed)).collect();
        tree.sort();
        assert_eq!(
            tree,
            vec![
                (0, 1, "BV", true),
                (2, 0, "ARG1", false),
                (2, 3, "ARG2", false),
                (3, 4, "ARG2", false),
                (4, 5, "BV", true),
            ]
        );
        assert_eq!(st.reentrancy_edges.len(), 1);
        let r = &st.reentrancy_edges[0];
        assert_eq!(g.edges[r.edge], Edge::new(NodeId(3), "ARG1", NodeId(0)));
        assert_eq!((r.owner, r.target, r.reversed), (NodeId(3), NodeId(0), false));
        assert_eq!(st.visit_order, [2, 0, 1, 3, 4, 5].map(NodeId).to_vec());
        assert_eq!(st.in_order(&g), [0, 1, 2, 3, 4, 5].map(NodeId).to_vec());
    }

    #[test]
    fn chain_tree_has_no_reversals() {
        let st = spanning_tree(&chain(), ChildOrder::Alignment);
        assert_eq!(st.tree_edges.len(), 2);
        assert!(st.tree_edges.iter().all(|t| !t.reversed));
        assert!(st.reentrancy_edges.is_empty());
    }

    #[test]
    fn diamond_has_one_reentrancy_into_d() {
        // a(0) -> b(1), a -> c(2), b -> d(3), c -> d
        let mut g = SemanticGraph::single(Predicate::abstract_("a"), Alignment::token(0));
        for (i, l) in ["b", "c", "d"].iter().enumerate() {
            g.nodes.push(Node {
                id: NodeId(i + 1),
                predicate: Predicate::abstract_(l),
                alignment: Alignment::token(i + 1),
                constant: None,
            });
        }
        g.edges = vec![
            Edge::new(NodeId(0), "ARG1", NodeId(1)),
            Edge::new(NodeId(0), "ARG2", NodeId(2)),
            Edge::new(NodeId(1), "ARG1", NodeId(3)),
            Edge::new(NodeId(2), "ARG1", NodeId(3)),
        ];
        let st = spanning_tree(&g, ChildOrder::Alignment);
        // Depth-first visits b before c, so d is first reached from b.
        assert_eq!(st.reentrancy_edges.len(), 1);
        assert_eq!(g.edges[st.reentrancy_edges[0].edge].head, NodeId(2));
        assert_eq!(st.reentrancy_edges[0].target, NodeId(3));
        assert_eq!(st.visit_order, [0, 1, 3, 2].map(NodeId).to_vec());
    }

    #[test]
    fn equality_cases() {
        let g = fig1();
        assert!(graphs_equal(&g, &g));
        assert!(graphs_equal(&g, &g.permuted(&[5, 3, 1, 0, 4, 2])));

        let mut swapped = g.clone();
        swapped.edges[0].label = "ARG2".into();
        swapped.edges[2].label = "ARG1".into();
        assert!(!graphs_equal(&g, &swapped));

        let mut missing = g.clone();
        missing.edges.remove(3);
        assert!(!graphs_equal(&g, &missing));

        let mut moved_root = g.clone();
        moved_root.root = NodeId(3);
        assert!(!graphs_equal(&g, &moved_root));
    }

    #[test]
    fn retain_root_component_renumbers() {
        let mut g = chain();
        g.nodes.push(Node {
            id: NodeId(3),
            predicate: Predicate::abstract_("z"),
            alignment: Alignment::token(0),
            constant: None,
        });
        g.root = NodeId(1);
        assert_eq!(g.retain_root_component(), 1);
        assert!(g.validate(3).is_empty());
    }
}
