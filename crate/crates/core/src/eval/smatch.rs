//! Smatch: triple-overlap F1 maximized over one-to-one node mappings, by
//! hill climbing with restarts or by exhaustive search for small graphs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::MetricReport;
use crate::error::{Error, Result};
use crate::graph::SemanticGraph;

/// Triples over node indices. Alignments are not included.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SmatchTriples {
    /// (node, concept)
    pub instances: Vec<(usize, String)>,
    /// (node, relation, value): constants as `carg`, the root as
    /// `(root, TOP, "root")`.
    pub attributes: Vec<(usize, String, String)>,
    /// (node, relation, node)
    pub relations: Vec<(usize, String, usize)>,
}

impl SmatchTriples {
    pub fn len(&self) -> usize {
        self.instances.len() + self.attributes.len() + self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmatchOptions {
    pub restarts: usize,
    pub seed: u64,
    pub include_root: bool,
}

impl Default for SmatchOptions {
    fn default() -> Self {
        SmatchOptions { restarts: 4, seed: 7, include_root: true }
    }
}

pub fn smatch_triples(g: &SemanticGraph, include_root: bool) -> SmatchTriples {
    let mut t = SmatchTriples {
        instances: g.nodes.iter().map(|n| (n.id.0, n.predicate.render())).collect(),
        ..SmatchTriples::default()
    };
    if include_root {
        t.attributes.push((g.root.0, "TOP".into(), "root".into()));
    }
    for n in &g.nodes {
        if let Some(c) = &n.constant {
            t.attributes.push((n.id.0, "carg".into(), c.clone()));
        }
    }
    t.relations = g.edges.iter().map(|e| (e.head.0, e.label.clone(), e.dependent.0)).collect();
    t
}

/// Matching problem from the left graph's triples into the right graph.
struct Problem {
    n_left: usize,
    n_right: usize,
    /// Left triples as (nodes, key); key is matched against the right-hand
    /// sets after mapping.
    triples: Vec<LeftTriple>,
    right_instances: HashSet<(usize, String)>,
    right_attributes: HashSet<(usize, String, String)>,
    right_relations: HashSet<(usize, String, usize)>,
    /// Left triples touching each left node.
    incident: Vec<Vec<usize>>,
    left_total: usize,
    right_total: usize,
}

enum LeftTriple {
    Instance(usize, String),
    Attribute(usize, String, String),
    Relation(usize, String, usize),
}

impl Problem {
    fn new(left: &SmatchTriples, right: &SmatchTriples, n_left: usize, n_right: usize) -> Problem {
        let mut triples = Vec::new();
        for (n, c) in &left.instances {
            triples.push(LeftTriple::Instance(*n, c.clone()));
        }
        for (n, r, v) in &left.attributes {
            triples.push(LeftTriple::Attribute(*n, r.clone(), v.clone()));
        }
        for (a, r, b) in &left.relations {
            triples.push(LeftTriple::Relation(*a, r.clone(), *b));
        }
        let mut incident = vec![Vec::new(); n_left];
        for (i, t) in triples.iter().enumerate() {
            match t {
                LeftTriple::Instance(n, _) | LeftTriple::Attribute(n, _, _) => incident[*n].push(i),
                LeftTriple::Relation(a, _, b) => {
                    incident[*a].push(i);
                    if b != a {
                        incident[*b].push(i);
                    }
                }
            }
        }
        Problem {
            n_left,
            n_right,
            triples,
            right_instances: right.instances.iter().cloned().collect(),
            right_attributes: right.attributes.iter().cloned().collect(),
            right_relations: right.relations.iter().cloned().collect(),
            incident,
            left_total: left.len(),
            right_total: right.len(),
        }
    }

    fn triple_matches(&self, t: usize, map: &[Option<usize>]) -> bool {
        match &self.triples[t] {
            LeftTriple::Instance(n, c) => map[*n].is_some_and(|m| self.right_instances.contains(&(m, c.clone()))),
            LeftTriple::Attribute(n, r, v) => {
                map[*n].is_some_and(|m| self.right_attributes.contains(&(m, r.clone(), v.clone())))
            }
            LeftTriple::Relation(a, r, b) => match (map[*a], map[*b]) {
                (Some(x), Some(y)) => self.right_relations.contains(&(x, r.clone(), y)),
                _ => false,
            },
        }
    }

    fn score(&self, map: &[Option<usize>]) -> usize {
        (0..self.triples.len()).filter(|&t| self.triple_matches(t, map)).count()
    }

    /// Score change from remapping the left nodes in `changes`; only the
    /// triples touching them are rescored.
    fn gain(&self, map: &mut [Option<usize>], changes: &[(usize, Option<usize>)]) -> isize {
        let mut touched: Vec<usize> = changes.iter().flat_map(|(n, _)| self.incident[*n].iter().copied()).collect();
        touched.sort_unstable();
        touched.dedup();
        let before = touched.iter().filter(|&&t| self.triple_matches(t, map)).count() as isize;
        let saved: Vec<(usize, Option<usize>)> = changes.iter().map(|&(n, _)| (n, map[n])).collect();
        for &(n, m) in changes {
            map[n] = m;
        }
        let after = touched.iter().filter(|&&t| self.triple_matches(t, map)).count() as isize;
        for (n, m) in saved {
            map[n] = m;
        }
        after - before
    }

    /// Maps each left node to the first free right node with the same
    /// concept, in node order.
    fn smart_init(&self, left: &SmatchTriples, right: &SmatchTriples) -> Vec<Option<usize>> {
        let mut used = vec![false; self.n_right];
        let mut map = vec![None; self.n_left];
        for (n, c) in &left.instances {
            if let Some((m, _)) = right.instances.iter().find(|(m, rc)| !used[*m] && rc == c) {
                map[*n] = Some(*m);
                used[*m] = true;
            }
        }
        map
    }

    fn random_init(&self, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
        let mut targets: Vec<usize> = (0..self.n_right).collect();
        targets.shuffle(rng);
        (0..self.n_left).map(|i| targets.get(i).copied()).collect()
    }

    /// Steepest-ascent over single reassignments to free right nodes and
    /// swaps of two left nodes' targets.
    fn climb(&self, mut map: Vec<Option<usize>>) -> (usize, Vec<Option<usize>>) {
        loop {
            let mut used = vec![false; self.n_right];
            for m in map.iter().flatten() {
                used[*m] = true;
            }
            let mut best: (isize, Vec<(usize, Option<usize>)>) = (0, Vec::new());
            for v in 0..self.n_left {
                for w in (0..self.n_right).filter(|&w| !used[w]) {
                    let change = vec![(v, Some(w))];
                    let g = self.gain(&mut map, &change);
                    if g > best.0 {
                        best = (g, change);
                    }
                }
                for u in v + 1..self.n_left {
                    if map[u] == map[v] {
                        continue;
                    }
                    let change = vec![(v, map[u]), (u, map[v])];
                    let g = self.gain(&mut map, &change);
                    if g > best.0 {
                        best = (g, change);
                    }
                }
            }
            if best.0 <= 0 {
                return (self.score(&map), map);
            }
            for (n, m) in best.1 {
                map[n] = m;
            }
        }
    }

    fn report(&self, matched: usize) -> MetricReport {
        // Left is the predicted graph, right the gold one.
        MetricReport::new(matched as f64, self.right_total as f64, self.left_total as f64)
    }
}

/// Hill-climbing Smatch of `pred` against `gold`: one concept-greedy start
/// plus `restarts - 1` random starts; the best match is reported.
pub fn smatch_score(gold: &SemanticGraph, pred: &SemanticGraph, options: &SmatchOptions) -> MetricReport {
    let left = smatch_triples(pred, options.include_root);
    let right = smatch_triples(gold, options.include_root);
    let p = Problem::new(&left, &right, pred.len(), gold.len());
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best = p.climb(p.smart_init(&left, &right)).0;
    for _ in 1..options.restarts.max(1) {
        let start = p.random_init(&mut rng);
        best = best.max(p.climb(start).0);
    }
    p.report(best)
}

/// Triple matches of the concept-greedy initial mapping, before climbing.
pub fn smatch_greedy_init(gold: &SemanticGraph, pred: &SemanticGraph, include_root: bool) -> MetricReport {
    let left = smatch_triples(pred, include_root);
    let right = smatch_triples(gold, include_root);
    let p = Problem::new(&left, &right, pred.len(), gold.len());
    let map = p.smart_init(&left, &right);
    p.report(p.score(&map))
}

/// Exact Smatch by branch-and-bound over injective mappings of the smaller
/// graph into the larger one.
pub fn smatch_exact(
    gold: &SemanticGraph,
    pred: &SemanticGraph,
    max_nodes: usize,
    include_root: bool,
) -> Result<MetricReport> {
    let smaller = gold.len().min(pred.len());
    if smaller > max_nodes {
        return Err(Error::TooManyNodes { nodes: smaller, limit: max_nodes });
    }
    let (pt, gt) = (smatch_triples(pred, include_root), smatch_triples(gold, include_root));
    let flip = pred.len() > gold.len();
    let p = if flip {
        Problem::new(&gt, &pt, gold.len(), pred.len())
    } else {
        Problem::new(&pt, &gt, pred.len(), gold.len())
    };
    // A triple is decided once all its left nodes are mapped; search maps
    // left nodes in index order, so a triple is decided at its largest node.
    let mut decided_at = vec![Vec::new(); p.n_left];
    for (i, t) in p.triples.iter().enumerate() {
        let last = match t {
            LeftTriple::Instance(n, _) | LeftTriple::Attribute(n, _, _) => *n,
            LeftTriple::Relation(a, _, b) => *a.max(b),
        };
        decided_at[last].push(i);
    }
    let mut suffix = vec![0; p.n_left + 1];
    for v in (0..p.n_left).rev() {
        suffix[v] = suffix[v + 1] + decided_at[v].len();
    }
    let mut map = vec![None; p.n_left];
    let mut used = vec![false; p.n_right];
    let mut best = 0;
    search(&p, &decided_at, &suffix, 0, 0, &mut map, &mut used, &mut best);
    let matched = best as f64;
    Ok(if flip { MetricReport::new(matched, gt.len() as f64, pt.len() as f64) } else { p.report(best) })
}

#[allow(clippy::too_many_arguments)]
fn search(
    p: &Problem,
    decided_at: &[Vec<usize>],
    suffix: &[usize],
    v: usize,
    score: usize,
    map: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    best: &mut usize,
) {
    if v == p.n_left {
        *best = (*best).max(score);
        return;
    }
    if score + suffix[v] <= *best {
        return;
    }
    for w in 0..p.n_right {
        if used[w] {
            continue;
        }
        map[v] = Some(w);
        used[w] = true;
        let gained = decided_at[v].iter().filter(|&&t| p.triple_matches(t, map)).count();
        search(p, decided_at, suffix, v + 1, score + gained, map, used, best);
        used[w] = false;
        map[v] = None;
    }
}
