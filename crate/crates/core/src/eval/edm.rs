//! Elementary Dependency Match: F1 over predicate tuples (label, character
//! span) and argument tuples (head span, label, dependent span).

use super::MetricReport;
use crate::corpus::{CorpusEntry, Sentence};
use crate::error::{Error, Result};
use crate::graph::SemanticGraph;

/// Character span, end exclusive.
pub type Span = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdmTuple {
    Predicate { label: String, span: Span },
    Argument { head: Span, label: String, dependent: Span },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdmMode {
    #[default]
    Full,
    /// Only span starts are compared.
    StartOnly,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdmReport {
    pub all: MetricReport,
    pub predicates: MetricReport,
    pub arguments: MetricReport,
}

/// One predicate tuple per node (full rendered label) and one argument
/// tuple per edge. Undirected edges are ordered by span.
pub fn edm_tuples(g: &SemanticGraph, sentence: &Sentence) -> Vec<EdmTuple> {
    let span = |n| sentence.char_span(g.node(n).alignment);
    let mut out: Vec<EdmTuple> =
        g.nodes.iter().map(|n| EdmTuple::Predicate { label: n.predicate.render(), span: span(n.id) }).collect();
    for e in &g.edges {
        let (mut head, mut dependent) = (span(e.head), span(e.dependent));
        if !e.directed && dependent < head {
            std::mem::swap(&mut head, &mut dependent);
        }
        out.push(EdmTuple::Argument { head, label: e.label.clone(), dependent });
    }
    out
}

fn close(a: Span, b: Span, tolerance: usize, mode: EdmMode) -> bool {
    a.0.abs_diff(b.0) <= tolerance && (mode == EdmMode::StartOnly || a.1.abs_diff(b.1) <= tolerance)
}

fn tuples_match(g: &EdmTuple, p: &EdmTuple, tolerance: usize, mode: EdmMode) -> bool {
    match (g, p) {
        (EdmTuple::Predicate { label: l1, span: s1 }, EdmTuple::Predicate { label: l2, span: s2 }) => {
            l1 == l2 && close(*s1, *s2, tolerance, mode)
        }
        (
            EdmTuple::Argument { head: h1, label: l1, dependent: d1 },
            EdmTuple::Argument { head: h2, label: l2, dependent: d2 },
        ) => l1 == l2 && close(*h1, *h2, tolerance, mode) && close(*d1, *d2, tolerance, mode),
        _ => false,
    }
}

/// Greedy one-to-one matching: exact matches first (exact under `mode`),
/// then tolerant matches in gold order.
fn match_count(gold: &[&EdmTuple], pred: &[&EdmTuple], tolerance: usize, mode: EdmMode) -> usize {
    let mut used = vec![false; pred.len()];
    let mut gold_done = vec![false; gold.len()];
    let mut matched = 0;
    for pass_tolerance in [0, tolerance] {
        for (gi, g) in gold.iter().enumerate() {
            if gold_done[gi] {
                continue;
            }
            if let Some(pi) = (0..pred.len()).find(|&pi| !used[pi] && tuples_match(g, pred[pi], pass_tolerance, mode)) {
                used[pi] = true;
                gold_done[gi] = true;
                matched += 1;
            }
        }
    }
    matched
}

/// Micro-averaged EDM over per-sentence tuple lists.
pub fn edm_score_tuples(
    gold: &[Vec<EdmTuple>],
    pred: &[Vec<EdmTuple>],
    mode: EdmMode,
    tolerance: usize,
) -> Result<EdmReport> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch { gold: gold.len(), predicted: pred.len() });
    }
    let mut report = EdmReport::default();
    for (g, p) in gold.iter().zip(pred) {
        let is_pred = |t: &&EdmTuple| matches!(t, EdmTuple::Predicate { .. });
        let (gp, ga): (Vec<&EdmTuple>, Vec<&EdmTuple>) = g.iter().partition(is_pred);
        let (pp, pa): (Vec<&EdmTuple>, Vec<&EdmTuple>) = p.iter().partition(is_pred);
        let mp = match_count(&gp, &pp, tolerance, mode) as f64;
        let ma = match_count(&ga, &pa, tolerance, mode) as f64;
        report.predicates.add(&MetricReport::new(mp, gp.len() as f64, pp.len() as f64));
        report.arguments.add(&MetricReport::new(ma, ga.len() as f64, pa.len() as f64));
    }
    report.all = report.predicates;
    report.all.add(&report.arguments);
    Ok(report)
}

/// EDM of predicted graphs against gold entries (same sentences, same
/// order).
pub fn edm_score(gold: &[CorpusEntry], pred: &[SemanticGraph], mode: EdmMode, tolerance: usize) -> Result<EdmReport> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch { gold: gold.len(), predicted: pred.len() });
    }
    let g: Vec<Vec<EdmTuple>> = gold.iter().map(|e| edm_tuples(&e.graph, &e.sentence)).collect();
    let p: Vec<Vec<EdmTuple>> = gold.iter().zip(pred).map(|(e, g)| edm_tuples(g, &e.sentence)).collect();
    edm_score_tuples(&g, &p, mode, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_entry, example_sentence};
    use crate::graph::{Alignment, Predicate};

    fn shift_ends(tuples: &[EdmTuple], by: usize) -> Vec<EdmTuple> {
        tuples
            .iter()
            .map(|t| match t {
                EdmTuple::Predicate { label, span } => {
                    EdmTuple::Predicate { label: label.clone(), span: (span.0, span.1 + by) }
                }
                EdmTuple::Argument { head, label, dependent } => EdmTuple::Argument {
                    head: (head.0, head.1 + by),
                    label: label.clone(),
                    dependent: (dependent.0, dependent.1 + by),
                },
            })
            .collect()
    }

    #[test]
    fn example_tuple_counts() {
        let e = example_entry();
        let t = edm_tuples(&e.graph, &e.sentence);
        assert_eq!(t.iter().filter(|t| matches!(t, EdmTuple::Predicate { .. })).count(), 6);
        assert_eq!(t.iter().filter(|t| matches!(t, EdmTuple::Argument { .. })).count(), 6);
        assert!(t.contains(&EdmTuple::Predicate { label: "_want_v_1".into(), span: (17, 22) }));
    }

    #[test]
    fn multi_token_span() {
        let s = example_sentence();
        let g = crate::graph::SemanticGraph::single(Predicate::abstract_("x"), Alignment::new(0, 1));
        let t = edm_tuples(&g, &s);
        assert_eq!(t, vec![EdmTuple::Predicate { label: "x".into(), span: (0, 16) }]);
    }

    #[test]
    fn identity_and_tolerance() {
        let e = example_entry();
        let gold = vec![edm_tuples(&e.graph, &e.sentence)];
        let r = edm_score_tuples(&gold, &gold, EdmMode::Full, 1).unwrap();
        for m in [r.all, r.predicates, r.arguments] {
            assert_eq!((m.precision(), m.recall(), m.f1()), (1.0, 1.0, 1.0));
        }
        let by1 = vec![shift_ends(&gold[0], 1)];
        assert_eq!(edm_score_tuples(&gold, &by1, EdmMode::Full, 1).unwrap().all.f1(), 1.0);
        let by2 = vec![shift_ends(&gold[0], 2)];
        let r = edm_score_tuples(&gold, &by2, EdmMode::Full, 1).unwrap();
        assert_eq!(r.predicates.matched, 0.0);
        assert_eq!(edm_score_tuples(&gold, &by2, EdmMode::StartOnly, 1).unwrap().all.f1(), 1.0);
    }

    #[test]
    fn half_recall() {
        let gold = vec![vec![
            EdmTuple::Predicate { label: "a".into(), span: (0, 3) },
            EdmTuple::Predicate { label: "b".into(), span: (4, 6) },
        ]];
        let pred = vec![vec![EdmTuple::Predicate { label: "a".into(), span: (0, 3) }]];
        let r = edm_score_tuples(&gold, &pred, EdmMode::Full, 1).unwrap();
        assert_eq!(r.predicates.precision(), 1.0);
        assert_eq!(r.predicates.recall(), 0.5);
        assert!((r.predicates.f1() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_matches_are_taken_before_tolerant_ones() {
        // Tolerant matching in gold order alone would pair gold (0,4) with
        // predicted (0,3) and leave gold (0,3) without a partner.
        let t = |s| EdmTuple::Predicate { label: "a".into(), span: s };
        let gold = vec![vec![t((0, 4)), t((0, 3))]];
        let pred = vec![vec![t((0, 3)), t((0, 5))]];
        let r = edm_score_tuples(&gold, &pred, EdmMode::Full, 1).unwrap();
        assert_eq!(r.all.matched, 2.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(edm_score(&[example_entry()], &[], EdmMode::Full, 1).is_err());
    }
}
