//! EDM and Smatch scoring.

mod edm;
mod smatch;

pub use edm::{edm_score, edm_score_tuples, edm_tuples, EdmMode, EdmReport, EdmTuple, Span};
pub use smatch::{smatch_exact, smatch_greedy_init, smatch_score, smatch_triples, SmatchOptions, SmatchTriples};

use std::fmt;

/// Precision, recall and F1 from match counts; 0/0 counts as 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub matched: f64,
    pub gold: f64,
    pub predicted: f64,
}

impl MetricReport {
    pub fn new(matched: f64, gold: f64, predicted: f64) -> MetricReport {
        MetricReport { matched, gold, predicted }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.predicted)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.gold)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn add(&mut self, other: &MetricReport) {
        self.matched += other.matched;
        self.gold += other.gold;
        self.predicted += other.predicted;
    }

    /// Machine-readable `name<TAB>P<TAB>R<TAB>F1`.
    pub fn tsv_line(&self, name: &str) -> String {
        format!("{name}\t{:.4}\t{:.4}\t{:.4}", self.precision(), self.recall(), self.f1())
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P={:.4} R={:.4} F1={:.4}", self.precision(), self.recall(), self.f1())
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Aligned text table of named reports.
pub fn render_table(rows: &[(&str, MetricReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(6).max(6);
    let mut out = format!("{:<width$}  {:>9}  {:>9}  {:>9}\n", "metric", "precision", "recall", "f1");
    for (name, r) in rows {
        out.push_str(&format!("{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}\n", name, r.precision(), r.recall(), r.f1()));
    }
    out
}
