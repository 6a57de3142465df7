//! Central finite-difference check of the analytic gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::Parser;
use super::params::{Gradients, Parameters};
use super::tape::{LossTerm, Tape};
use crate::corpus::CorpusEntry;
use crate::error::Result;

const EPSILON: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheckReport {
    /// max |g_a − g_n| / max(1e-8, |g_a| + |g_n|) over checked entries.
    pub max_relative_error: f64,
    pub worst_tensor: String,
    pub worst_index: (usize, usize),
    pub checked: usize,
    /// Largest relative error per tensor.
    pub per_tensor: Vec<(String, f64)>,
}

fn loss_terms(parser: &Parser, params: &Parameters, ex: &super::model::Example) -> Vec<LossTerm> {
    let mut tape = Tape::new(params);
    let l = parser.sequence_loss(&mut tape, ex, None);
    tape.loss_terms(l)
}

/// Compares analytic gradients of the dropout-free loss on `entry` with
/// central differences (ε = 1e-5), on every entry of tensors with at most
/// `samples_per_tensor` entries and a seeded sample of the rest. Loss terms
/// are differenced one by one, cross-entropies through their logits, to keep
/// rounding noise well below the tolerance. With
/// `corrupt` naming a tensor, its analytic gradient is scaled by 1.5 first,
/// which the check must flag.
pub fn gradient_check(
    parser: &Parser,
    entry: &CorpusEntry,
    samples_per_tensor: usize,
    corrupt: Option<&str>,
) -> Result<GradientCheckReport> {
    let ex = parser.example(entry)?;
    let mut analytic = Gradients::zeros_like(&parser.params);
    {
        let mut tape = Tape::new(&parser.params);
        let l = parser.sequence_loss(&mut tape, &ex, None);
        tape.backward(l, &mut analytic);
    }
    if let Some(id) = corrupt.and_then(|name| parser.params.find(name)) {
        analytic.get_mut(id).mapv_inplace(|g| 1.5 * g);
    }
    let mut params = parser.params.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut report = GradientCheckReport {
        max_relative_error: 0.0,
        worst_tensor: String::new(),
        worst_index: (0, 0),
        checked: 0,
        per_tensor: Vec::new(),
    };
    for id in parser.params.ids() {
        let (rows, cols) = parser.params.get(id).dim();
        let n = rows * cols;
        let picks: Vec<usize> =
            if n <= samples_per_tensor { (0..n).collect() } else { sample(&mut rng, n, samples_per_tensor).into_vec() };
        let mut tensor_max = 0.0f64;
        for flat in picks {
            let ix = (flat / cols, flat % cols);
            let original = params.get(id)[ix];
            params.get_mut(id)[ix] = original + EPSILON;
            let up = loss_terms(parser, &params, &ex);
            params.get_mut(id)[ix] = original - EPSILON;
            let down = loss_terms(parser, &params, &ex);
            params.get_mut(id)[ix] = original;
            let numeric = up.iter().zip(&down).map(|(u, d)| u.minus(d)).sum::<f64>() / (2.0 * EPSILON);
            let a = analytic.get(id)[ix];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
            tensor_max = tensor_max.max(rel);
            if rel > report.max_relative_error {
                report.max_relative_error = rel;
                report.worst_tensor = parser.params.name(id).to_string();
                report.worst_index = ix;
            }
            report.checked += 1;
        }
        report.per_tensor.push((parser.params.name(id).to_string(), tensor_max));
    }
    Ok(report)
}
