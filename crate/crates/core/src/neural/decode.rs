//! Greedy decoding without the tape. Sentences are processed in batches:
//! every projection is one matrix product over the active rows, so each
//! row's arithmetic is the same whatever the batch composition.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::model::{Example, LstmIds, Parser};
use super::tape::masked_softmax;
use super::vocab::Symbol;
use super::DecoderVariant;
use crate::corpus::Sentence;
use crate::delex::{relexicalize, DelexGraph};
use crate::graph::SemanticGraph;
use crate::transition::{actions_to_graph, Action, LegalKinds, ParserState};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One LSTM step: gates i, f, o = σ(W_g x + U_g h + b_g), candidate
/// g = tanh(W_c x + U_c h + b_c), c' = f⊙c + i⊙g, h' = o⊙tanh(c'). The
/// stacked weights hold the gates in the order i, f, o, candidate.
pub fn lstm_step(
    x: ArrayView1<f64>,
    h: ArrayView1<f64>,
    c: ArrayView1<f64>,
    w: ArrayView2<f64>,
    u: ArrayView2<f64>,
    b: ArrayView1<f64>,
) -> (Array1<f64>, Array1<f64>) {
    let n = h.len();
    let z = &b + &w.dot(&x) + &u.dot(&h);
    let mut h2 = Array1::zeros(n);
    let mut c2 = Array1::zeros(n);
    for k in 0..n {
        let (i, f, o) = (sigmoid(z[k]), sigmoid(z[n + k]), sigmoid(z[2 * n + k]));
        c2[k] = f * c[k] + i * z[3 * n + k].tanh();
        h2[k] = o * c2[k].tanh();
    }
    (h2, c2)
}

/// Pointer scores u_i = wᵀ tanh(W1 h_i + W2 s) over the rows h_i of `enc`.
pub fn pointer_logits(
    s: ArrayView1<f64>,
    enc: ArrayView2<f64>,
    w1: ArrayView2<f64>,
    w2: ArrayView2<f64>,
    w: ArrayView1<f64>,
) -> Array1<f64> {
    let q = w2.dot(&s);
    Array1::from_iter(enc.rows().into_iter().map(|h| w.dot(&(w1.dot(&h) + &q).mapv(f64::tanh))))
}

/// `x · wᵀ`
fn mm(x: &Array2<f64>, w: &Array2<f64>) -> Array2<f64> {
    x.dot(&w.t())
}

fn lstm_rows(
    x: &Array2<f64>,
    h: &Array2<f64>,
    c: &Array2<f64>,
    p: &super::Parameters,
    ids: LstmIds,
) -> (Array2<f64>, Array2<f64>) {
    let n = h.ncols();
    let mut z = mm(x, p.get(ids.w));
    z += &mm(h, p.get(ids.u));
    z += &p.get(ids.b).row(0);
    let mut h2 = Array2::zeros(h.raw_dim());
    let mut c2 = Array2::zeros(c.raw_dim());
    for r in 0..z.nrows() {
        for k in 0..n {
            let (i, f, o) = (sigmoid(z[[r, k]]), sigmoid(z[[r, n + k]]), sigmoid(z[[r, 2 * n + k]]));
            let cv = f * c[[r, k]] + i * z[[r, 3 * n + k]].tanh();
            c2[[r, k]] = cv;
            h2[[r, k]] = o * cv.tanh();
        }
    }
    (h2, c2)
}

fn stack_rows(rows: &[ArrayView1<f64>]) -> Array2<f64> {
    ndarray::stack(Axis(0), rows).expect("equal row lengths")
}

/// Index of the largest value; ties go to the lowest index.
fn argmax(v: ArrayView1<f64>, from: usize) -> usize {
    let mut best = from;
    for i in from..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Encoder states of one sentence and their precomputed projections.
struct Encoded {
    enc: Array2<f64>,
    keys: Array2<f64>,
    end_keys: Option<Array2<f64>>,
    hw4: Array2<f64>,
    hw6: Array2<f64>,
    hw7: Option<Array2<f64>>,
    hw8: Option<Array2<f64>>,
    s0: (Array1<f64>, Array1<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    pub actions: Vec<Action>,
    /// Delexicalized graph recovered from the actions.
    pub delex_graph: SemanticGraph,
    /// Graph with lemmas and constants restored.
    pub graph: SemanticGraph,
    /// Recovery notes from skipped or repaired actions.
    pub diagnostics: Vec<String>,
    /// Transition logits per step, when traced.
    pub(crate) trace: Vec<Array1<f64>>,
}

struct Row<'a> {
    sentence: usize,
    enc: &'a Encoded,
    h: Array1<f64>,
    c: Array1<f64>,
    state: Option<ParserState>,
    actions: Vec<Action>,
    max_steps: usize,
    forced: Option<&'a Example>,
    trace: Option<Vec<Array1<f64>>>,
}

fn coarse_legal(sym: &Symbol, k: &LegalKinds) -> bool {
    match sym {
        Symbol::Shift(_) => k.shift,
        Symbol::Reduce => k.reduce,
        Symbol::LeftArc(_) | Symbol::RightArc(_) | Symbol::UndirectedArc(_) => k.arc,
        Symbol::CrossArc { depth, .. } => *depth <= k.max_cross_depth,
        Symbol::Root => k.root,
    }
}

impl Parser {
    fn encode_batch(&self, sentences: &[&Sentence]) -> Vec<Encoded> {
        let p = &self.params;
        let ids = &self.ids;
        let h = self.config.hidden_dim;
        let lens: Vec<usize> = sentences.iter().map(|s| s.len()).collect();
        let offsets: Vec<usize> = lens.iter().scan(0, |acc, &l| Some(std::mem::replace(acc, *acc + l))).collect();
        let mut x_rows = Vec::new();
        for s in sentences {
            let (w, t, n) = self.encode_tokens(s);
            for i in 0..s.len() {
                let parts = [p.get(ids.word_emb).row(w[i]), p.get(ids.pos_emb).row(t[i]), p.get(ids.ne_emb).row(n[i])];
                x_rows.push(ndarray::concatenate(Axis(0), &parts).expect("1-d"));
            }
        }
        let views: Vec<ArrayView1<f64>> = x_rows.iter().map(|r| r.view()).collect();
        let mut g = mm(&stack_rows(&views), p.get(ids.wx));
        g += &p.get(ids.bx).row(0);
        let total: usize = lens.iter().sum();
        let mut fwd = Array2::zeros((total, h));
        let mut bwd = Array2::zeros((total, h));
        let mut finals: Vec<(Array1<f64>, Array1<f64>)> = vec![(Array1::zeros(h), Array1::zeros(h)); sentences.len()];
        let max_len = lens.iter().copied().max().unwrap_or(0);
        for backward in [false, true] {
            let lstm = if backward { ids.bwd } else { ids.fwd };
            let mut hs: Vec<Array1<f64>> = vec![Array1::zeros(h); sentences.len()];
            let mut cs: Vec<Array1<f64>> = vec![Array1::zeros(h); sentences.len()];
            for t in 0..max_len {
                let active: Vec<usize> = (0..sentences.len()).filter(|&n| lens[n] > t).collect();
                let pos = |n: usize| offsets[n] + if backward { lens[n] - 1 - t } else { t };
                let xs = stack_rows(&active.iter().map(|&n| g.row(pos(n))).collect::<Vec<_>>());
                let hm = stack_rows(&active.iter().map(|&n| hs[n].view()).collect::<Vec<_>>());
                let cm = stack_rows(&active.iter().map(|&n| cs[n].view()).collect::<Vec<_>>());
                let (h2, c2) = lstm_rows(&xs, &hm, &cm, p, lstm);
                for (r, &n) in active.iter().enumerate() {
                    hs[n] = h2.row(r).to_owned();
                    cs[n] = c2.row(r).to_owned();
                    let out = if backward { &mut bwd } else { &mut fwd };
                    out.row_mut(pos(n)).assign(&hs[n]);
                }
            }
            if backward {
                for n in 0..sentences.len() {
                    finals[n] = (hs[n].clone(), cs[n].clone());
                }
            }
        }
        let enc_all = ndarray::concatenate(Axis(1), &[fwd.view(), bwd.view()]).expect("same rows");
        let proj = |id| mm(&enc_all, p.get(id));
        let keys = proj(ids.align.w1);
        let end_keys = ids.end.map(|e| proj(e.w1));
        let hw4 = proj(ids.w4);
        let hw6 = proj(ids.w6);
        let hw7 = ids.w7.map(proj);
        let hw8 = ids.w8.map(proj);
        let part = |m: &Array2<f64>, n: usize| m.slice(s![offsets[n]..offsets[n] + lens[n], ..]).to_owned();
        (0..sentences.len())
            .map(|n| Encoded {
                enc: part(&enc_all, n),
                keys: part(&keys, n),
                end_keys: end_keys.as_ref().map(|m| part(m, n)),
                hw4: part(&hw4, n),
                hw6: part(&hw6, n),
                hw7: hw7.as_ref().map(|m| part(m, n)),
                hw8: hw8.as_ref().map(|m| part(m, n)),
                s0: finals[n].clone(),
            })
            .collect()
    }

    fn pointer_row(keys: &Array2<f64>, q: ArrayView1<f64>, w: ArrayView1<f64>) -> Array1<f64> {
        let t = (keys + &q).mapv(f64::tanh);
        t.dot(&w)
    }

    /// Picks the output symbol: the best legal one for the stack variant,
    /// the overall best otherwise.
    fn choose_symbol(
        &self,
        v: ArrayView1<f64>,
        state: Option<&ParserState>,
        align: usize,
        end: Option<usize>,
    ) -> usize {
        let masked = self.config.decoder_variant == DecoderVariant::Stack;
        if !masked {
            return argmax(v, 0);
        }
        let kinds = state.map(|s| s.legal_kinds());
        let mut scores = v.to_owned();
        for (i, sym) in self.vocab.symbols().iter().enumerate() {
            let ok = match &kinds {
                None => matches!(sym, Symbol::Shift(_)),
                Some(k) => coarse_legal(sym, k),
            };
            if !ok {
                scores[i] = f64::NEG_INFINITY;
            }
        }
        loop {
            let best = argmax(scores.view(), 0);
            if scores[best] == f64::NEG_INFINITY {
                // Nothing legal is left; fall back to the unmasked choice.
                return argmax(v, 0);
            }
            match state {
                Some(s) if !s.is_legal(&self.vocab.action(best, align, end)) => scores[best] = f64::NEG_INFINITY,
                _ => return best,
            }
        }
    }

    fn decode_chunk(&self, sentences: &[&Sentence], forced: Option<&[Example]>, trace: bool) -> Vec<DecodeOutput> {
        let p = &self.params;
        let ids = &self.ids;
        let variant = self.config.decoder_variant;
        let encoded = self.encode_batch(sentences);
        let mut rows: Vec<Row> = encoded
            .iter()
            .enumerate()
            .map(|(n, e)| Row {
                sentence: n,
                enc: e,
                h: e.s0.0.clone(),
                c: e.s0.1.clone(),
                state: None,
                actions: Vec::new(),
                max_steps: match forced {
                    Some(f) => f[n].steps.len(),
                    None => 4 * sentences[n].len() + 10,
                },
                forced: forced.map(|f| &f[n]),
                trace: trace.then(Vec::new),
            })
            .collect();
        let mut finished: Vec<Option<Row>> = (0..sentences.len()).map(|_| None).collect();
        while !rows.is_empty() {
            let s_mat = stack_rows(&rows.iter().map(|r| r.h.view()).collect::<Vec<_>>());
            let c_mat = stack_rows(&rows.iter().map(|r| r.c.view()).collect::<Vec<_>>());
            let q = mm(&s_mat, p.get(ids.align.w2));
            let qe = ids.end.map(|e| (mm(&s_mat, p.get(e.w2)), e));
            let wv = p.get(ids.align.w).row(0);
            // Alignment and attention context.
            let mut aligns = Vec::with_capacity(rows.len());
            let mut soft_ctx = Vec::new();
            for (r, row) in rows.iter().enumerate() {
                let u = Self::pointer_row(&row.enc.keys, q.row(r), wv);
                if variant == DecoderVariant::Soft {
                    let alpha = masked_softmax(u.view(), 0);
                    soft_ctx.push(row.enc.enc.t().dot(&alpha));
                }
                let step = row.actions.len();
                aligns.push(match row.forced {
                    Some(ex) => ex.steps[step].align,
                    None => argmax(u.view(), 0),
                });
            }
            let (ctx4, ctx6) = if variant == DecoderVariant::Soft {
                let qc = stack_rows(&soft_ctx.iter().map(|x| x.view()).collect::<Vec<_>>());
                (mm(&qc, p.get(ids.w4)), Some(mm(&qc, p.get(ids.w6))))
            } else {
                let rows4: Vec<ArrayView1<f64>> =
                    rows.iter().zip(&aligns).map(|(row, &a)| row.enc.hw4.row(a)).collect();
                (stack_rows(&rows4), None)
            };
            let mut o = mm(&s_mat, p.get(ids.w3));
            o += &ctx4;
            for (r, row) in rows.iter().enumerate() {
                if let (Some(hw7), Some(st)) = (&row.enc.hw7, &row.state) {
                    if let Some(t) = st.top() {
                        let a = st.nodes[t.0].alignment.start;
                        let mut or = o.row_mut(r);
                        or += &hw7.row(a);
                    }
                }
            }
            let mut v = mm(&o, p.get(ids.r));
            v += &p.get(ids.bd).row(0);
            // Transitions.
            let mut symbols = Vec::with_capacity(rows.len());
            let mut feed_aligns = Vec::with_capacity(rows.len());
            for (r, row) in rows.iter_mut().enumerate() {
                let step = row.actions.len();
                let align = aligns[r];
                if let Some(t) = row.trace.as_mut() {
                    t.push(v.row(r).to_owned());
                }
                let reduce_start = row
                    .state
                    .as_ref()
                    .and_then(|s| s.reduce_target())
                    .map(|t| row.state.as_ref().unwrap().nodes[t.0].alignment.start);
                let end = match (&qe, &row.enc.end_keys) {
                    (Some((qe, e)), Some(keys)) => {
                        let ue = Self::pointer_row(keys, qe.row(r), p.get(e.w).row(0));
                        let from = reduce_start.unwrap_or(0).min(ue.len() - 1);
                        Some(argmax(ue.view(), from))
                    }
                    _ => None,
                };
                let (symbol, end) = match row.forced {
                    Some(ex) => (ex.steps[step].symbol, ex.steps[step].end.map(|(e, _)| e)),
                    None => (self.choose_symbol(v.row(r), row.state.as_ref(), align, end), end),
                };
                let action = self.vocab.action(symbol, align, end);
                match &mut row.state {
                    None => {
                        if let Action::Shift { start, predicate, constant } = &action {
                            row.state = Some(ParserState::initial(*start, predicate.clone(), constant.clone()));
                        }
                    }
                    Some(s) => {
                        // Illegal actions are skipped here and again when
                        // the graph is rebuilt.
                        let _ = s.apply(&action);
                    }
                }
                row.actions.push(action);
                symbols.push(symbol);
                let buf = match (variant, &row.state) {
                    (DecoderVariant::Stack, Some(s)) => s.buffer.map(|b| s.nodes[b.0].alignment.start).unwrap_or(align),
                    _ => align,
                };
                feed_aligns.push(buf);
            }
            // Next decoder input and state.
            let emb: Vec<ArrayView1<f64>> = symbols.iter().map(|&t| p.get(ids.sym_emb).row(t)).collect();
            let mut d = mm(&stack_rows(&emb), p.get(ids.w5));
            match &ctx6 {
                Some(c6) => d += c6,
                None => {
                    let rows6: Vec<ArrayView1<f64>> =
                        rows.iter().zip(&feed_aligns).map(|(row, &a)| row.enc.hw6.row(a)).collect();
                    d += &stack_rows(&rows6);
                }
            }
            for (r, row) in rows.iter().enumerate() {
                if let (Some(hw8), Some(st)) = (&row.enc.hw8, &row.state) {
                    if let Some(t) = st.top() {
                        let mut dr = d.row_mut(r);
                        dr += &hw8.row(st.nodes[t.0].alignment.start);
                    }
                }
            }
            let (h2, c2) = lstm_rows(&d, &s_mat, &c_mat, p, ids.dec);
            let mut still = Vec::with_capacity(rows.len());
            for (r, mut row) in rows.into_iter().enumerate() {
                row.h = h2.row(r).to_owned();
                row.c = c2.row(r).to_owned();
                let done = row.state.as_ref().is_some_and(|s| s.is_finished()) || row.actions.len() >= row.max_steps;
                if done {
                    let n = row.sentence;
                    finished[n] = Some(row);
                } else {
                    still.push(row);
                }
            }
            rows = still;
        }
        finished
            .into_iter()
            .zip(sentences)
            .map(|(row, sentence)| {
                let row = row.expect("every row finishes");
                let (delex_graph, diagnostics) = actions_to_graph(&row.actions, sentence.len());
                let graph = relexicalize(&DelexGraph::from_graph(delex_graph.clone()), sentence, &self.lemmas);
                DecodeOutput {
                    actions: row.actions,
                    delex_graph,
                    graph,
                    diagnostics,
                    trace: row.trace.unwrap_or_default(),
                }
            })
            .collect()
    }

    /// Greedy decoding of one sentence.
    pub fn greedy_decode(&self, sentence: &Sentence) -> DecodeOutput {
        self.decode_chunk(&[sentence], None, false).pop().expect("one output")
    }

    /// Greedy decoding in batches of `batch_size`; outputs equal
    /// per-sentence decoding.
    pub fn batch_greedy_decode(&self, sentences: &[Sentence], batch_size: usize) -> Vec<DecodeOutput> {
        let mut out = Vec::with_capacity(sentences.len());
        for chunk in sentences.chunks(batch_size.max(1)) {
            let refs: Vec<&Sentence> = chunk.iter().collect();
            out.extend(self.decode_chunk(&refs, None, false));
        }
        out
    }

    /// Decoded graphs for `sentences`, lemmas and constants restored.
    pub fn parse(&self, sentences: &[Sentence], batch_size: usize) -> Vec<SemanticGraph> {
        self.batch_greedy_decode(sentences, batch_size).into_iter().map(|o| o.graph).collect()
    }

    #[cfg(test)]
    /// Transition logits along the gold sequences, through the decoding
    /// code path.
    pub(crate) fn forced_logits(&self, sentences: &[&Sentence], examples: &[Example]) -> Vec<Vec<Array1<f64>>> {
        self.decode_chunk(sentences, Some(examples), true).into_iter().map(|o| o.trace).collect()
    }
}
