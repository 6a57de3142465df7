//! Reverse-mode differentiation over vector-valued operations. Parameter
//! matrices are not tape variables: their gradients accumulate directly into
//! a [`Gradients`] buffer during the backward pass.

use ndarray::{s, Array1, ArrayView1};

use super::params::{Gradients, ParamId, Parameters};

pub type Var = usize;

enum Op {
    Input,
    /// Row of a parameter matrix (embedding lookup).
    Row {
        param: ParamId,
        row: usize,
    },
    /// Σ W_k x_k (+ b).
    Linear {
        terms: Vec<(ParamId, Var)>,
        bias: Option<ParamId>,
    },
    Concat(Vec<Var>),
    Slice {
        x: Var,
        start: usize,
    },
    /// Elementwise product with a constant (dropout masks).
    Mask {
        x: Var,
        mask: Array1<f64>,
    },
    /// LSTM cell; the value is `[h'; c']`. `gates` caches the activated
    /// i, f, o and candidate gates.
    Lstm {
        x: Var,
        h: Var,
        c: Var,
        w: ParamId,
        u: ParamId,
        b: ParamId,
        gates: Array1<f64>,
    },
    /// u_i = wᵀ tanh(k_i + q); `act` caches the tanh rows.
    Pointer {
        keys: Vec<Var>,
        query: Var,
        w: ParamId,
        act: Vec<Array1<f64>>,
    },
    Softmax(Var),
    /// Σ α_i x_i.
    WeightedSum {
        weights: Var,
        items: Vec<Var>,
    },
    /// weight · −log softmax(logits)[target], restricted to `allowed`.
    CrossEntropy {
        logits: Var,
        target: usize,
        allowed_from: usize,
        weight: f64,
        probs: Array1<f64>,
    },
    Sum(Vec<Var>),
}

#[derive(Clone, Debug)]
pub(crate) enum LossTerm {
    Value(f64),
    CrossEntropy { logits: Array1<f64>, probs: Array1<f64>, target: usize, allowed_from: usize, weight: f64 },
}

impl LossTerm {
    /// `self − other`, computed from logit differences when both are
    /// cross-entropies over the same target.
    pub(crate) fn minus(&self, other: &LossTerm) -> f64 {
        match (self, other) {
            (
                LossTerm::CrossEntropy { logits: a, target, allowed_from, weight, .. },
                LossTerm::CrossEntropy { logits: b, probs, target: tb, allowed_from: fb, .. },
            ) if target == tb && allowed_from == fb => {
                let shift: f64 = (*allowed_from..a.len()).map(|j| probs[j] * (a[j] - b[j]).exp_m1()).sum();
                weight * (shift.ln_1p() - (a[*target] - b[*target]))
            }
            _ => self.value() - other.value(),
        }
    }

    fn value(&self) -> f64 {
        match self {
            LossTerm::Value(v) => *v,
            LossTerm::CrossEntropy { probs, target, weight, .. } => -weight * probs[*target].ln(),
        }
    }
}

pub struct Tape<'p> {
    params: &'p Parameters,
    values: Vec<Array1<f64>>,
    ops: Vec<Op>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Softmax over `z[from..]`; entries before `from` get probability 0.
pub fn masked_softmax(z: ArrayView1<f64>, from: usize) -> Array1<f64> {
    let mut p = Array1::zeros(z.len());
    let max = z.iter().skip(from).cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for i in from..z.len() {
        p[i] = (z[i] - max).exp();
        total += p[i];
    }
    p.slice_mut(s![from..]).mapv_inplace(|v| v / total);
    p
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p Parameters) -> Tape<'p> {
        Tape { params, values: Vec::new(), ops: Vec::new() }
    }

    fn push(&mut self, value: Array1<f64>, op: Op) -> Var {
        self.values.push(value);
        self.ops.push(op);
        self.values.len() - 1
    }

    pub fn value(&self, v: Var) -> &Array1<f64> {
        &self.values[v]
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.values[v][0]
    }

    /// The terms of a `sum` node (or the node itself) with the logits of
    /// every cross-entropy term, for precise finite differencing.
    pub(crate) fn loss_terms(&self, v: Var) -> Vec<LossTerm> {
        let parts = match &self.ops[v] {
            Op::Sum(parts) => parts.clone(),
            _ => vec![v],
        };
        parts
            .into_iter()
            .map(|p| match &self.ops[p] {
                Op::CrossEntropy { logits, target, allowed_from, weight, probs } => LossTerm::CrossEntropy {
                    logits: self.values[*logits].clone(),
                    probs: probs.clone(),
                    target: *target,
                    allowed_from: *allowed_from,
                    weight: *weight,
                },
                _ => LossTerm::Value(self.values[p].sum()),
            })
            .collect()
    }

    pub fn input(&mut self, value: Array1<f64>) -> Var {
        self.push(value, Op::Input)
    }

    pub fn row(&mut self, param: ParamId, row: usize) -> Var {
        let value = self.params.get(param).row(row).to_owned();
        self.push(value, Op::Row { param, row })
    }

    pub fn linear(&mut self, terms: &[(ParamId, Var)], bias: Option<ParamId>) -> Var {
        let rows = self.params.get(terms[0].0).nrows();
        let mut out = match bias {
            Some(b) => self.params.get(b).row(0).to_owned(),
            None => Array1::zeros(rows),
        };
        for &(w, x) in terms {
            out += &self.params.get(w).dot(&self.values[x]);
        }
        self.push(out, Op::Linear { terms: terms.to_vec(), bias })
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let views: Vec<ArrayView1<f64>> = parts.iter().map(|&p| self.values[p].view()).collect();
        let value = ndarray::concatenate(ndarray::Axis(0), &views).expect("1-d concat");
        self.push(value, Op::Concat(parts.to_vec()))
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Var {
        let value = self.values[x].slice(s![start..start + len]).to_owned();
        self.push(value, Op::Slice { x, start })
    }

    pub fn mask(&mut self, x: Var, mask: Array1<f64>) -> Var {
        let value = &self.values[x] * &mask;
        self.push(value, Op::Mask { x, mask })
    }

    /// Returns `(h', c')`.
    pub fn lstm(&mut self, x: Var, h: Var, c: Var, w: ParamId, u: ParamId, b: ParamId) -> (Var, Var) {
        let n = self.values[h].len();
        let mut z = self.params.get(b).row(0).to_owned();
        z += &self.params.get(w).dot(&self.values[x]);
        z += &self.params.get(u).dot(&self.values[h]);
        let mut gates = z;
        for (k, g) in gates.iter_mut().enumerate() {
            *g = if k < 3 * n { sigmoid(*g) } else { g.tanh() };
        }
        let mut out = Array1::zeros(2 * n);
        let c_prev = &self.values[c];
        for k in 0..n {
            let (i, f, o, cand) = (gates[k], gates[n + k], gates[2 * n + k], gates[3 * n + k]);
            let c_new = f * c_prev[k] + i * cand;
            out[n + k] = c_new;
            out[k] = o * c_new.tanh();
        }
        let hc = self.push(out, Op::Lstm { x, h, c, w, u, b, gates });
        (self.slice(hc, 0, n), self.slice(hc, n, n))
    }

    pub fn pointer(&mut self, keys: &[Var], query: Var, w: ParamId) -> Var {
        let wv = self.params.get(w).row(0);
        let q = &self.values[query];
        let mut u = Array1::zeros(keys.len());
        let mut act = Vec::with_capacity(keys.len());
        for (i, &k) in keys.iter().enumerate() {
            let t = (&self.values[k] + q).mapv(f64::tanh);
            u[i] = wv.dot(&t);
            act.push(t);
        }
        self.push(u, Op::Pointer { keys: keys.to_vec(), query, w, act })
    }

    pub fn softmax(&mut self, x: Var) -> Var {
        let value = masked_softmax(self.values[x].view(), 0);
        self.push(value, Op::Softmax(x))
    }

    pub fn weighted_sum(&mut self, weights: Var, items: &[Var]) -> Var {
        let mut out = Array1::zeros(self.values[items[0]].len());
        for (i, &x) in items.iter().enumerate() {
            out.scaled_add(self.values[weights][i], &self.values[x]);
        }
        self.push(out, Op::WeightedSum { weights, items: items.to_vec() })
    }

    /// Weighted negative log-likelihood of `target` under a softmax over
    /// `logits[allowed_from..]`.
    pub fn cross_entropy(&mut self, logits: Var, target: usize, allowed_from: usize, weight: f64) -> Var {
        let z = &self.values[logits];
        let probs = masked_softmax(z.view(), allowed_from);
        let loss = -weight * probs[target].ln();
        self.push(Array1::from_elem(1, loss), Op::CrossEntropy { logits, target, allowed_from, weight, probs })
    }

    pub fn sum(&mut self, parts: &[Var]) -> Var {
        let total: f64 = parts.iter().map(|&p| self.values[p].sum()).sum();
        self.push(Array1::from_elem(1, total), Op::Sum(parts.to_vec()))
    }

    /// Backpropagates d`output`/d· with seed 1 and adds parameter gradients
    /// into `grads`.
    pub fn backward(&self, output: Var, grads: &mut Gradients) {
        let mut g: Vec<Option<Array1<f64>>> = vec![None; self.values.len()];
        g[output] = Some(Array1::ones(self.values[output].len()));
        for v in (0..=output).rev() {
            let Some(gv) = g[v].take() else { continue };
            self.backward_op(v, &gv, &mut g, grads);
        }
    }

    fn backward_op(&self, v: Var, gv: &Array1<f64>, g: &mut [Option<Array1<f64>>], grads: &mut Gradients) {
        let params = self.params;
        let values = &self.values;
        let mut acc = |x: Var, delta: &Array1<f64>| match &mut g[x] {
            Some(a) => *a += delta,
            slot => *slot = Some(delta.clone()),
        };
        match &self.ops[v] {
            Op::Input => {}
            Op::Row { param, row } => grads.get_mut(*param).row_mut(*row).scaled_add(1.0, gv),
            Op::Linear { terms, bias } => {
                if let Some(b) = bias {
                    grads.get_mut(*b).row_mut(0).scaled_add(1.0, gv);
                }
                for &(w, x) in terms {
                    let wm = params.get(w);
                    let xv = &values[x];
                    let gw = grads.get_mut(w);
                    let mut gx = Array1::zeros(xv.len());
                    for (i, &gi) in gv.iter().enumerate() {
                        if gi != 0.0 {
                            gw.row_mut(i).scaled_add(gi, xv);
                            gx.scaled_add(gi, &wm.row(i));
                        }
                    }
                    acc(x, &gx);
                }
            }
            Op::Concat(parts) => {
                let mut at = 0;
                for &p in parts {
                    let n = values[p].len();
                    acc(p, &gv.slice(s![at..at + n]).to_owned());
                    at += n;
                }
            }
            Op::Slice { x, start } => {
                let mut full = Array1::zeros(values[*x].len());
                full.slice_mut(s![*start..*start + gv.len()]).assign(gv);
                acc(*x, &full);
            }
            Op::Mask { x, mask } => acc(*x, &(gv * mask)),
            Op::Lstm { x, h, c, w, u, b, gates } => {
                let n = values[*h].len();
                let c_prev = &values[*c];
                let out = &values[v];
                let mut dz = Array1::zeros(4 * n);
                let mut dc_prev = Array1::zeros(n);
                for k in 0..n {
                    let (i, f, o, cand) = (gates[k], gates[n + k], gates[2 * n + k], gates[3 * n + k]);
                    let tc = out[n + k].tanh();
                    let dh = gv[k];
                    let dc = gv[n + k] + dh * o * (1.0 - tc * tc);
                    dz[k] = dc * cand * i * (1.0 - i);
                    dz[n + k] = dc * c_prev[k] * f * (1.0 - f);
                    dz[2 * n + k] = dh * tc * o * (1.0 - o);
                    dz[3 * n + k] = dc * i * (1.0 - cand * cand);
                    dc_prev[k] = dc * f;
                }
                grads.get_mut(*b).row_mut(0).scaled_add(1.0, &dz);
                for (wp, xv) in [(*w, *x), (*u, *h)] {
                    let wm = params.get(wp);
                    let xval = &values[xv];
                    let gw = grads.get_mut(wp);
                    let mut gx = Array1::zeros(xval.len());
                    for (r, &gr) in dz.iter().enumerate() {
                        if gr != 0.0 {
                            gw.row_mut(r).scaled_add(gr, xval);
                            gx.scaled_add(gr, &wm.row(r));
                        }
                    }
                    acc(xv, &gx);
                }
                acc(*c, &dc_prev);
            }
            Op::Pointer { keys, query, w, act } => {
                let wv = params.get(*w).row(0).to_owned();
                let mut gq = Array1::zeros(values[*query].len());
                for (i, (&k, t)) in keys.iter().zip(act).enumerate() {
                    let gu = gv[i];
                    if gu == 0.0 {
                        continue;
                    }
                    grads.get_mut(*w).row_mut(0).scaled_add(gu, t);
                    let gz = Array1::from_shape_fn(t.len(), |j| gu * wv[j] * (1.0 - t[j] * t[j]));
                    gq += &gz;
                    acc(k, &gz);
                }
                acc(*query, &gq);
            }
            Op::Softmax(x) => {
                let a = &values[v];
                let dot = gv.dot(a);
                acc(*x, &(a * &(gv - dot)));
            }
            Op::WeightedSum { weights, items } => {
                let wv = &values[*weights];
                let mut gw = Array1::zeros(items.len());
                for (i, &x) in items.iter().enumerate() {
                    gw[i] = gv.dot(&values[x]);
                    acc(x, &(gv * wv[i]));
                }
                acc(*weights, &gw);
            }
            Op::CrossEntropy { logits, target, allowed_from, weight, probs } => {
                let scale = gv[0] * weight;
                let mut gz = probs * scale;
                gz[*target] -= scale;
                for z in gz.iter_mut().take(*allowed_from) {
                    *z = 0.0;
                }
                acc(*logits, &gz);
            }
            Op::Sum(parts) => {
                for &p in parts {
                    acc(p, &Array1::from_elem(values[p].len(), gv[0]));
                }
            }
        }
    }
}
