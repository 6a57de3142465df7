//! Parameter layout, training examples and the differentiable sequence
//! loss.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{read_u64, ParamId, Parameters};
use super::tape::{Tape, Var};
use super::vocab::{Vocab, UNK};
use super::{DecoderVariant, ModelConfig};
use crate::corpus::{CorpusEntry, Sentence};
use crate::delex::{delexicalize, LemmaDictionary};
use crate::error::{Error, Result};
use crate::transition::{oracle, Action, OracleConfig, ParserState};

const MAGIC: &[u8; 8] = b"SGPARSER";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug)]
pub(crate) struct LstmIds {
    pub w: ParamId,
    pub u: ParamId,
    pub b: ParamId,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PointerIds {
    pub w1: ParamId,
    pub w2: ParamId,
    pub w: ParamId,
}

/// Handles to every tensor, resolved by name.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Ids {
    pub word_emb: ParamId,
    pub pos_emb: ParamId,
    pub ne_emb: ParamId,
    pub wx: ParamId,
    pub bx: ParamId,
    pub fwd: LstmIds,
    pub bwd: LstmIds,
    pub sym_emb: ParamId,
    pub dec: LstmIds,
    pub align: PointerIds,
    pub end: Option<PointerIds>,
    pub w3: ParamId,
    pub w4: ParamId,
    pub w7: Option<ParamId>,
    pub r: ParamId,
    pub bd: ParamId,
    pub w5: ParamId,
    pub w6: ParamId,
    pub w8: Option<ParamId>,
}

impl Ids {
    fn resolve(p: &Parameters, config: &ModelConfig) -> Result<Ids> {
        let get = |name: &str| p.find(name).ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")));
        let lstm = |prefix: &str| -> Result<LstmIds> {
            Ok(LstmIds {
                w: get(&format!("{prefix}.W"))?,
                u: get(&format!("{prefix}.U"))?,
                b: get(&format!("{prefix}.b"))?,
            })
        };
        let pointer = |prefix: &str| -> Result<PointerIds> {
            Ok(PointerIds {
                w1: get(&format!("{prefix}.W1"))?,
                w2: get(&format!("{prefix}.W2"))?,
                w: get(&format!("{prefix}.w"))?,
            })
        };
        let stack = config.decoder_variant == DecoderVariant::Stack;
        Ok(Ids {
            word_emb: get("encoder.word_embedding")?,
            pos_emb: get("encoder.pos_embedding")?,
            ne_emb: get("encoder.ne_embedding")?,
            wx: get("encoder.W_x")?,
            bx: get("encoder.b_x")?,
            fwd: lstm("encoder.forward")?,
            bwd: lstm("encoder.backward")?,
            sym_emb: get("decoder.symbol_embedding")?,
            dec: lstm("decoder.lstm")?,
            align: pointer("pointer")?,
            end: if config.emit_end_spans { Some(pointer("end_pointer")?) } else { None },
            w3: get("output.W3")?,
            w4: get("output.W4")?,
            w7: if stack { Some(get("output.W7")?) } else { None },
            r: get("output.R")?,
            bd: get("output.b")?,
            w5: get("input.W5")?,
            w6: get("input.W6")?,
            w8: if stack { Some(get("input.W8")?) } else { None },
        })
    }
}

fn init_parameters<R: Rng>(config: &ModelConfig, vocab: &Vocab, rng: &mut R) -> Parameters {
    let h = config.hidden_dim;
    let s = config.init_scale;
    let mut p = Parameters::default();
    p.add_uniform("encoder.word_embedding", vocab.words.len(), config.word_emb_dim, s, rng);
    p.add_uniform("encoder.pos_embedding", vocab.pos.len(), config.pos_emb_dim, s, rng);
    p.add_uniform("encoder.ne_embedding", vocab.ne.len(), config.ne_emb_dim, s, rng);
    p.add_uniform("encoder.W_x", h, config.word_emb_dim + config.pos_emb_dim + config.ne_emb_dim, s, rng);
    p.add_zeros("encoder.b_x", 1, h);
    let lstm = |p: &mut Parameters, prefix: &str, input: usize, rng: &mut R| {
        p.add_uniform(&format!("{prefix}.W"), 4 * h, input, s, rng);
        p.add_uniform(&format!("{prefix}.U"), 4 * h, h, s, rng);
        let b = p.add_zeros(&format!("{prefix}.b"), 1, 4 * h);
        // Gate order is input, forget, output, candidate.
        p.get_mut(b).slice_mut(ndarray::s![0, h..2 * h]).fill(1.0);
    };
    lstm(&mut p, "encoder.forward", h, rng);
    lstm(&mut p, "encoder.backward", h, rng);
    p.add_uniform("decoder.symbol_embedding", vocab.symbol_count(), config.decoder_emb_dim, s, rng);
    lstm(&mut p, "decoder.lstm", h, rng);
    let pointer = |p: &mut Parameters, prefix: &str, rng: &mut R| {
        p.add_uniform(&format!("{prefix}.W1"), h, 2 * h, s, rng);
        p.add_uniform(&format!("{prefix}.W2"), h, h, s, rng);
        p.add_uniform(&format!("{prefix}.w"), 1, h, s, rng);
    };
    pointer(&mut p, "pointer", rng);
    if config.emit_end_spans {
        pointer(&mut p, "end_pointer", rng);
    }
    let stack = config.decoder_variant == DecoderVariant::Stack;
    p.add_uniform("output.W3", h, h, s, rng);
    p.add_uniform("output.W4", h, 2 * h, s, rng);
    if stack {
        p.add_uniform("output.W7", h, 2 * h, s, rng);
    }
    p.add_uniform("output.R", vocab.symbol_count(), h, s, rng);
    p.add_zeros("output.b", 1, vocab.symbol_count());
    p.add_uniform("input.W5", h, config.decoder_emb_dim, s, rng);
    p.add_uniform("input.W6", h, 2 * h, s, rng);
    if stack {
        p.add_uniform("input.W8", h, 2 * h, s, rng);
    }
    p
}

/// One decoder step of a gold sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Step {
    pub symbol: usize,
    /// Buffer alignment after the action.
    pub align: usize,
    /// `(end, start)` of the node reduced at this step.
    pub end: Option<(usize, usize)>,
    /// Stack-top alignment before and after the action.
    pub st0_before: Option<usize>,
    pub st0_after: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Example {
    pub words: Vec<usize>,
    pub pos: Vec<usize>,
    pub ne: Vec<usize>,
    pub steps: Vec<Step>,
}

/// Randomness applied in training mode.
pub(crate) struct Noise<'r> {
    pub rng: &'r mut ChaCha8Rng,
    pub dropout: f64,
    pub unk_prob: f64,
}

impl Noise<'_> {
    fn mask(&mut self, n: usize) -> Option<Array1<f64>> {
        if self.dropout <= 0.0 {
            return None;
        }
        let keep = 1.0 - self.dropout;
        Some(Array1::from_shape_fn(n, |_| if self.rng.gen_bool(keep) { 1.0 / keep } else { 0.0 }))
    }
}

/// A trained or freshly initialized parser: configuration, vocabularies,
/// lemma dictionary and parameters.
#[derive(Clone, Debug)]
pub struct Parser {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub lemmas: LemmaDictionary,
    pub params: Parameters,
    pub(crate) ids: Ids,
}

impl Parser {
    /// Builds vocabularies and the lemma dictionary from `corpus` and
    /// initializes parameters from the config seed.
    pub fn new(config: ModelConfig, corpus: &[CorpusEntry]) -> Result<Parser> {
        config.check()?;
        let vocab = Vocab::build(corpus, config.max_cross_depth);
        let lemmas = LemmaDictionary::from_corpus(corpus);
        let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(config.seed);
        let params = init_parameters(&config, &vocab, &mut rng);
        Parser::from_parts(config, vocab, lemmas, params)
    }

    pub fn from_parts(
        config: ModelConfig,
        vocab: Vocab,
        lemmas: LemmaDictionary,
        params: Parameters,
    ) -> Result<Parser> {
        let ids = Ids::resolve(&params, &config)?;
        let expected = init_parameters(&config, &vocab, &mut <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0));
        for id in expected.ids() {
            let name = expected.name(id);
            let got = params.find(name).map(|i| params.get(i).dim());
            if got != Some(expected.get(id).dim()) {
                return Err(Error::Dimension(format!(
                    "tensor {name}: expected shape {:?}, found {:?}",
                    expected.get(id).dim(),
                    got
                )));
            }
        }
        Ok(Parser { config, vocab, lemmas, params, ids })
    }

    /// Copies pretrained vectors (`word v1 v2 ...` per line) into the first
    /// dimensions of known words' embeddings; returns the number of words
    /// filled.
    pub fn load_pretrained(&mut self, text: &str, max_dims: usize) -> Result<usize> {
        let table = self.params.get_mut(self.ids.word_emb);
        let dims = table.ncols().min(max_dims);
        let mut filled = 0;
        for (n, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: Vec<f64> = parts
                .map(|v| v.parse().map_err(|_| Error::Parse { line: n + 1, message: format!("bad number '{v}'") }))
                .collect::<Result<_>>()?;
            let i = self.vocab.words.get(word);
            if i == UNK {
                continue;
            }
            for (k, v) in values.into_iter().take(dims).enumerate() {
                table[[i, k]] = v;
            }
            filled += 1;
        }
        Ok(filled)
    }

    pub(crate) fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            ordering: self.config.ordering,
            emit_end_spans: self.config.emit_end_spans,
            allow_undirected: true,
        }
    }

    pub(crate) fn encode_tokens(&self, s: &Sentence) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        (
            s.tokens.iter().map(|t| self.vocab.words.get(t)).collect(),
            s.pos_tags.iter().map(|t| self.vocab.pos.get(t)).collect(),
            s.ne_tags.iter().map(|t| self.vocab.ne.get(t)).collect(),
        )
    }

    /// The gold decoder steps for an entry: delexicalize, run the oracle and
    /// replay it to record alignments and stack features.
    pub(crate) fn example(&self, entry: &CorpusEntry) -> Result<Example> {
        let delex = CorpusEntry::new(entry.sentence.clone(), delexicalize(&entry.graph).graph);
        let actions = oracle(&delex, &self.oracle_config())?;
        let (words, pos, ne) = self.encode_tokens(&entry.sentence);
        let mut steps = Vec::with_capacity(actions.len());
        let mut state: Option<ParserState> = None;
        for a in &actions {
            let symbol = self
                .vocab
                .symbol_of(a)
                .ok_or_else(|| Error::Oracle(format!("action {a} has no output symbol in the vocabulary")))?;
            let start_of = |s: &ParserState, n: crate::graph::NodeId| s.nodes[n.0].alignment.start;
            let st0_before = state.as_ref().and_then(|s| s.top().map(|t| start_of(s, t)));
            let mut end = None;
            match &mut state {
                None => match a {
                    Action::Shift { start, predicate, constant } => {
                        state = Some(ParserState::initial(*start, predicate.clone(), constant.clone()))
                    }
                    _ => return Err(Error::Oracle(format!("sequence starts with {a}"))),
                },
                Some(s) => {
                    if let Action::Reduce { end: Some(e) } = a {
                        let t = s.reduce_target().ok_or_else(|| Error::Oracle("reduce without target".into()))?;
                        end = Some((*e, start_of(s, t)));
                    }
                    s.apply(a)?;
                }
            }
            let s = state.as_ref().expect("initialized by the first action");
            let align = match s.buffer {
                Some(b) => start_of(s, b),
                None => s.nodes.last().map(|n| n.alignment.start).unwrap_or(0),
            };
            let st0_after = s.top().map(|t| start_of(s, t));
            steps.push(Step { symbol, align, end, st0_before, st0_after });
        }
        Ok(Example { words, pos, ne, steps })
    }

    /// Builds the summed loss of a gold sequence on `tape`.
    pub(crate) fn sequence_loss(&self, tape: &mut Tape, ex: &Example, noise: Option<&mut Noise>) -> Var {
        self.sequence_loss_traced(tape, ex, noise, None)
    }

    /// As [`Parser::sequence_loss`], also collecting each step's transition
    /// logits.
    pub(crate) fn sequence_loss_traced(
        &self,
        tape: &mut Tape,
        ex: &Example,
        mut noise: Option<&mut Noise>,
        mut trace: Option<&mut Vec<Var>>,
    ) -> Var {
        let ids = &self.ids;
        let h = self.config.hidden_dim;
        let variant = self.config.decoder_variant;
        let aw = self.config.alignment_weight;
        let dropout = |tape: &mut Tape, x: Var, noise: &mut Option<&mut Noise>| -> Var {
            match noise.as_mut().and_then(|n| n.mask(tape.value(x).len())) {
                Some(m) => tape.mask(x, m),
                None => x,
            }
        };
        // Encoder.
        let n = ex.words.len();
        let mut inputs = Vec::with_capacity(n);
        for i in 0..n {
            let mut w = ex.words[i];
            if let Some(nz) = noise.as_mut() {
                if self.vocab.singletons.contains(&w) && nz.rng.gen_bool(nz.unk_prob) {
                    w = UNK;
                }
            }
            let parts = [tape.row(ids.word_emb, w), tape.row(ids.pos_emb, ex.pos[i]), tape.row(ids.ne_emb, ex.ne[i])];
            let x = tape.concat(&parts);
            let g = tape.linear(&[(ids.wx, x)], Some(ids.bx));
            inputs.push(dropout(tape, g, &mut noise));
        }
        let zero = tape.input(Array1::zeros(h));
        let mut fwd = Vec::with_capacity(n);
        let (mut hs, mut cs) = (zero, zero);
        for &g in &inputs {
            (hs, cs) = tape.lstm(g, hs, cs, ids.fwd.w, ids.fwd.u, ids.fwd.b);
            fwd.push(hs);
        }
        let mut bwd = vec![zero; n];
        let (mut hb, mut cb) = (zero, zero);
        for i in (0..n).rev() {
            (hb, cb) = tape.lstm(inputs[i], hb, cb, ids.bwd.w, ids.bwd.u, ids.bwd.b);
            bwd[i] = hb;
        }
        let enc: Vec<Var> = (0..n)
            .map(|i| {
                let hi = tape.concat(&[fwd[i], bwd[i]]);
                dropout(tape, hi, &mut noise)
            })
            .collect();
        let keys: Vec<Var> = enc.iter().map(|&x| tape.linear(&[(ids.align.w1, x)], None)).collect();
        let end_keys: Vec<Var> = match ids.end {
            Some(e) => enc.iter().map(|&x| tape.linear(&[(e.w1, x)], None)).collect(),
            None => Vec::new(),
        };
        // Decoder, starting from the final backward state.
        let (mut sh, mut sc) = (hb, cb);
        let mut losses = Vec::with_capacity(3 * ex.steps.len());
        for (j, st) in ex.steps.iter().enumerate() {
            let sd = dropout(tape, sh, &mut noise);
            let q = tape.linear(&[(ids.align.w2, sd)], None);
            let u = tape.pointer(&keys, q, ids.align.w);
            let ctx = if variant == DecoderVariant::Soft {
                let alpha = tape.softmax(u);
                tape.weighted_sum(alpha, &enc)
            } else {
                losses.push(tape.cross_entropy(u, st.align, 0, aw));
                enc[st.align]
            };
            let mut terms = vec![(ids.w3, sd), (ids.w4, ctx)];
            if let (Some(w7), Some(t)) = (ids.w7, st.st0_before) {
                terms.push((w7, enc[t]));
            }
            let o = tape.linear(&terms, None);
            let v = tape.linear(&[(ids.r, o)], Some(ids.bd));
            if let Some(t) = trace.as_mut() {
                t.push(v);
            }
            losses.push(tape.cross_entropy(v, st.symbol, 0, 1.0));
            if let (Some(e), Some((end, start))) = (ids.end, st.end) {
                let qe = tape.linear(&[(e.w2, sd)], None);
                let ue = tape.pointer(&end_keys, qe, e.w);
                losses.push(tape.cross_entropy(ue, end, start, aw));
            }
            if j + 1 < ex.steps.len() {
                let emb = tape.row(ids.sym_emb, st.symbol);
                let mut terms = vec![(ids.w5, emb), (ids.w6, ctx)];
                if let (Some(w8), Some(t)) = (ids.w8, st.st0_after) {
                    terms.push((w8, enc[t]));
                }
                let d = tape.linear(&terms, None);
                let d = dropout(tape, d, &mut noise);
                (sh, sc) = tape.lstm(d, sh, sc, ids.dec.w, ids.dec.u, ids.dec.b);
            }
        }
        tape.sum(&losses)
    }

    /// Loss of the gold sequence for `entry` without dropout.
    pub fn loss(&self, entry: &CorpusEntry) -> Result<f64> {
        let ex = self.example(entry)?;
        let mut tape = Tape::new(&self.params);
        let l = self.sequence_loss(&mut tape, &ex, None);
        Ok(tape.scalar(l))
    }

    fn sidecar(path: &Path, ext: &str) -> PathBuf {
        let mut s = path.as_os_str().to_os_string();
        s.push(ext);
        PathBuf::from(s)
    }

    /// Writes the checkpoint to `path` and the vocabulary and lemma
    /// dictionary to `path.vocab` and `path.lemmas`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = BufWriter::new(File::create(path)?);
        self.write_checkpoint(&mut w)?;
        w.flush()?;
        self.vocab.save(Self::sidecar(path, ".vocab"))?;
        self.lemmas.save(Self::sidecar(path, ".lemmas"))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Parser> {
        let path = path.as_ref();
        let (config, params) = Self::read_checkpoint(&mut BufReader::new(File::open(path)?))?;
        let vocab = Vocab::load(Self::sidecar(path, ".vocab"))?;
        let lemmas = LemmaDictionary::load(Self::sidecar(path, ".lemmas"))?;
        Parser::from_parts(config, vocab, lemmas, params)
    }

    /// Header (magic, version), the config as `key=value` text, then the
    /// named tensors.
    pub fn write_checkpoint(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let config = self.config.to_text();
        w.write_all(&(config.len() as u64).to_le_bytes())?;
        w.write_all(config.as_bytes())?;
        self.params.write_tensors(w)
    }

    pub fn read_checkpoint(r: &mut impl Read) -> Result<(ModelConfig, Parameters)> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| Error::Checkpoint("file too short".into()))?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("not a parser checkpoint".into()));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v)?;
        let version = u32::from_le_bytes(v);
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let len = read_u64(r)? as usize;
        if len > 1 << 20 {
            return Err(Error::Checkpoint("config block is implausibly large".into()));
        }
        let mut text = vec![0u8; len];
        r.read_exact(&mut text)?;
        let text = String::from_utf8(text).map_err(|_| Error::Checkpoint("config is not UTF-8".into()))?;
        let config = ModelConfig::from_text(&text)?;
        let params = Parameters::read_tensors(r)?;
        Ok((config, params))
    }
}
