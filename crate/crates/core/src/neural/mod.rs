//! Encoder-decoder transition parser: a bidirectional LSTM encoder and an
//! LSTM decoder predicting transitions with pointer-network alignments, in
//! soft-attention, hard-attention and stack-feature variants.

mod decode;
mod gradcheck;
mod model;
pub mod params;
mod tape;
mod train;
pub mod vocab;

use std::fmt;
use std::str::FromStr;

pub use decode::{lstm_step, pointer_logits, DecodeOutput};
pub use gradcheck::{gradient_check, GradientCheckReport};
pub use model::Parser;
pub use params::{Adam, Gradients, ParamId, Parameters};
pub use tape::masked_softmax;
pub use train::{train, EpochSummary, TrainLog, TrainLogRow};
pub use vocab::{Symbol, Vocab};

use crate::error::{Error, Result};
use crate::transition::Ordering;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DecoderVariant {
    /// Attention weights average the encoder states; alignments are not
    /// supervised.
    Soft,
    /// Supervised pointer alignment selects one encoder state.
    Hard,
    /// Hard attention plus stack-top and buffer encoder features.
    #[default]
    Stack,
}

impl DecoderVariant {
    pub const ALL: [DecoderVariant; 3] = [DecoderVariant::Soft, DecoderVariant::Hard, DecoderVariant::Stack];
}

impl fmt::Display for DecoderVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderVariant::Soft => "soft",
            DecoderVariant::Hard => "hard",
            DecoderVariant::Stack => "stack",
        })
    }
}

impl FromStr for DecoderVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "soft" => Ok(DecoderVariant::Soft),
            "hard" => Ok(DecoderVariant::Hard),
            "stack" => Ok(DecoderVariant::Stack),
            _ => Err(format!("unknown decoder variant '{s}' (expected soft, hard or stack)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub word_emb_dim: usize,
    pub pos_emb_dim: usize,
    pub ne_emb_dim: usize,
    pub hidden_dim: usize,
    pub decoder_emb_dim: usize,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub grad_clip_norm: f64,
    pub singleton_unk_prob: f64,
    pub seed: u64,
    pub decoder_variant: DecoderVariant,
    pub emit_end_spans: bool,
    /// Weight of the alignment and end-span terms relative to the
    /// transition term.
    pub alignment_weight: f64,
    pub ordering: Ordering,
    /// Deepest cross-arc with its own output symbols.
    pub max_cross_depth: usize,
    /// Half-width of the uniform initialization.
    pub init_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_emb_dim: 256,
            pos_emb_dim: 32,
            ne_emb_dim: 32,
            hidden_dim: 256,
            decoder_emb_dim: 256,
            dropout_rate: 0.3,
            learning_rate: 0.01,
            batch_size: 64,
            grad_clip_norm: 5.0,
            singleton_unk_prob: 0.5,
            seed: 1,
            decoder_variant: DecoderVariant::Stack,
            emit_end_spans: true,
            alignment_weight: 1.0,
            ordering: Ordering::InOrder,
            max_cross_depth: 8,
            init_scale: 0.08,
        }
    }
}

fn ordering_name(o: Ordering) -> &'static str {
    match o {
        Ordering::InOrder => "in_order",
        Ordering::Monotone => "monotone",
    }
}

impl ModelConfig {
    /// A small configuration for tests and gradient checks.
    pub fn tiny(variant: DecoderVariant) -> ModelConfig {
        ModelConfig {
            word_emb_dim: 6,
            pos_emb_dim: 3,
            ne_emb_dim: 2,
            hidden_dim: 8,
            decoder_emb_dim: 5,
            dropout_rate: 0.0,
            decoder_variant: variant,
            max_cross_depth: 3,
            init_scale: 0.5,
            ..ModelConfig::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        let dims = [
            ("word_emb_dim", self.word_emb_dim),
            ("pos_emb_dim", self.pos_emb_dim),
            ("ne_emb_dim", self.ne_emb_dim),
            ("hidden_dim", self.hidden_dim),
            ("decoder_emb_dim", self.decoder_emb_dim),
            ("batch_size", self.batch_size),
            ("max_cross_depth", self.max_cross_depth),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        for (name, p) in [("dropout_rate", self.dropout_rate), ("singleton_unk_prob", self.singleton_unk_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if self.dropout_rate >= 1.0 {
            return Err(Error::Config("dropout_rate must be below 1".into()));
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("grad_clip_norm", self.grad_clip_norm),
            ("alignment_weight", self.alignment_weight),
            ("init_scale", self.init_scale),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a finite non-negative number, got {v}")));
            }
        }
        Ok(())
    }

    /// Sets one field from its `key=value` spelling.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| Error::Config(format!("bad value '{value}' for {key}")))
        }
        let value = value.trim();
        match key.trim() {
            "word_emb_dim" => self.word_emb_dim = num(key, value)?,
            "pos_emb_dim" => self.pos_emb_dim = num(key, value)?,
            "ne_emb_dim" => self.ne_emb_dim = num(key, value)?,
            "hidden_dim" => self.hidden_dim = num(key, value)?,
            "decoder_emb_dim" => self.decoder_emb_dim = num(key, value)?,
            "dropout_rate" => self.dropout_rate = num(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "grad_clip_norm" => self.grad_clip_norm = num(key, value)?,
            "singleton_unk_prob" => self.singleton_unk_prob = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "decoder_variant" => self.decoder_variant = value.parse().map_err(Error::Config)?,
            "emit_end_spans" => self.emit_end_spans = num(key, value)?,
            "alignment_weight" => self.alignment_weight = num(key, value)?,
            "ordering" => self.ordering = value.parse().map_err(Error::Config)?,
            "max_cross_depth" => self.max_cross_depth = num(key, value)?,
            "init_scale" => self.init_scale = num(key, value)?,
            other => return Err(Error::Config(format!("unknown model setting '{other}'"))),
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("word_emb_dim", self.word_emb_dim.to_string()),
            ("pos_emb_dim", self.pos_emb_dim.to_string()),
            ("ne_emb_dim", self.ne_emb_dim.to_string()),
            ("hidden_dim", self.hidden_dim.to_string()),
            ("decoder_emb_dim", self.decoder_emb_dim.to_string()),
            ("dropout_rate", self.dropout_rate.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("grad_clip_norm", self.grad_clip_norm.to_string()),
            ("singleton_unk_prob", self.singleton_unk_prob.to_string()),
            ("seed", self.seed.to_string()),
            ("decoder_variant", self.decoder_variant.to_string()),
            ("emit_end_spans", self.emit_end_spans.to_string()),
            ("alignment_weight", self.alignment_weight.to_string()),
            ("ordering", ordering_name(self.ordering).to_string()),
            ("max_cross_depth", self.max_cross_depth.to_string()),
            ("init_scale", self.init_scale.to_string()),
        ]
    }

    /// `key=value` lines; floats are written in their shortest round-trip
    /// form.
    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<ModelConfig> {
        let mut c = ModelConfig::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("expected key=value, got '{line}'")))?;
            c.set(k, v)?;
        }
        c.check()?;
        Ok(c)
    }
}
