//! Minibatch training with Adam and global-norm clipping.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{Noise, Parser};
use super::params::{Adam, Gradients};
use super::tape::Tape;
use super::ModelConfig;
use crate::corpus::CorpusEntry;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainLogRow {
    pub epoch: usize,
    pub step: usize,
    /// Mean sequence loss over the minibatch.
    pub loss: f64,
    /// Gradient norm before clipping.
    pub grad_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub rows: Vec<TrainLogRow>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,step,loss,grad_norm\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.epoch, r.step, r.loss, r.grad_norm).expect("string write");
        }
        out
    }

    /// Mean minibatch loss per epoch.
    pub fn epoch_losses(&self) -> Vec<f64> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for r in &self.rows {
            if out.len() < r.epoch {
                out.resize(r.epoch, (0.0, 0));
            }
            out[r.epoch - 1].0 += r.loss;
            out[r.epoch - 1].1 += 1;
        }
        out.into_iter().map(|(s, n)| s / n.max(1) as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    pub steps: usize,
    pub mean_loss: f64,
}

/// Builds a parser from `corpus` and trains it for up to `epochs` epochs.
/// `on_epoch` runs after every epoch and stops training by returning false.
pub fn train<F>(corpus: &[CorpusEntry], config: ModelConfig, epochs: usize, on_epoch: F) -> Result<(Parser, TrainLog)>
where
    F: FnMut(&Parser, &EpochSummary) -> bool,
{
    let mut parser = Parser::new(config, corpus)?;
    let log = parser.train(corpus, epochs, on_epoch)?;
    Ok((parser, log))
}

impl Parser {
    /// Trains in place. Single-threaded and deterministic given the config
    /// seed.
    pub fn train<F>(&mut self, corpus: &[CorpusEntry], epochs: usize, mut on_epoch: F) -> Result<TrainLog>
    where
        F: FnMut(&Parser, &EpochSummary) -> bool,
    {
        if corpus.is_empty() {
            return Err(Error::Config("training corpus is empty".into()));
        }
        let examples = corpus.iter().map(|e| self.example(e)).collect::<Result<Vec<_>>>()?;
        let config: ModelConfig = self.config.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
        let mut adam = Adam::new(&self.params, config.learning_rate);
        let mut grads = Gradients::zeros_like(&self.params);
        let mut log = TrainLog::default();
        let mut order: Vec<usize> = (0..examples.len()).collect();
        let mut step = 0;
        for epoch in 1..=epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            let mut epoch_steps = 0;
            for batch in order.chunks(config.batch_size) {
                grads.fill_zero();
                let mut total = 0.0;
                for &i in batch {
                    let mut noise =
                        Noise { rng: &mut rng, dropout: config.dropout_rate, unk_prob: config.singleton_unk_prob };
                    let mut tape = Tape::new(&self.params);
                    let l = self.sequence_loss(&mut tape, &examples[i], Some(&mut noise));
                    total += tape.scalar(l);
                    tape.backward(l, &mut grads);
                }
                step += 1;
                let loss = total / batch.len() as f64;
                if !loss.is_finite() {
                    return Err(Error::Diverged { step, loss });
                }
                grads.scale(1.0 / batch.len() as f64);
                let grad_norm = grads.clip(config.grad_clip_norm);
                if !grad_norm.is_finite() {
                    return Err(Error::Diverged { step, loss: grad_norm });
                }
                adam.update(&mut self.params, &grads);
                log.rows.push(TrainLogRow { epoch, step, loss, grad_norm });
                epoch_loss += loss;
                epoch_steps += 1;
            }
            let summary = EpochSummary { epoch, steps: epoch_steps, mean_loss: epoch_loss / epoch_steps as f64 };
            if !on_epoch(self, &summary) {
                break;
            }
        }
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_corpus, SynthConfig};
    use crate::neural::DecoderVariant;

    fn corpus() -> Vec<CorpusEntry> {
        generate_synthetic_corpus(&SynthConfig { size: 6, seed: 2, max_nodes: 5, ..SynthConfig::default() })
    }

    fn config() -> ModelConfig {
        ModelConfig { batch_size: 2, dropout_rate: 0.3, ..ModelConfig::tiny(DecoderVariant::Stack) }
    }

    #[test]
    fn same_seed_same_parameters() {
        let c = corpus();
        let (a, la) = train(&c, config(), 3, |_, _| true).unwrap();
        let (b, lb) = train(&c, config(), 3, |_, _| true).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(la, lb);
        assert_eq!(la.rows.len(), 9);
        let (d, _) = train(&c, ModelConfig { seed: 9, ..config() }, 3, |_, _| true).unwrap();
        assert_ne!(a.params, d.params);
    }

    #[test]
    fn zero_learning_rate_keeps_loss_constant() {
        let c = corpus();
        let cfg =
            ModelConfig { learning_rate: 0.0, dropout_rate: 0.0, singleton_unk_prob: 0.0, batch_size: 64, ..config() };
        let (p, log) = train(&c, cfg.clone(), 4, |_, _| true).unwrap();
        let losses = log.epoch_losses();
        assert!(losses.windows(2).all(|w| w[0] == w[1]), "{losses:?}");
        assert_eq!(p.params, Parser::new(cfg, &c).unwrap().params);
    }

    #[test]
    fn loss_decreases_and_callback_stops() {
        let c = corpus();
        let cfg = ModelConfig { dropout_rate: 0.0, learning_rate: 0.02, ..config() };
        let mut seen = 0;
        let (_, log) = train(&c, cfg, 30, |_, s| {
            seen = s.epoch;
            s.epoch < 20
        })
        .unwrap();
        assert_eq!(seen, 20);
        let losses = log.epoch_losses();
        assert_eq!(losses.len(), 20);
        assert!(losses[19] < 0.5 * losses[0], "{losses:?}");
        let csv = log.to_csv();
        assert!(csv.starts_with("epoch,step,loss,grad_norm\n1,1,"));
        assert_eq!(csv.lines().count(), 1 + 60);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let c = corpus();
        let mut p = Parser::new(config(), &c).unwrap();
        assert!(p.train(&[], 1, |_, _| true).is_err());
    }
}
