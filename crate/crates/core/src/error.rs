use std::io;

use thiserror::Error;

use crate::graph::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("entry {index}: invalid graph: {}", format_violations(.violations))]
    InvalidGraph { index: usize, violations: Vec<Violation> },

    #[error("entry {index}: invalid sentence: {message}")]
    InvalidSentence { index: usize, message: String },

    #[error("penman: {0}")]
    Penman(String),

    #[error("character span {start}..{end} overlaps no token")]
    SpanOverlapsNoToken { start: usize, end: usize },

    #[error("illegal action {action}: {reason}")]
    IllegalAction { action: String, reason: String },

    #[error("oracle failed: {0}")]
    Oracle(String),

    #[error("length mismatch: {gold} gold vs {predicted} predicted")]
    LengthMismatch { gold: usize, predicted: usize },

    #[error("graph has {nodes} nodes, over the exact matcher limit of {limit}")]
    TooManyNodes { nodes: usize, limit: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("training diverged at step {step}: loss is {loss}")]
    Diverged { step: usize, loss: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
