//! Transition-based parsing of sentences into aligned semantic graphs.

pub mod corpus;
pub mod delex;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod fuzz;
pub mod graph;
pub mod linearize;
pub mod neural;
pub mod transition;

pub use error::{Error, Result};
