//! Qualitative analysis of POMDPs under finite-memory strategies.

pub mod beliefobs;
pub mod chain;
pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod reduce;
pub mod sets;
pub mod solve;
pub mod strategy;

pub use error::{Error, Result};
