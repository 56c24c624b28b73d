//! Reward Moore machines compiled from LTLf task formulas, reasoning
//! shortcut analysis, and neural reward machine agents for a
//! non-Markovian gridworld.

pub mod automata;
pub mod cli;
pub mod diff;
pub mod error;
pub mod gridworld;
pub mod ltlf;
pub mod nrm;
pub mod plot;
pub mod rl;
pub mod tasks;
pub mod urs;

pub use error::{Error, Result};
