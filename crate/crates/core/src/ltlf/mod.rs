//! Parser and compilers for the visit / sequenced-visit / avoidance LTLf
//! fragment.

mod ast;
mod compile;
mod derivative;
mod parser;

pub use ast::Formula;
pub use compile::{compile, compile_acceptor};
pub use derivative::{compile_via_derivatives, derivative_acceptor};
pub use parser::parse;

use crate::automata::MooreMachine;
use crate::error::Result;

/// Parses and compiles in one step.
pub fn compile_str(formula: &str, alphabet: &[String]) -> Result<MooreMachine> {
    compile(&parse(formula)?, alphabet)
}
