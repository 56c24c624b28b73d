//! Exact Moore machines: string semantics, relabeling, product,
//! minimization, equivalence, reward shaping and the text formats.

mod format;
mod machine;
mod random;
mod symbol_map;

pub use format::{deserialize, export_dot, serialize, FORMAT_HEADER};
pub use machine::{MooreMachine, Run, StateId, Symbol, DEAD_LEVEL};
pub use random::random_machine;
pub use symbol_map::SymbolMap;
