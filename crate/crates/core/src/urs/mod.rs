//! Unremovable reasoning shortcuts: symbol renamings under which a reward
//! machine is indistinguishable from itself on every input string.
//!
//! [`find_urs`] grows one dataset of strings per candidate map and prunes
//! extensions that cannot expose a difference: once both runs are in
//! absorbing states, and when a symbol self-loops on both runs. Two brute
//! force oracles ([`urs_oracle_exact`], [`urs_oracle_bounded`]) check it.

mod engine;
mod maps;
mod oracle;
mod report;

pub use engine::{
    find_urs, find_urs_with, is_working, CandidateDataset, CandidateOutcome, DatasetEntry, UrsOptions, UrsReport,
};
pub use maps::{enumerate_maps, map_count};
pub use oracle::{urs_oracle_bounded, urs_oracle_exact};
pub use report::{report_csv, timing_csv};

pub use crate::automata::SymbolMap;

