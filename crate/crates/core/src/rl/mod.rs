//! Advantage actor-critic agents on the gridworld: an agent that sees the
//! true machine state, one that tracks it through a learned grounder, and a
//! recurrent baseline without any machine.

mod a2c;
mod agent;
mod buffer;
mod config;
mod run;

pub use a2c::{a2c_loss, a2c_update, entropy, n_step_returns, Losses, Transition};
pub use agent::{augment_state, Networks, Output, SymbolSource, Tracker};
pub use buffer::GrounderBuffer;
pub use config::{AgentKind, TrainConfig};
pub use run::{
    returns_from_csv, run_experiment, run_seed, smooth, Experiment, RunResult, CURVE_HEADER, SUMMARY_HEADER,
};
