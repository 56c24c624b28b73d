//! Gridworld with non-Markovian rewards: the agent walks a small map whose
//! cells carry symbols, and a shaped reward machine reading those symbols
//! decides the reward.

mod config;
mod env;
mod synth;
mod trace;

pub use config::{Cell, GridConfig, MAP_HEADER};
pub use env::{moved, reward_scale, Action, GridWorld, Planner, Step, NUM_ACTIONS};
pub use synth::{optimal_trace, rollout, synth_dataset, Policy, DEFAULT_EPS};
pub use trace::{classes_from_rewards, traces_from_csv, traces_to_csv, EpisodeTrace, TRACE_HEADER};
