//! Neural reward machines: a Moore machine in matrix form driven by the
//! symbol distributions of a neural grounder.
//!
//! The state distribution evolves as `q(t) = sum_i p(t)[i] * (q(t-1) · T[i])`
//! and the reward-class distribution is `q(t) · R`. With a known machine the
//! tensors are exact one-hot matrices and only the grounder is trained from
//! reward classes; without one, softmax-relaxed logits are learned and later
//! discretized.

mod eval;
mod grounder;
mod machine;
mod train;

pub use eval::{corrected_accuracy, urs_corrected_accuracy};
pub use grounder::{Grounder, GROUNDER_HIDDEN};
pub use machine::{MachineMatrices, MachineVars, ProbMachine};
pub use train::{
    dataset_loss, forward, forward_symbols, ground_offline, pure_learning, sg_loss, train_grounder, GroundingConfig, LearnedMachine,
    ProbTraces, PureLearningConfig, TauSchedule, TrainLog,
};
