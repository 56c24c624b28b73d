//! Small reverse-mode differentiation kernel over dense `f64` arrays.
//!
//! A [`Tape`] records each operation with its output; [`Tape::backward`]
//! sweeps the records in reverse. Values are addressed through copyable
//! [`Var`] handles tied to the tape's lifetime. Trainable tensors live in a
//! [`ParamSet`] and are bound to a fresh tape for every forward pass.

mod gradcheck;
mod nn;
mod optim;
mod params;
mod tape;
mod tensor;

pub use gradcheck::{max_rel_error, REL_FLOOR, STEP};
pub use nn::{
    actor, critic, dropout, grounder, Activation, Linear, Lstm, LstmState, LstmVars, Mlp, HIDDEN, LSTM_HIDDEN,
    LSTM_LAYERS,
};
pub use optim::{clip_global_norm, Adam, DEFAULT_LR};
pub use params::{Bound, ParamId, ParamSet};
pub use tape::{Grads, Tape, Var, LOG_FLOOR};
pub use tensor::{argmax, Tensor, MAX_AXES};
