use rand::Rng;

use crate::automata::MooreMachine;
use crate::diff::{Bound, ParamId, ParamSet, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Matrix form of a Moore machine, either fixed from a known machine or
/// learnable through softmax-relaxed logits.
///
/// `table` has shape `[symbols, states, states]`: row `q` of slice `p` is
/// the distribution of the next state after reading `p` in `q`. `rewards`
/// has shape `[states, classes]`.
#[derive(Clone, Debug)]
pub struct ProbMachine {
    pub alphabet: Vec<String>,
    pub classes: Vec<i64>,
    pub params: ParamSet,
    pub table: ParamId,
    pub rewards: ParamId,
    pub initial: usize,
    /// Exact one-hot tensors that are never trained or relaxed.
    pub frozen: bool,
    pub tau: f64,
}

impl ProbMachine {
    /// One-hot encoding of a known machine.
    pub fn from_machine(m: &MooreMachine) -> Self {
        let (p, q, r) = (m.num_symbols(), m.num_states(), m.output_classes().len());
        let mut table = Tensor::zeros(&[p, q, q]);
        for s in 0..p {
            for from in 0..q {
                table.data_mut()[(s * q + from) * q + m.next(from, s)] = 1.0;
            }
        }
        let mut rewards = Tensor::zeros(&[q, r]);
        for from in 0..q {
            rewards.data_mut()[from * r + m.output(from)] = 1.0;
        }
        let mut params = ParamSet::new();
        let table = params.push(table);
        let rewards = params.push(rewards);
        Self {
            alphabet: m.alphabet().to_vec(),
            classes: m.output_classes().to_vec(),
            params,
            table,
            rewards,
            initial: m.initial(),
            frozen: true,
            tau: 1.0,
        }
    }

    /// Random logits for a machine with `states` states.
    pub fn learnable<R: Rng + ?Sized>(alphabet: Vec<String>, classes: Vec<i64>, states: usize, rng: &mut R) -> Result<Self> {
        if alphabet.is_empty() || classes.is_empty() || states == 0 {
            return Err(Error::input("learnable machine needs symbols, classes and states"));
        }
        let (p, q, r) = (alphabet.len(), states, classes.len());
        let mut params = ParamSet::new();
        let table = params.push(Tensor::uniform(&[p, q, q], INIT_SPREAD, rng));
        let rewards = params.push(Tensor::uniform(&[q, r], INIT_SPREAD, rng));
        Ok(Self {
            alphabet,
            classes,
            params,
            table,
            rewards,
            initial: 0,
            frozen: false,
            tau: 1.0,
        })
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn num_states(&self) -> usize {
        self.params.get(self.rewards).shape()[0]
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn initial_row(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.num_states()];
        v[self.initial] = 1.0;
        v
    }

    /// Records the transition and reward tensors on `tape`, relaxed by the
    /// temperature softmax unless frozen.
    pub fn bind<'t>(&self, tape: &'t Tape) -> Result<MachineVars<'t>> {
        if self.frozen {
            let b = self.params.bind_frozen(tape);
            return Ok(MachineVars {
                table: b.get(self.table),
                rewards: b.get(self.rewards),
                bound: b,
            });
        }
        let b = self.params.bind(tape);
        Ok(MachineVars {
            table: b.get(self.table).tau_softmax(self.tau)?,
            rewards: b.get(self.rewards).tau_softmax(self.tau)?,
            bound: b,
        })
    }

    /// Transition and reward tensors as used by the forward pass.
    pub fn processed(&self) -> Result<(Tensor, Tensor)> {
        let tape = Tape::new();
        let v = self.bind(&tape)?;
        let out = (v.table.value().clone(), v.rewards.value().clone());
        Ok(out)
    }

    /// Discretizes by row-wise argmax (lowest index on ties).
    pub fn extract_machine(&self) -> Result<MooreMachine> {
        let (table, rewards) = self.processed()?;
        let (p, q) = (self.num_symbols(), self.num_states());
        let next = table.argmax_rows();
        let transitions = (0..q).map(|from| (0..p).map(|s| next[s * q + from]).collect()).collect();
        MooreMachine::new(
            self.alphabet.clone(),
            self.classes.clone(),
            self.initial,
            transitions,
            rewards.argmax_rows(),
        )
    }
}

const INIT_SPREAD: f64 = 0.5;

/// Tape handles for a bound [`ProbMachine`].
pub struct MachineVars<'t> {
    pub table: Var<'t>,
    pub rewards: Var<'t>,
    pub bound: Bound<'t>,
}

/// Untaped state propagation with precomputed tensors.
#[derive(Clone, Debug)]
pub struct MachineMatrices {
    pub table: Tensor,
    pub rewards: Tensor,
    pub initial: Vec<f64>,
}

impl MachineMatrices {
    pub fn new(m: &ProbMachine) -> Result<Self> {
        let (table, rewards) = m.processed()?;
        Ok(Self {
            table,
            rewards,
            initial: m.initial_row(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.initial.len()
    }

    /// `sum_i symbols[i] * (state · table[i])`.
    pub fn step(&self, state: &[f64], symbols: &[f64]) -> Vec<f64> {
        let q = state.len();
        let td = self.table.data();
        let mut out = vec![0.0; q];
        for (i, &w) in symbols.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (k, &s) in state.iter().enumerate() {
                let c = w * s;
                if c == 0.0 {
                    continue;
                }
                for (o, t) in out.iter_mut().zip(&td[(i * q + k) * q..(i * q + k + 1) * q]) {
                    *o += c * t;
                }
            }
        }
        out
    }

    pub fn reward_probs(&self, state: &[f64]) -> Vec<f64> {
        let r = self.rewards.cols();
        let mut out = vec![0.0; r];
        for (k, &s) in state.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(self.rewards.row(k)) {
                *o += s * v;
            }
        }
        out
    }
}
