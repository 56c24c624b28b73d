use rand::Rng;

use crate::automata::MooreMachine;
use crate::diff::{self, Bound, Linear, Lstm, LstmState, LstmVars, Mlp, ParamSet, Tensor, Var};
use crate::error::{Error, Result};
use crate::gridworld::{GridConfig, Step, NUM_ACTIONS};
use crate::nrm::{Grounder, MachineMatrices, ProbMachine};

/// Environment encoding followed by the machine-state vector.
pub fn augment_state(state: &[f64], machine_state: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(state.len() + machine_state.len());
    v.extend_from_slice(state);
    v.extend_from_slice(machine_state);
    v
}

/// Where the symbol distribution of each visited cell comes from.
#[derive(Clone, Debug)]
pub enum SymbolSource {
    Grounder(Grounder),
    /// One-hot ground-truth labels.
    Oracle(GridConfig),
}

/// Keeps the machine-state part of the agent's observation up to date.
#[derive(Clone, Debug)]
pub enum Tracker {
    /// One-hot of the true machine state.
    Exact { machine: MooreMachine, q: usize },
    /// State distribution propagated through the machine tensors.
    Soft {
        mats: MachineMatrices,
        source: SymbolSource,
        q: Vec<f64>,
    },
    /// No machine state.
    Blind,
}

impl Tracker {
    pub fn exact(machine: &MooreMachine) -> Self {
        Tracker::Exact {
            machine: machine.clone(),
            q: machine.initial(),
        }
    }

    pub fn soft(machine: &MooreMachine, source: SymbolSource) -> Result<Self> {
        let mats = MachineMatrices::new(&ProbMachine::from_machine(machine))?;
        let q = mats.initial.clone();
        Ok(Tracker::Soft { mats, source, q })
    }

    pub fn reset(&mut self) {
        match self {
            Tracker::Exact { machine, q } => *q = machine.initial(),
            Tracker::Soft { mats, q, .. } => *q = mats.initial.clone(),
            Tracker::Blind => {}
        }
    }

    pub fn observe(&mut self, step: &Step) -> Result<()> {
        match self {
            Tracker::Exact { machine, q } => *q = machine.next(*q, step.symbol),
            Tracker::Soft { mats, source, q } => {
                let p = match source {
                    SymbolSource::Grounder(g) => g.probs(&Tensor::from_rows(std::slice::from_ref(&step.state))?)?.into_data(),
                    SymbolSource::Oracle(config) => {
                        let mut p = vec![0.0; config.alphabet.len()];
                        p[config.label(config.decode(&step.state)?)?] = 1.0;
                        p
                    }
                };
                *q = mats.step(q, &p);
            }
            Tracker::Blind => {}
        }
        Ok(())
    }

    pub fn vector(&self) -> Vec<f64> {
        match self {
            Tracker::Exact { machine, q } => {
                let mut v = vec![0.0; machine.num_states()];
                v[*q] = 1.0;
                v
            }
            Tracker::Soft { q, .. } => q.clone(),
            Tracker::Blind => Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Tracker::Exact { machine, .. } => machine.num_states(),
            Tracker::Soft { mats, .. } => mats.num_states(),
            Tracker::Blind => 0,
        }
    }

    pub fn grounder_mut(&mut self) -> Option<&mut Grounder> {
        match self {
            Tracker::Soft {
                source: SymbolSource::Grounder(g),
                ..
            } => Some(g),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
enum Body {
    Feedforward { actor: Mlp, critic: Mlp },
    Recurrent { lstm: Lstm, policy: Linear, value: Linear },
}

/// Actor and critic networks of one agent.
#[derive(Clone, Debug)]
pub struct Networks {
    pub params: ParamSet,
    body: Body,
    inputs: usize,
}

/// Outputs of one forward step.
pub struct Output<'t> {
    /// Action probabilities `[1, actions]`.
    pub probs: Var<'t>,
    /// State value `[1, 1]`.
    pub value: Var<'t>,
    pub state: Option<LstmVars<'t>>,
}

impl Networks {
    /// Separate three-layer actor and critic.
    pub fn feedforward<R: Rng + ?Sized>(inputs: usize, rng: &mut R) -> Self {
        let mut params = ParamSet::new();
        let actor = diff::actor(&mut params, inputs, NUM_ACTIONS, rng);
        let critic = diff::critic(&mut params, inputs, rng);
        Self {
            params,
            body: Body::Feedforward { actor, critic },
            inputs,
        }
    }

    /// Stacked LSTM trunk with linear policy and value heads.
    pub fn recurrent<R: Rng + ?Sized>(inputs: usize, rng: &mut R) -> Self {
        let mut params = ParamSet::new();
        let lstm = Lstm::new(&mut params, inputs, diff::LSTM_HIDDEN, diff::LSTM_LAYERS, rng);
        let policy = Linear::new(&mut params, diff::LSTM_HIDDEN, NUM_ACTIONS, rng);
        let value = Linear::new(&mut params, diff::LSTM_HIDDEN, 1, rng);
        Self {
            params,
            body: Body::Recurrent { lstm, policy, value },
            inputs,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn initial_state(&self) -> Option<LstmState> {
        match &self.body {
            Body::Feedforward { .. } => None,
            Body::Recurrent { lstm, .. } => Some(lstm.zero_state(1)),
        }
    }

    pub fn forward<'t>(&self, b: &Bound<'t>, x: Var<'t>, state: Option<&LstmVars<'t>>) -> Result<Output<'t>> {
        match &self.body {
            Body::Feedforward { actor, critic } => Ok(Output {
                probs: actor.forward(b, x)?,
                value: critic.forward(b, x)?,
                state: None,
            }),
            Body::Recurrent { lstm, policy, value } => {
                let state = state.ok_or_else(|| Error::Usage("recurrent agent needs its hidden state".into()))?;
                let (h, next) = lstm.step(b, x, state)?;
                Ok(Output {
                    probs: policy.forward(b, h)?.softmax(),
                    value: value.forward(b, h)?,
                    state: Some(next),
                })
            }
        }
    }
}
