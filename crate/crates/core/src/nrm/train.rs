use rand::seq::SliceRandom;
use rand::Rng;

use crate::diff::{clip_global_norm, Adam, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::gridworld::EpisodeTrace;

use super::grounder::Grounder;
use super::machine::{MachineMatrices, MachineVars, ProbMachine};

/// Per-step probability sequences of one forward pass, one row per step.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbTraces {
    pub symbols: Tensor,
    pub states: Tensor,
    pub rewards: Tensor,
}

/// Forward pass driven by given symbol distributions `[T, symbols]`.
pub fn forward_symbols(m: &ProbMachine, symbols: &Tensor) -> Result<ProbTraces> {
    if symbols.shape().len() != 2 || symbols.cols() != m.num_symbols() {
        return Err(Error::input(format!(
            "expected [T, {}] symbol distributions, got {:?}",
            m.num_symbols(),
            symbols.shape()
        )));
    }
    if symbols.rows() == 0 {
        return Err(Error::input("empty state sequence"));
    }
    let mats = MachineMatrices::new(m)?;
    let mut q = mats.initial.clone();
    let mut states = Vec::with_capacity(symbols.rows() * q.len());
    let mut rewards = Vec::new();
    for t in 0..symbols.rows() {
        q = mats.step(&q, symbols.row(t));
        rewards.extend(mats.reward_probs(&q));
        states.extend_from_slice(&q);
    }
    let t = symbols.rows();
    Ok(ProbTraces {
        symbols: symbols.clone(),
        states: Tensor::new(&[t, m.num_states()], states)?,
        rewards: Tensor::new(&[t, m.num_classes()], rewards)?,
    })
}

/// Forward pass with symbol distributions from the grounder.
pub fn forward(m: &ProbMachine, g: &Grounder, states: &Tensor) -> Result<ProbTraces> {
    if g.symbols() != m.num_symbols() {
        return Err(Error::input("grounder and machine disagree on the number of symbols"));
    }
    forward_symbols(m, &g.probs(states)?)
}

pub(crate) fn trace_inputs(tr: &EpisodeTrace) -> Result<Tensor> {
    Tensor::from_rows(&tr.states)
}

/// Mean per-step cross-entropy between predicted reward classes and the
/// recorded ones.
pub fn sg_loss(m: &ProbMachine, g: &Grounder, tr: &EpisodeTrace) -> Result<f64> {
    tr.check()?;
    let out = forward(m, g, &trace_inputs(tr)?)?;
    Ok(cross_entropy(&out.rewards, &tr.classes))
}

fn cross_entropy(probs: &Tensor, targets: &[usize]) -> f64 {
    let total: f64 = targets
        .iter()
        .enumerate()
        .map(|(t, &c)| -probs.row(t)[c].max(crate::diff::LOG_FLOOR).ln())
        .sum();
    total / targets.len().max(1) as f64
}

/// Mean per-step loss over a dataset. With `grounder = None` the trace
/// states are taken to be symbol distributions already.
pub fn dataset_loss(m: &ProbMachine, g: Option<&Grounder>, data: &[EpisodeTrace]) -> Result<f64> {
    let mut total = 0.0;
    let mut steps = 0;
    for tr in data.iter().filter(|t| !t.is_empty()) {
        tr.check()?;
        let x = trace_inputs(tr)?;
        let out = match g {
            Some(g) => forward(m, g, &x)?,
            None => forward_symbols(m, &x)?,
        };
        total += cross_entropy(&out.rewards, &tr.classes) * tr.len() as f64;
        steps += tr.len();
    }
    if steps == 0 {
        return Err(Error::input("dataset has no steps"));
    }
    Ok(total / steps as f64)
}

/// Episodes padded to a common length, stored time-major.
pub(crate) struct Batch {
    pub len: usize,
    pub size: usize,
    /// `[len * size, dim]`, row `t * size + b`.
    pub inputs: Tensor,
    pub targets: Vec<Vec<usize>>,
    pub masks: Vec<Tensor>,
    pub steps: usize,
}

impl Batch {
    pub fn new(traces: &[&EpisodeTrace]) -> Result<Self> {
        let size = traces.len();
        let len = traces.iter().map(|t| t.len()).max().unwrap_or(0);
        let dim = traces
            .iter()
            .find_map(|t| t.states.first().map(Vec::len))
            .ok_or_else(|| Error::input("batch has no steps"))?;
        let mut inputs = vec![0.0; len * size * dim];
        let mut targets = vec![vec![0; size]; len];
        let mut masks = vec![vec![0.0; size]; len];
        for (b, tr) in traces.iter().enumerate() {
            tr.check()?;
            for t in 0..tr.len() {
                if tr.states[t].len() != dim {
                    return Err(Error::input("state encodings have different sizes"));
                }
                let row = (t * size + b) * dim;
                inputs[row..row + dim].copy_from_slice(&tr.states[t]);
                targets[t][b] = tr.classes[t];
                masks[t][b] = 1.0;
            }
        }
        Ok(Self {
            len,
            size,
            inputs: Tensor::new(&[len * size, dim], inputs)?,
            targets,
            masks: masks.into_iter().map(Tensor::vector).collect(),
            steps: traces.iter().map(|t| t.len()).sum(),
        })
    }
}

/// Recorded mean loss of a padded batch given per-step symbol
/// distributions `[len * size, symbols]`.
pub(crate) fn batch_loss<'t>(tape: &'t Tape, mv: &MachineVars<'t>, m: &ProbMachine, symbols: Var<'t>, batch: &Batch) -> Result<Var<'t>> {
    let q0: Vec<Vec<f64>> = vec![m.initial_row(); batch.size];
    let mut q = tape.constant(Tensor::from_rows(&q0)?);
    let mut total: Option<Var<'t>> = None;
    for t in 0..batch.len {
        let p = symbols.slice_rows(t * batch.size, batch.size)?;
        q = q.transition(p, mv.table)?;
        let r = q.matmul(mv.rewards)?;
        let step = r.pick(&batch.targets[t])?.ln().mul_const(&batch.masks[t])?.sum();
        total = Some(match total {
            None => step,
            Some(acc) => acc.add(step)?,
        });
    }
    let total = total.ok_or_else(|| Error::input("batch has no steps"))?;
    Ok(total.scale(-1.0 / batch.steps as f64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Stop once the best loss improved by less than `min_delta` over this
    /// many epochs.
    pub patience: usize,
    pub min_delta: f64,
    pub clip_norm: f64,
}

impl Default for GroundingConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            lr: 5e-3,
            patience: 5,
            min_delta: 1e-5,
            clip_norm: 5.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    /// Mean training loss per completed epoch.
    pub losses: Vec<f64>,
    pub stopped_early: bool,
}

fn plateaued(losses: &[f64], patience: usize, min_delta: f64) -> bool {
    if patience == 0 || losses.len() <= patience {
        return false;
    }
    let split = losses.len() - patience;
    let before = losses[..split].iter().copied().fold(f64::INFINITY, f64::min);
    let recent = losses[split..].iter().copied().fold(f64::INFINITY, f64::min);
    before - recent < min_delta
}

fn minibatches<'a, R: Rng + ?Sized>(data: &[&'a EpisodeTrace], size: usize, rng: &mut R) -> Vec<Vec<&'a EpisodeTrace>> {
    let mut order: Vec<&EpisodeTrace> = data.to_vec();
    order.shuffle(rng);
    order.chunks(size.max(1)).map(<[_]>::to_vec).collect()
}

/// Fits the grounder so that the frozen machine's reward predictions match
/// the recorded classes. The machine is never modified.
pub fn train_grounder<R: Rng + ?Sized>(
    m: &ProbMachine,
    g: &mut Grounder,
    data: &[EpisodeTrace],
    cfg: &GroundingConfig,
    rng: &mut R,
) -> Result<TrainLog> {
    if g.symbols() != m.num_symbols() {
        return Err(Error::input("grounder and machine disagree on the number of symbols"));
    }
    let usable: Vec<&EpisodeTrace> = data.iter().filter(|t| !t.is_empty()).collect();
    let mut log = TrainLog::default();
    if usable.is_empty() {
        return Ok(log);
    }
    let frozen = ProbMachine { frozen: true, ..m.clone() };
    let mut opt = Adam::new(&g.params, cfg.lr);
    for _ in 0..cfg.epochs {
        let mut epoch_loss = 0.0;
        let mut epoch_steps = 0;
        for chunk in minibatches(&usable, cfg.batch_size, rng) {
            let batch = Batch::new(&chunk)?;
            let tape = Tape::new();
            let b = g.bind(&tape);
            let x = tape.constant(batch.inputs.clone());
            let probs = if g.net.dropout > 0.0 {
                g.net.forward_train(&b, x, rng)?
            } else {
                g.net.forward(&b, x)?
            };
            let mv = frozen.bind(&tape)?;
            let loss = batch_loss(&tape, &mv, &frozen, probs, &batch)?;
            let grads = tape.backward(loss)?;
            let mut gs = b.grads(&grads);
            clip_global_norm(&mut gs, cfg.clip_norm);
            opt.step(&mut g.params, &gs)?;
            epoch_loss += loss.item() * batch.steps as f64;
            epoch_steps += batch.steps;
        }
        log.losses.push(epoch_loss / epoch_steps as f64);
        if plateaued(&log.losses, cfg.patience, cfg.min_delta) {
            log.stopped_early = true;
            break;
        }
    }
    Ok(log)
}

/// Trains `restarts` freshly initialised grounders on the same traces and
/// keeps the one whose reward predictions fit the data best. Only the
/// training loss is consulted, never symbol labels.
pub fn ground_offline<R: Rng + ?Sized>(
    m: &ProbMachine,
    data: &[EpisodeTrace],
    hidden: usize,
    cfg: &GroundingConfig,
    restarts: usize,
    rng: &mut R,
) -> Result<(Grounder, TrainLog)> {
    let inputs = data
        .iter()
        .find_map(|t| t.states.first())
        .map(Vec::len)
        .ok_or_else(|| Error::input("no non-empty traces to ground on"))?;
    let mut best: Option<(f64, Grounder, TrainLog)> = None;
    for _ in 0..restarts.max(1) {
        let mut g = Grounder::new(inputs, m.num_symbols(), hidden, 0.0, rng);
        let log = train_grounder(m, &mut g, data, cfg, rng)?;
        let loss = dataset_loss(m, Some(&g), data)?;
        if best.as_ref().is_none_or(|(l, _, _)| loss < *l) {
            best = Some((loss, g, log));
        }
    }
    let (_, g, log) = best.unwrap();
    Ok((g, log))
}

/// Temperature per epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauSchedule {
    Constant(f64),
    /// `max(floor, decay^k)` at epoch `k`.
    Exponential { decay: f64, floor: f64 },
}

impl TauSchedule {
    pub const DEFAULT: TauSchedule = TauSchedule::Exponential { decay: 0.97, floor: 0.05 };

    pub fn at(self, epoch: usize) -> f64 {
        match self {
            TauSchedule::Constant(t) => t,
            TauSchedule::Exponential { decay, floor } => decay.powi(epoch as i32).max(floor),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureLearningConfig {
    pub states: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub schedule: TauSchedule,
    /// Learn a grounder jointly; otherwise trace states are used as symbol
    /// distributions directly.
    pub learn_grounder: bool,
    pub grounder_hidden: usize,
    pub clip_norm: f64,
}

impl Default for PureLearningConfig {
    fn default() -> Self {
        Self {
            states: 3,
            epochs: 120,
            batch_size: 50,
            lr: 0.05,
            schedule: TauSchedule::DEFAULT,
            learn_grounder: false,
            grounder_hidden: 16,
            clip_norm: 5.0,
        }
    }
}

/// Result of [`pure_learning`].
#[derive(Clone, Debug)]
pub struct LearnedMachine {
    pub machine: ProbMachine,
    pub grounder: Option<Grounder>,
    pub log: TrainLog,
}

/// Learns transition and reward tensors (and optionally a grounder) from
/// reward-labelled traces alone, annealing the relaxation temperature.
pub fn pure_learning<R: Rng + ?Sized>(
    data: &[EpisodeTrace],
    alphabet: Vec<String>,
    classes: Vec<i64>,
    cfg: &PureLearningConfig,
    rng: &mut R,
) -> Result<LearnedMachine> {
    let usable: Vec<&EpisodeTrace> = data.iter().filter(|t| !t.is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::input("pure learning needs at least one non-empty trace"));
    }
    for tr in &usable {
        tr.check()?;
        if tr.classes.iter().any(|&c| c >= classes.len()) {
            return Err(Error::input("trace class index outside the class list"));
        }
    }
    let dim = usable[0].states[0].len();
    if !cfg.learn_grounder && dim != alphabet.len() {
        return Err(Error::input(format!(
            "states must be distributions over {} symbols without a grounder",
            alphabet.len()
        )));
    }
    let mut machine = ProbMachine::learnable(alphabet, classes, cfg.states, rng)?;
    let mut grounder = cfg
        .learn_grounder
        .then(|| Grounder::new(dim, machine.num_symbols(), cfg.grounder_hidden, 0.0, rng));
    let mut machine_opt = Adam::new(&machine.params, cfg.lr);
    let mut grounder_opt = grounder.as_ref().map(|g| Adam::new(&g.params, cfg.lr));
    let mut log = TrainLog::default();
    for epoch in 0..cfg.epochs {
        machine.tau = cfg.schedule.at(epoch);
        let mut epoch_loss = 0.0;
        let mut epoch_steps = 0;
        for chunk in minibatches(&usable, cfg.batch_size, rng) {
            let batch = Batch::new(&chunk)?;
            let tape = Tape::new();
            let x = tape.constant(batch.inputs.clone());
            let gb = grounder.as_ref().map(|g| g.bind(&tape));
            let symbols = match (&grounder, &gb) {
                (Some(g), Some(b)) => g.forward(b, x)?,
                _ => x,
            };
            let mv = machine.bind(&tape)?;
            let loss = batch_loss(&tape, &mv, &machine, symbols, &batch)?;
            let grads = tape.backward(loss)?;
            let mut mg = mv.bound.grads(&grads);
            let mut ggs = gb.as_ref().map(|b| b.grads(&grads));
            let mut all: Vec<Tensor> = mg.iter().cloned().chain(ggs.iter().flatten().cloned()).collect();
            clip_global_norm(&mut all, cfg.clip_norm);
            let split = mg.len();
            mg.clone_from_slice(&all[..split]);
            if let Some(g) = ggs.as_mut() {
                g.clone_from_slice(&all[split..]);
            }
            machine_opt.step(&mut machine.params, &mg)?;
            if let (Some(g), Some(opt), Some(gs)) = (grounder.as_mut(), grounder_opt.as_mut(), ggs.as_ref()) {
                opt.step(&mut g.params, gs)?;
            }
            epoch_loss += loss.item() * batch.steps as f64;
            epoch_steps += batch.steps;
        }
        log.losses.push(epoch_loss / epoch_steps as f64);
    }
    Ok(LearnedMachine { machine, grounder, log })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule() {
        assert_eq!(TauSchedule::DEFAULT.at(0), 1.0);
        assert!((TauSchedule::DEFAULT.at(1) - 0.97).abs() < 1e-15);
        assert_eq!(TauSchedule::DEFAULT.at(500), 0.05);
        assert_eq!(TauSchedule::Constant(0.5).at(9), 0.5);
    }

    #[test]
    fn plateau_detection() {
        assert!(!plateaued(&[1.0, 0.9, 0.8], 5, 1e-5));
        assert!(plateaued(&[1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5], 5, 1e-5));
        assert!(!plateaued(&[1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.4], 5, 1e-5));
    }
}
