use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::automata::MooreMachine;
use crate::diff::{Adam, LstmState, Tape, Tensor};
use crate::error::{Error, Result};
use crate::gridworld::{Action, EpisodeTrace, GridConfig, GridWorld, Planner};
use crate::nrm::{train_grounder, Grounder, GroundingConfig, ProbMachine};

use super::a2c::{a2c_update, entropy, Transition};
use super::agent::{augment_state, Networks, SymbolSource, Tracker};
use super::buffer::GrounderBuffer;
use super::config::{AgentKind, TrainConfig};

/// Learning curve of one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub agent: AgentKind,
    pub seed: u64,
    pub returns: Vec<f64>,
    /// Number of grounder training rounds (NRM only).
    pub grounder_rounds: usize,
}

/// Trailing mean over the last `window` values (fewer at the start).
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= w {
            sum -= values[i - w];
        }
        out.push(sum / (i + 1).min(w) as f64);
    }
    out
}

impl RunResult {
    /// Mean return over the last `window` episodes.
    pub fn final_mean(&self, window: usize) -> f64 {
        let n = self.returns.len();
        let tail = &self.returns[n.saturating_sub(window.max(1))..];
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }
}

/// Random streams of one run, one per component.
struct Streams {
    weights: ChaCha8Rng,
    actions: ChaCha8Rng,
    grounder: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(k);
            r
        };
        Self {
            weights: stream(1),
            actions: stream(2),
            grounder: stream(3),
        }
    }
}

/// Trains one agent with A2C for `cfg.episodes` episodes.
pub fn run_seed(config: &GridConfig, machine: &MooreMachine, agent: AgentKind, cfg: &TrainConfig, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    Planner::new(config, machine)?;
    let mut env = GridWorld::new(config.clone(), machine.clone())?;
    let mut rng = Streams::new(seed);
    let mut tracker = match agent {
        AgentKind::Rm => Tracker::exact(machine),
        AgentKind::Nrm => {
            let g = Grounder::new(
                GridConfig::STATE_DIM,
                machine.num_symbols(),
                cfg.grounder_hidden,
                cfg.grounder_dropout,
                &mut rng.grounder,
            );
            Tracker::soft(machine, SymbolSource::Grounder(g))?
        }
        AgentKind::Rnn => Tracker::Blind,
    };
    let inputs = GridConfig::STATE_DIM + tracker.width();
    let mut nets = match agent {
        AgentKind::Rnn => Networks::recurrent(inputs, &mut rng.weights),
        _ => Networks::feedforward(inputs, &mut rng.weights),
    };
    let mut opt = Adam::new(&nets.params, cfg.lr);
    let frozen = ProbMachine::from_machine(machine);
    let grounding = GroundingConfig {
        epochs: cfg.grounder_epochs,
        lr: cfg.grounder_lr,
        ..GroundingConfig::default()
    };
    let mut buffer = GrounderBuffer::new(cfg.buffer_recent, cfg.buffer_best);
    let mut result = RunResult {
        agent,
        seed,
        returns: Vec::with_capacity(cfg.episodes),
        grounder_rounds: 0,
    };

    for episode in 0..cfg.episodes {
        let mut obs = env.reset();
        tracker.reset();
        let mut hidden = nets.initial_state();
        let mut trace = EpisodeTrace::default();
        let mut done = false;
        while !done {
            let tape = Tape::new();
            let bound = nets.params.bind(&tape);
            let mut state_vars = hidden.as_ref().map(|h| h.bind(&tape));
            let mut segment = Vec::with_capacity(cfg.n_step);
            while segment.len() < cfg.n_step && !done {
                let x = tape.constant(Tensor::from_rows(&[augment_state(&obs, &tracker.vector())])?);
                let out = nets.forward(&bound, x, state_vars.as_ref())?;
                let action = {
                    let probs = out.probs.value();
                    let dist = WeightedIndex::new(probs.data()).map_err(|e| Error::input(e.to_string()))?;
                    dist.sample(&mut rng.actions)
                };
                let step = env.step(Action::from_index(action)?)?;
                tracker.observe(&step)?;
                segment.push(Transition {
                    log_prob: out.probs.ln().pick(&[action])?.sum(),
                    value: out.value,
                    entropy: entropy(out.probs)?,
                    reward: step.reward * cfg.reward_scale,
                });
                trace.states.push(step.state.clone());
                trace.classes.push(step.class);
                trace.rewards.push(step.reward);
                trace.symbols.push(step.symbol);
                state_vars = out.state;
                obs = step.state;
                done = step.done;
            }
            let bootstrap = if done {
                0.0
            } else {
                let x = tape.constant(Tensor::from_rows(&[augment_state(&obs, &tracker.vector())])?);
                let peek = nets.forward(&bound, x, state_vars.as_ref())?;
                let v = peek.value.item();
                v
            };
            hidden = state_vars.as_ref().map(LstmState::detach);
            a2c_update(&tape, &bound, &mut nets.params, &mut opt, &segment, bootstrap, cfg)?;
        }
        result.returns.push(trace.episode_return());
        if let Some(g) = tracker.grounder_mut() {
            buffer.push(trace);
            if (episode + 1) % cfg.grounder_period == 0 {
                let data: Vec<EpisodeTrace> = buffer.episodes().into_iter().cloned().collect();
                train_grounder(&frozen, g, &data, &grounding, &mut rng.grounder)?;
                result.grounder_rounds += 1;
            }
        }
    }
    Ok(result)
}

/// All seeds of one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub agent: AgentKind,
    pub window: usize,
    pub runs: Vec<RunResult>,
}

/// Runs every seed in `cfg.seeds`, at most `jobs` at a time.
pub fn run_experiment(config: &GridConfig, machine: &MooreMachine, agent: AgentKind, cfg: &TrainConfig, jobs: usize) -> Result<Experiment> {
    cfg.validate()?;
    let run = |&seed: &u64| run_seed(config, machine, agent, cfg, seed);
    let runs = if jobs <= 1 {
        cfg.seeds.iter().map(run).collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Usage(e.to_string()))?;
        pool.install(|| cfg.seeds.par_iter().map(run).collect::<Result<Vec<_>>>())?
    };
    Ok(Experiment {
        agent,
        window: cfg.window,
        runs,
    })
}

pub const CURVE_HEADER: &str = "episode,return,smoothed";
pub const SUMMARY_HEADER: &str = "agent,seed,episodes,final_smoothed,mean_return";

impl Experiment {
    /// Mean over seeds of the final smoothed return.
    pub fn final_mean(&self) -> f64 {
        self.runs.iter().map(|r| r.final_mean(self.window)).sum::<f64>() / self.runs.len().max(1) as f64
    }

    pub fn curve_csv(run: &RunResult, window: usize) -> String {
        let mut out = String::new();
        writeln!(out, "{CURVE_HEADER}").unwrap();
        for (i, (r, s)) in run.returns.iter().zip(smooth(&run.returns, window)).enumerate() {
            writeln!(out, "{},{},{}", i + 1, r, s).unwrap();
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{SUMMARY_HEADER}").unwrap();
        for r in &self.runs {
            let mean = r.returns.iter().sum::<f64>() / r.returns.len().max(1) as f64;
            writeln!(out, "{},{},{},{},{}", self.agent, r.seed, r.returns.len(), r.final_mean(self.window), mean).unwrap();
        }
        let all_mean = self.runs.iter().flat_map(|r| &r.returns).sum::<f64>()
            / self.runs.iter().map(|r| r.returns.len()).sum::<usize>().max(1) as f64;
        let episodes = self.runs.first().map_or(0, |r| r.returns.len());
        writeln!(out, "{},all,{},{},{}", self.agent, episodes, self.final_mean(), all_mean).unwrap();
        out
    }
}

/// Reads the `return` column of a curve CSV.
pub fn returns_from_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CURVE_HEADER => {}
        Some((i, h)) => return Err(Error::parse(i + 1, format!("expected header `{CURVE_HEADER}`, found `{h}`"))),
        None => return Err(Error::parse(1, "empty curve file")),
    }
    let values = lines
        .map(|(i, l)| {
            let field = l.split(',').nth(1).ok_or_else(|| Error::parse(i + 1, "missing return column"))?;
            match field.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::parse(i + 1, format!("bad return `{field}`"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::input("curve file has no episodes"));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_window() {
        assert_eq!(smooth(&[2.0, 4.0, 6.0, 8.0], 2), vec![2.0, 3.0, 5.0, 7.0]);
        assert_eq!(smooth(&[], 100), Vec::<f64>::new());
    }

    #[test]
    fn curve_csv_round_trip() {
        let run = RunResult {
            agent: AgentKind::Rm,
            seed: 0,
            returns: vec![0.0, 100.0, 100.0 / 3.0],
            grounder_rounds: 0,
        };
        let text = Experiment::curve_csv(&run, 100);
        assert_eq!(returns_from_csv(&text).unwrap(), run.returns);
        assert!(returns_from_csv(CURVE_HEADER).is_err());
    }
}
