use rand::Rng;

use crate::automata::MooreMachine;
use crate::error::{Error, Result};

use super::config::GridConfig;
use super::env::{Action, GridWorld, Planner};
use super::trace::EpisodeTrace;

/// Behaviour used to generate synthetic episodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Policy {
    /// Uniform random actions.
    Random,
    /// Shortest-path actions, replaced by a random one with probability `eps`.
    EpsOptimal(f64),
    /// Each episode is random or eps-optimal with equal probability.
    Mixture(f64),
}

pub const DEFAULT_EPS: f64 = 0.2;

impl Policy {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "random" => Ok(Policy::Random),
            "eps-optimal" => Ok(Policy::EpsOptimal(DEFAULT_EPS)),
            "mixture" => Ok(Policy::Mixture(DEFAULT_EPS)),
            other => Err(Error::input(format!("unknown policy `{other}` (random, eps-optimal, mixture)"))),
        }
    }
}

/// Runs one episode with `choose` picking actions until the environment is done.
pub fn rollout<F>(env: &mut GridWorld, mut choose: F) -> Result<EpisodeTrace>
where
    F: FnMut(&GridWorld) -> Action,
{
    env.reset();
    let mut tr = EpisodeTrace::default();
    while !env.is_done() {
        let a = choose(env);
        let s = env.step(a)?;
        tr.states.push(s.state);
        tr.classes.push(s.class);
        tr.rewards.push(s.reward);
        tr.symbols.push(s.symbol);
    }
    Ok(tr)
}

/// Shortest successful episode from the start cell.
pub fn optimal_trace(config: &GridConfig, machine: &MooreMachine) -> Result<EpisodeTrace> {
    let planner = Planner::new(config, machine)?;
    let mut env = GridWorld::new(config.clone(), machine.clone())?;
    rollout(&mut env, |w| {
        planner
            .best_action(w.config(), w.machine(), w.cell(), w.machine_state())
            .expect("planner covers every state on an optimal path")
    })
}

/// `n` episodes generated with `policy`.
pub fn synth_dataset<R: Rng + ?Sized>(
    config: &GridConfig,
    machine: &MooreMachine,
    policy: Policy,
    n: usize,
    rng: &mut R,
) -> Result<Vec<EpisodeTrace>> {
    let planner = Planner::new(config, machine)?;
    let mut env = GridWorld::new(config.clone(), machine.clone())?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let eps = match policy {
            Policy::Random => 1.0,
            Policy::EpsOptimal(e) => e,
            Policy::Mixture(e) => {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    e
                }
            }
        };
        let tr = rollout(&mut env, |w| {
            let greedy = planner.best_action(w.config(), w.machine(), w.cell(), w.machine_state());
            match greedy {
                Some(a) if rng.gen::<f64>() >= eps => a,
                _ => Action::ALL[rng.gen_range(0..Action::ALL.len())],
            }
        })?;
        out.push(tr);
    }
    Ok(out)
}
