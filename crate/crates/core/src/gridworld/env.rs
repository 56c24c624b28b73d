use std::collections::VecDeque;

use crate::automata::{MooreMachine, StateId, Symbol};
use crate::error::{Error, Result};

use super::config::{Cell, GridConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::input(format!("action index {i} out of range")))
    }
}

pub const NUM_ACTIONS: usize = 4;

/// Outcome of one environment step.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub state: Vec<f64>,
    pub cell: Cell,
    pub symbol: Symbol,
    pub machine_state: StateId,
    pub reward: f64,
    /// Output class index of the new machine state.
    pub class: usize,
    pub done: bool,
}

/// Gridworld whose reward comes from a shaped reward machine fed with the
/// ground-truth label of every visited cell.
#[derive(Clone, Debug)]
pub struct GridWorld {
    config: GridConfig,
    machine: MooreMachine,
    scale: f64,
    cell: Cell,
    q: StateId,
    t: usize,
    done: bool,
}

impl GridWorld {
    pub fn new(config: GridConfig, machine: MooreMachine) -> Result<Self> {
        check_alphabet(&config, &machine)?;
        let scale = reward_scale(&machine)?;
        let cell = config.start;
        let q = machine.initial();
        Ok(Self {
            config,
            machine,
            scale,
            cell,
            q,
            t: 0,
            done: false,
        })
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn machine(&self) -> &MooreMachine {
        &self.machine
    }

    pub fn cell(&self) -> Cell {
        self.cell
    }

    pub fn machine_state(&self) -> StateId {
        self.q
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn state(&self) -> Vec<f64> {
        self.config.encode(self.cell)
    }

    pub fn reset(&mut self) -> Vec<f64> {
        self.cell = self.config.start;
        self.q = self.machine.initial();
        self.t = 0;
        self.done = false;
        self.state()
    }

    pub fn step(&mut self, action: Action) -> Result<Step> {
        if self.done {
            return Err(Error::Usage("step called on a finished episode".into()));
        }
        self.cell = moved(&self.config, self.cell, action);
        let symbol = self.config.label(self.cell)?;
        let prev = self.q;
        self.q = self.machine.next(prev, symbol);
        self.t += 1;
        let reward = (self.machine.level(self.q) - self.machine.level(prev)) as f64 * self.scale;
        self.done = self.machine.is_accepting(self.q) || self.machine.is_dead(self.q) || self.t >= self.config.horizon;
        Ok(Step {
            state: self.state(),
            cell: self.cell,
            symbol,
            machine_state: self.q,
            reward,
            class: self.machine.output(self.q),
            done: self.done,
        })
    }
}

/// Reward per potential level, chosen so that reaching acceptance from the
/// initial state pays 100 in total.
pub fn reward_scale(m: &MooreMachine) -> Result<f64> {
    let gap = m.max_level() - m.level(m.initial());
    if gap <= 0 {
        return Err(Error::Spec("the initial state already has the top reward level".into()));
    }
    Ok(100.0 / gap as f64)
}

pub fn moved(config: &GridConfig, (x, y): Cell, action: Action) -> Cell {
    match action {
        Action::Up => (x, y.saturating_sub(1)),
        Action::Down => (x, (y + 1).min(config.height - 1)),
        Action::Left => (x.saturating_sub(1), y),
        Action::Right => ((x + 1).min(config.width - 1), y),
    }
}

/// Shortest-path distances to acceptance over (cell, machine state) pairs.
#[derive(Clone, Debug)]
pub struct Planner {
    states: usize,
    dist: Vec<usize>,
}

impl Planner {
    pub fn new(config: &GridConfig, machine: &MooreMachine) -> Result<Self> {
        check_alphabet(config, machine)?;
        let n = machine.num_states();
        let cells: Vec<Cell> = config.cells().collect();
        let idx = |c: Cell, q: StateId| config.cell_index(c) * n + q;
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); cells.len() * n];
        for &c in &cells {
            for q in 0..n {
                if machine.is_accepting(q) || machine.is_dead(q) {
                    continue;
                }
                for a in Action::ALL {
                    let c2 = moved(config, c, a);
                    let q2 = machine.next(q, config.label(c2)?);
                    preds[idx(c2, q2)].push(idx(c, q));
                }
            }
        }
        let mut dist = vec![usize::MAX; cells.len() * n];
        let mut queue = VecDeque::new();
        for &c in &cells {
            for q in (0..n).filter(|&q| machine.is_accepting(q)) {
                dist[idx(c, q)] = 0;
                queue.push_back(idx(c, q));
            }
        }
        while let Some(v) = queue.pop_front() {
            for &u in &preds[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        let planner = Self { states: n, dist };
        let start = planner.distance(config, config.start, machine.initial());
        match start {
            Some(d) if d <= config.horizon => Ok(planner),
            Some(d) => Err(Error::Spec(format!("task needs {d} steps but the horizon is {}", config.horizon))),
            None => Err(Error::Spec("task is unsolvable on this grid".into())),
        }
    }

    /// Steps to acceptance from `(cell, q)`, if reachable.
    pub fn distance(&self, config: &GridConfig, cell: Cell, q: StateId) -> Option<usize> {
        let d = self.dist[config.cell_index(cell) * self.states + q];
        (d != usize::MAX).then_some(d)
    }

    /// A shortest-path action; ties go to the first action in [`Action::ALL`].
    pub fn best_action(&self, config: &GridConfig, machine: &MooreMachine, cell: Cell, q: StateId) -> Option<Action> {
        let here = self.distance(config, cell, q)?;
        Action::ALL.into_iter().find(|&a| {
            let c2 = moved(config, cell, a);
            let q2 = machine.next(q, config.label(c2).unwrap());
            self.distance(config, c2, q2).is_some_and(|d| d + 1 == here)
        })
    }
}

fn check_alphabet(config: &GridConfig, machine: &MooreMachine) -> Result<()> {
    if machine.alphabet() != config.alphabet.as_slice() {
        return Err(Error::input(format!(
            "machine alphabet {:?} differs from grid alphabet {:?}",
            machine.alphabet(),
            config.alphabet
        )));
    }
    Ok(())
}
