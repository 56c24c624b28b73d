//! Experiment files: TOML with a version header and sections for the task,
//! the training hyperparameters and an optional custom map.
//!
//! ```toml
//! format = "nrm-experiment 1"
//!
//! [task]
//! formula = "F(a) & F(b)"   # or: id = 1
//! agents = ["rm", "nrm", "rnn"]
//!
//! [train]
//! episodes = 3000
//! seeds = [0, 1, 2]
//!
//! [grid]
//! map = """
//! grid-map 1
//! ...
//! """
//! ```
//!
//! Every key is optional except `format`; unknown keys are errors.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gridworld::GridConfig;
use crate::rl::{AgentKind, TrainConfig};
use crate::tasks;

pub const EXPERIMENT_FORMAT: &str = "nrm-experiment 1";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format: String,
    #[serde(default)]
    task: RawTask,
    #[serde(default)]
    train: RawTrain,
    #[serde(default)]
    grid: RawGrid,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    id: Option<usize>,
    formula: Option<String>,
    agents: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    map: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrain {
    episodes: Option<usize>,
    n_step: Option<usize>,
    lr: Option<f64>,
    coef_actor: Option<f64>,
    coef_critic: Option<f64>,
    coef_entropy: Option<f64>,
    gamma: Option<f64>,
    clip_norm: Option<f64>,
    reward_scale: Option<f64>,
    grounder_period: Option<usize>,
    grounder_epochs: Option<usize>,
    grounder_lr: Option<f64>,
    grounder_hidden: Option<usize>,
    grounder_dropout: Option<f64>,
    buffer_recent: Option<usize>,
    buffer_best: Option<usize>,
    window: Option<usize>,
    seeds: Option<Vec<u64>>,
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub formula: Option<String>,
    pub agents: Vec<AgentKind>,
    pub train: TrainConfig,
    pub grid: GridConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            formula: None,
            agents: AgentKind::ALL.to_vec(),
            train: TrainConfig::default(),
            grid: GridConfig::default_map(),
        }
    }
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($field:ident),*) => {
        $(if let Some(v) = $src.$field.clone() { $dst.$field = v; })*
    };
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::input(format!("experiment file: {}", e.message())))?;
        if raw.format != EXPERIMENT_FORMAT {
            return Err(Error::input(format!(
                "experiment file: expected format = \"{EXPERIMENT_FORMAT}\", found \"{}\"",
                raw.format
            )));
        }
        let mut cfg = ExperimentConfig::default();
        cfg.formula = match (raw.task.id, raw.task.formula) {
            (Some(_), Some(_)) => return Err(Error::input("experiment file: give either task.id or task.formula")),
            (Some(id), None) => Some(tasks::task(id)?.formula.to_owned()),
            (None, f) => f,
        };
        if let Some(names) = raw.task.agents {
            cfg.agents = names.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        let t = &raw.train;
        overlay!(
            cfg.train,
            t,
            episodes,
            n_step,
            lr,
            coef_actor,
            coef_critic,
            coef_entropy,
            gamma,
            clip_norm,
            reward_scale,
            grounder_period,
            grounder_epochs,
            grounder_lr,
            grounder_hidden,
            grounder_dropout,
            buffer_recent,
            buffer_best,
            window,
            seeds
        );
        cfg.train.validate()?;
        if let Some(map) = raw.grid.map {
            cfg.grid = GridConfig::from_map_text(&map)?;
        }
        Ok(cfg)
    }
}
