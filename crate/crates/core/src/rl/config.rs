use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nrm::GROUNDER_HIDDEN;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentKind {
    /// Exact machine state from the ground-truth labels.
    Rm,
    /// Machine state distribution from a learned grounder.
    Nrm,
    /// Recurrent policy with no machine.
    Rnn,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Rm, AgentKind::Nrm, AgentKind::Rnn];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Rm => "rm",
            AgentKind::Nrm => "nrm",
            AgentKind::Rnn => "rnn",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rm" => Ok(AgentKind::Rm),
            "nrm" => Ok(AgentKind::Nrm),
            "rnn" => Ok(AgentKind::Rnn),
            other => Err(Error::input(format!("unknown agent `{other}` (rm, nrm, rnn)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub episodes: usize,
    pub n_step: usize,
    pub lr: f64,
    pub coef_actor: f64,
    pub coef_critic: f64,
    pub coef_entropy: f64,
    pub gamma: f64,
    pub clip_norm: f64,
    /// Multiplier applied to environment rewards before learning.
    pub reward_scale: f64,
    pub grounder_period: usize,
    pub grounder_epochs: usize,
    pub grounder_lr: f64,
    pub grounder_hidden: usize,
    pub grounder_dropout: f64,
    pub buffer_recent: usize,
    pub buffer_best: usize,
    pub window: usize,
    pub seeds: Vec<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 10_000,
            n_step: 5,
            lr: 4e-4,
            coef_actor: 0.3,
            coef_critic: 0.5,
            coef_entropy: 1e-4,
            gamma: 0.99,
            clip_norm: 5.0,
            reward_scale: 0.01,
            grounder_period: 120,
            grounder_epochs: 100,
            grounder_lr: 5e-3,
            grounder_hidden: GROUNDER_HIDDEN,
            grounder_dropout: 0.0,
            buffer_recent: 60,
            buffer_best: 60,
            window: 100,
            seeds: vec![0, 1, 2],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive_counts = [
            ("episodes", self.episodes),
            ("n_step", self.n_step),
            ("grounder_period", self.grounder_period),
            ("window", self.window),
        ];
        for (name, v) in positive_counts {
            if v == 0 {
                return Err(Error::input(format!("{name} must be positive")));
            }
        }
        let positive_reals = [
            ("lr", self.lr),
            ("grounder_lr", self.grounder_lr),
            ("clip_norm", self.clip_norm),
            ("reward_scale", self.reward_scale),
        ];
        for (name, v) in positive_reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be positive")));
            }
        }
        for (name, v) in [
            ("coef_actor", self.coef_actor),
            ("coef_critic", self.coef_critic),
            ("coef_entropy", self.coef_entropy),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be non-negative")));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::input("gamma must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.grounder_dropout) {
            return Err(Error::input("grounder_dropout must lie in [0, 1)"));
        }
        if self.seeds.is_empty() {
            return Err(Error::input("at least one seed is required"));
        }
        Ok(())
    }
}
