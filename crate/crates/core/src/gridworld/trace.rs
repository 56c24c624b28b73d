use std::fmt::Write as _;

use crate::automata::{MooreMachine, Symbol};
use crate::error::{Error, Result};

use super::env::reward_scale;

/// One recorded episode. All sequences are indexed by step `t = 1..=T`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeTrace {
    /// State encoding after each step.
    pub states: Vec<Vec<f64>>,
    /// Output class index of the reward machine after each step.
    pub classes: Vec<usize>,
    pub rewards: Vec<f64>,
    /// Ground-truth symbols, kept for diagnostics; may be empty.
    pub symbols: Vec<Symbol>,
}

impl EpisodeTrace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn episode_return(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn check(&self) -> Result<()> {
        let t = self.states.len();
        if self.classes.len() != t || self.rewards.len() != t || !(self.symbols.is_empty() || self.symbols.len() == t) {
            return Err(Error::input("trace sequences have different lengths"));
        }
        Ok(())
    }
}

/// Recovers the per-step output classes from scalar rewards by summing the
/// level changes they encode.
pub fn classes_from_rewards(m: &MooreMachine, rewards: &[f64]) -> Result<Vec<usize>> {
    let scale = reward_scale(m)?;
    let mut level = m.level(m.initial()) as f64;
    rewards
        .iter()
        .map(|r| {
            level += r / scale;
            let nearest = level.round();
            if (level - nearest).abs() > 1e-6 {
                return Err(Error::input(format!("reward {r} is not a whole number of levels")));
            }
            level = nearest;
            m.output_classes()
                .binary_search(&(nearest as i64))
                .map_err(|_| Error::input(format!("level {nearest} is not an output class")))
        })
        .collect()
}

pub const TRACE_HEADER: &str = "episode,t,x,y,reward_class,reward";

/// One row per step; `t` starts at 1 and classes are output class indices.
pub fn traces_to_csv(traces: &[EpisodeTrace]) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{TRACE_HEADER}").unwrap();
    for (e, tr) in traces.iter().enumerate() {
        tr.check()?;
        for t in 0..tr.len() {
            let s = &tr.states[t];
            if s.len() != 2 {
                return Err(Error::input("trace CSV holds two-coordinate states only"));
            }
            writeln!(out, "{e},{},{},{},{},{}", t + 1, s[0], s[1], tr.classes[t], tr.rewards[t]).unwrap();
        }
    }
    Ok(out)
}

pub fn traces_from_csv(text: &str) -> Result<Vec<EpisodeTrace>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        Some((i, h)) => return Err(Error::parse(i + 1, format!("expected header `{TRACE_HEADER}`, found `{h}`"))),
        None => return Err(Error::parse(1, "empty trace file")),
    }
    let mut traces: Vec<EpisodeTrace> = Vec::new();
    let mut current: Option<usize> = None;
    for (i, line) in lines {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(Error::parse(n, format!("expected 6 fields, found {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(n, format!("bad integer `{s}`")));
        let num = |s: &str| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::parse(n, format!("bad number `{s}`"))),
        };
        let (episode, t) = (int(f[0])?, int(f[1])?);
        if current != Some(episode) {
            if current.is_some_and(|c| episode <= c) {
                return Err(Error::parse(n, "episodes must appear in increasing order"));
            }
            current = Some(episode);
            traces.push(EpisodeTrace::default());
        }
        let tr = traces.last_mut().unwrap();
        if t != tr.len() + 1 {
            return Err(Error::parse(n, format!("expected step {}, found {t}", tr.len() + 1)));
        }
        tr.states.push(vec![num(f[2])?, num(f[3])?]);
        tr.classes.push(int(f[4])?);
        tr.rewards.push(num(f[5])?);
    }
    Ok(traces)
}
