use std::collections::VecDeque;

use crate::gridworld::EpisodeTrace;

/// Episodes kept for grounder training: the most recent ones plus the
/// highest-return ones seen so far, without duplicates.
#[derive(Clone, Debug)]
pub struct GrounderBuffer {
    recent_cap: usize,
    best_cap: usize,
    next_id: usize,
    recent: VecDeque<(usize, EpisodeTrace)>,
    /// Sorted by decreasing return, then by age.
    best: Vec<(f64, usize, EpisodeTrace)>,
}

impl GrounderBuffer {
    pub fn new(recent: usize, best: usize) -> Self {
        Self {
            recent_cap: recent,
            best_cap: best,
            next_id: 0,
            recent: VecDeque::new(),
            best: Vec::new(),
        }
    }

    pub fn push(&mut self, trace: EpisodeTrace) {
        let id = self.next_id;
        self.next_id += 1;
        let ret = trace.episode_return();
        if self.best_cap > 0 {
            let pos = self.best.partition_point(|(r, _, _)| *r >= ret);
            if pos < self.best_cap {
                self.best.insert(pos, (ret, id, trace.clone()));
                self.best.truncate(self.best_cap);
            }
        }
        if self.recent_cap > 0 {
            self.recent.push_back((id, trace));
            if self.recent.len() > self.recent_cap {
                self.recent.pop_front();
            }
        }
    }

    /// Distinct episodes in the buffer, best ones first.
    pub fn episodes(&self) -> Vec<&EpisodeTrace> {
        let mut out: Vec<&EpisodeTrace> = self.best.iter().map(|(_, _, t)| t).collect();
        let best_ids: Vec<usize> = self.best.iter().map(|(_, id, _)| *id).collect();
        out.extend(self.recent.iter().filter(|(id, _)| !best_ids.contains(id)).map(|(_, t)| t));
        out
    }

    pub fn len(&self) -> usize {
        self.episodes().len()
    }

    pub fn is_empty(&self) -> bool {
        self.recent.is_empty() && self.best.is_empty()
    }

    /// Highest return among stored episodes.
    pub fn best_return(&self) -> Option<f64> {
        self.best.first().map(|(r, _, _)| *r)
    }
}
