use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};

use super::SymbolMap;

pub type StateId = usize;
pub type Symbol = usize;

/// Deterministic Moore machine over a mutually exclusive alphabet.
///
/// Transitions are stored densely, row-major by state: the successor of
/// `(q, p)` lives at `q * |P| + p`. Outputs are indices into
/// `output_classes`, whose entries are integer labels (reward levels, or
/// `0`/`1` for plain acceptors).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MooreMachine {
    alphabet: Vec<String>,
    output_classes: Vec<i64>,
    initial: StateId,
    transitions: Vec<StateId>,
    outputs: Vec<usize>,
}

/// State and output traces produced by running a machine on a string.
///
/// `states[0]` is the initial state, `outputs[t]` is the output of
/// `states[t + 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub states: Vec<StateId>,
    pub outputs: Vec<usize>,
}

impl MooreMachine {
    /// Builds a machine from a per-state transition table.
    pub fn new(
        alphabet: Vec<String>,
        output_classes: Vec<i64>,
        initial: StateId,
        transitions: Vec<Vec<StateId>>,
        outputs: Vec<usize>,
    ) -> Result<Self> {
        let n = transitions.len();
        let k = alphabet.len();
        if n == 0 {
            return Err(Error::input("machine needs at least one state"));
        }
        if k == 0 {
            return Err(Error::input("alphabet is empty"));
        }
        let mut flat = Vec::with_capacity(n * k);
        for (q, row) in transitions.iter().enumerate() {
            if row.len() != k {
                return Err(Error::input(format!(
                    "state {q} has {} transitions, alphabet has {k} symbols",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(alphabet, output_classes, initial, flat, outputs)
    }

    pub(crate) fn from_flat(
        alphabet: Vec<String>,
        output_classes: Vec<i64>,
        initial: StateId,
        transitions: Vec<StateId>,
        outputs: Vec<usize>,
    ) -> Result<Self> {
        let k = alphabet.len();
        let n = outputs.len();
        if k == 0 || n == 0 {
            return Err(Error::input("machine needs a symbol and a state"));
        }
        let mut seen = BTreeSet::new();
        for s in &alphabet {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(Error::input(format!("invalid symbol name {s:?}")));
            }
            if !seen.insert(s.as_str()) {
                return Err(Error::input(format!("duplicate symbol {s:?}")));
            }
        }
        let distinct: BTreeSet<_> = output_classes.iter().collect();
        if distinct.len() != output_classes.len() {
            return Err(Error::input("duplicate output class label"));
        }
        if transitions.len() != n * k {
            return Err(Error::input("transition table is not total"));
        }
        if initial >= n {
            return Err(Error::input(format!("initial state {initial} out of range")));
        }
        if let Some(&q) = transitions.iter().find(|&&q| q >= n) {
            return Err(Error::input(format!("transition target {q} out of range")));
        }
        if let Some(&o) = outputs.iter().find(|&&o| o >= output_classes.len()) {
            return Err(Error::input(format!("output class {o} out of range")));
        }
        Ok(Self {
            alphabet,
            output_classes,
            initial,
            transitions,
            outputs,
        })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn num_states(&self) -> usize {
        self.outputs.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn output_classes(&self) -> &[i64] {
        &self.output_classes
    }

    pub fn symbol_index(&self, name: &str) -> Option<Symbol> {
        self.alphabet.iter().position(|s| s == name)
    }

    #[inline]
    pub fn next(&self, q: StateId, p: Symbol) -> StateId {
        self.transitions[q * self.alphabet.len() + p]
    }

    #[inline]
    pub fn output(&self, q: StateId) -> usize {
        self.outputs[q]
    }

    /// Output label (not class index) of a state.
    pub fn output_label(&self, q: StateId) -> i64 {
        self.output_classes[self.outputs[q]]
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub(crate) fn flat_transitions(&self) -> &[StateId] {
        &self.transitions
    }

    /// Parses a whitespace- or comma-separated list of symbol names.
    pub fn parse_string(&self, text: &str) -> Result<Vec<Symbol>> {
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                self.symbol_index(t)
                    .ok_or_else(|| Error::input(format!("unknown symbol {t:?}")))
            })
            .collect()
    }

    /// Final state after consuming `x` from `q`.
    pub fn delta_star(&self, q: StateId, x: &[Symbol]) -> StateId {
        x.iter().fold(q, |q, &p| self.next(q, p))
    }

    pub fn run_string(&self, x: &[Symbol]) -> Result<Run> {
        let k = self.num_symbols();
        if let Some(&p) = x.iter().find(|&&p| p >= k) {
            return Err(Error::input(format!("symbol index {p} out of range")));
        }
        let mut states = Vec::with_capacity(x.len() + 1);
        let mut outputs = Vec::with_capacity(x.len());
        let mut q = self.initial;
        states.push(q);
        for &p in x {
            q = self.next(q, p);
            states.push(q);
            outputs.push(self.outputs[q]);
        }
        Ok(Run { states, outputs })
    }

    /// Machine reading `p` as if it were `map(p)`.
    pub fn relabel(&self, map: &SymbolMap) -> Result<Self> {
        let k = self.num_symbols();
        if map.len() != k {
            return Err(Error::input(format!(
                "symbol map covers {} symbols, alphabet has {k}",
                map.len()
            )));
        }
        let mut transitions = Vec::with_capacity(self.transitions.len());
        for q in 0..self.num_states() {
            transitions.extend((0..k).map(|p| self.next(q, map.apply(p))));
        }
        Ok(Self {
            transitions,
            ..self.clone()
        })
    }

    /// States with a self-loop on every symbol.
    pub fn absorbing_states(&self) -> BTreeSet<StateId> {
        (0..self.num_states())
            .filter(|&q| self.is_absorbing(q))
            .collect()
    }

    pub fn is_absorbing(&self, q: StateId) -> bool {
        (0..self.num_symbols()).all(|p| self.next(q, p) == q)
    }

    /// States reachable from the initial state, in BFS order with symbols
    /// visited in declaration order.
    pub fn reachable_bfs(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for p in 0..self.num_symbols() {
                let r = self.next(q, p);
                if !seen[r] {
                    seen[r] = true;
                    order.push(r);
                }
            }
        }
        order
    }

    /// Drops unreachable states and renumbers by BFS order from the initial
    /// state.
    pub fn canonical(&self) -> Self {
        let order = self.reachable_bfs();
        let mut rename = vec![usize::MAX; self.num_states()];
        for (i, &q) in order.iter().enumerate() {
            rename[q] = i;
        }
        let k = self.num_symbols();
        let mut transitions = Vec::with_capacity(order.len() * k);
        for &q in &order {
            transitions.extend((0..k).map(|p| rename[self.next(q, p)]));
        }
        Self {
            alphabet: self.alphabet.clone(),
            output_classes: self.output_classes.clone(),
            initial: 0,
            transitions,
            outputs: order.iter().map(|&q| self.outputs[q]).collect(),
        }
    }

    /// Minimal output-equivalent machine in canonical numbering.
    ///
    /// Moore-style partition refinement: blocks start as output-label
    /// classes and split on successor-block signatures until stable.
    pub fn minimize(&self) -> Self {
        let m = self.canonical();
        let n = m.num_states();
        let k = m.num_symbols();

        let mut block: Vec<usize> = m.outputs.clone();
        let mut count = renumber_blocks(&mut block);
        loop {
            let mut sigs: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = vec![0; n];
            for q in 0..n {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(block[q]);
                sig.extend((0..k).map(|p| block[m.next(q, p)]));
                let fresh = sigs.len();
                next[q] = *sigs.entry(sig).or_insert(fresh);
            }
            let refined = sigs.len();
            block = next;
            if refined == count {
                break;
            }
            count = refined;
        }

        let mut rep = vec![usize::MAX; count];
        for q in 0..n {
            if rep[block[q]] == usize::MAX {
                rep[block[q]] = q;
            }
        }
        let mut transitions = Vec::with_capacity(count * k);
        for &q in &rep {
            transitions.extend((0..k).map(|p| block[m.next(q, p)]));
        }
        let quotient = Self {
            alphabet: m.alphabet.clone(),
            output_classes: m.output_classes.clone(),
            initial: block[m.initial],
            transitions,
            outputs: rep.iter().map(|&q| m.outputs[q]).collect(),
        };
        quotient.canonical()
    }

    /// Synchronous product; the output label of a pair is
    /// `combine(label1, label2)`. Only reachable pairs are built.
    pub fn product_with(
        &self,
        other: &Self,
        combine: impl Fn(i64, i64) -> i64,
    ) -> Result<Self> {
        if self.alphabet != other.alphabet {
            return Err(Error::input("product of machines over different alphabets"));
        }
        let k = self.num_symbols();
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs = vec![(self.initial, other.initial)];
        index.insert(pairs[0], 0);
        let mut transitions = Vec::new();
        let mut head = 0;
        while head < pairs.len() {
            let (a, b) = pairs[head];
            head += 1;
            for p in 0..k {
                let succ = (self.next(a, p), other.next(b, p));
                let id = *index.entry(succ).or_insert_with(|| {
                    pairs.push(succ);
                    pairs.len() - 1
                });
                transitions.push(id);
            }
        }
        let labels: Vec<i64> = pairs
            .iter()
            .map(|&(a, b)| combine(self.output_label(a), other.output_label(b)))
            .collect();
        let classes: Vec<i64> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let outputs = labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label present"))
            .collect();
        Self::from_flat(self.alphabet.clone(), classes, 0, transitions, outputs)
    }

    /// Product of two acceptors (labels `0`/`1`); a pair accepts iff both do.
    pub fn product_conjunction(&self, other: &Self) -> Result<Self> {
        self.product_with(other, |a, b| i64::from(a != 0 && b != 0))
    }

    /// Shortest string whose output traces differ between the machines, or
    /// `None` when they are output-equivalent.
    pub fn distinguishing_string(&self, other: &Self) -> Result<Option<Vec<Symbol>>> {
        if self.alphabet != other.alphabet {
            return Err(Error::input("equivalence check over different alphabets"));
        }
        let k = self.num_symbols();
        let m = other.num_states();
        let mut parent: HashMap<usize, (usize, Symbol)> = HashMap::new();
        let start = self.initial * m + other.initial;
        let mut queue = VecDeque::from([start]);
        parent.insert(start, (usize::MAX, 0));
        let mut start_seen = false;
        while let Some(cur) = queue.pop_front() {
            let (a, b) = (cur / m, cur % m);
            for p in 0..k {
                let (a2, b2) = (self.next(a, p), other.next(b, p));
                let id = a2 * m + b2;
                let differs = self.output_label(a2) != other.output_label(b2);
                // The start pair's own outputs are never emitted, so reaching
                // it again is the first time they are compared.
                if id == start && !start_seen {
                    start_seen = true;
                    if differs {
                        let mut word = path_to(&parent, start, cur);
                        word.push(p);
                        return Ok(Some(word));
                    }
                }
                if parent.contains_key(&id) {
                    continue;
                }
                parent.insert(id, (cur, p));
                if differs {
                    return Ok(Some(path_to(&parent, start, id)));
                }
                queue.push_back(id);
            }
        }
        Ok(None)
    }

    /// Output-trace equivalence by synchronized product reachability.
    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        Ok(self.distinguishing_string(other)?.is_none())
    }

    /// Turns an acceptor (labels `0`/`1`) into a reward machine whose output
    /// is the potential level of each state.
    ///
    /// A state at BFS distance `d` from the nearest accepting state gets
    /// level `dmax - d`; states that cannot reach acceptance get
    /// [`DEAD_LEVEL`].
    pub fn shape_rewards(&self) -> Result<Self> {
        let n = self.num_states();
        let k = self.num_symbols();
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for q in 0..n {
            for p in 0..k {
                preds[self.next(q, p)].push(q);
            }
        }
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for q in 0..n {
            if self.output_label(q) != 0 {
                dist[q] = 0;
                queue.push_back(q);
            }
        }
        if queue.is_empty() {
            return Err(Error::Spec("task has no accepting state".into()));
        }
        while let Some(q) = queue.pop_front() {
            for &r in &preds[q] {
                if dist[r] == usize::MAX {
                    dist[r] = dist[q] + 1;
                    queue.push_back(r);
                }
            }
        }
        let dmax = dist.iter().filter(|&&d| d != usize::MAX).max().copied().unwrap_or(0);
        let levels: Vec<i64> = dist
            .iter()
            .map(|&d| {
                if d == usize::MAX {
                    DEAD_LEVEL
                } else {
                    (dmax - d) as i64
                }
            })
            .collect();
        let classes: Vec<i64> = levels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let outputs = levels
            .iter()
            .map(|l| classes.binary_search(l).expect("level present"))
            .collect();
        Self::from_flat(
            self.alphabet.clone(),
            classes,
            self.initial,
            self.transitions.clone(),
            outputs,
        )
    }

    /// Potential level of a state in a shaped reward machine.
    pub fn level(&self, q: StateId) -> i64 {
        self.output_label(q)
    }

    pub fn max_level(&self) -> i64 {
        self.output_classes.iter().copied().max().unwrap_or(0)
    }

    /// True when the state has the top potential level.
    pub fn is_accepting(&self, q: StateId) -> bool {
        self.level(q) == self.max_level()
    }

    pub fn is_dead(&self, q: StateId) -> bool {
        self.level(q) == DEAD_LEVEL
    }
}

fn path_to(parent: &HashMap<usize, (usize, Symbol)>, start: usize, end: usize) -> Vec<Symbol> {
    let mut word = Vec::new();
    let mut at = end;
    while at != start {
        let (prev, sym) = parent[&at];
        word.push(sym);
        at = prev;
    }
    word.reverse();
    word
}

/// Reward level assigned to states from which acceptance is unreachable.
pub const DEAD_LEVEL: i64 = -1;

fn renumber_blocks(block: &mut [usize]) -> usize {
    let mut ids = HashMap::new();
    for b in block.iter_mut() {
        let fresh = ids.len();
        *b = *ids.entry(*b).or_insert(fresh);
    }
    ids.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    }

    /// Acceptor for F(a) over {a, b}.
    fn eventually_a() -> MooreMachine {
        MooreMachine::new(syms(2), vec![0, 1], 0, vec![vec![1, 0], vec![1, 1]], vec![0, 1]).unwrap()
    }

    #[test]
    fn empty_string_runs_to_initial() {
        let m = eventually_a();
        let run = m.run_string(&[]).unwrap();
        assert_eq!(run.states, vec![0]);
        assert!(run.outputs.is_empty());
    }

    #[test]
    fn out_of_range_symbol_is_rejected() {
        assert!(matches!(eventually_a().run_string(&[0, 2]), Err(Error::Input(_))));
    }

    #[test]
    fn constructor_checks_totality() {
        let bad = MooreMachine::new(syms(2), vec![0, 1], 0, vec![vec![1], vec![1, 1]], vec![0, 1]);
        assert!(bad.is_err());
        let bad = MooreMachine::new(syms(2), vec![0, 1], 2, vec![vec![1, 0], vec![1, 1]], vec![0, 1]);
        assert!(bad.is_err());
        let dup = MooreMachine::new(
            vec!["a".into(), "a".into()],
            vec![0, 1],
            0,
            vec![vec![1, 0], vec![1, 1]],
            vec![0, 1],
        );
        assert!(dup.is_err());
    }

    #[test]
    fn minimize_merges_duplicate_accepting_states() {
        // q1 and q2 are both accepting sinks.
        let m = MooreMachine::new(
            syms(2),
            vec![0, 1],
            0,
            vec![vec![1, 2], vec![1, 1], vec![2, 2]],
            vec![0, 1, 1],
        )
        .unwrap();
        let min = m.minimize();
        assert_eq!(min.num_states(), 2);
        assert!(min.equivalent(&m).unwrap());
        assert_eq!(min.minimize(), min);
    }

    #[test]
    fn minimal_machine_is_fixed_point() {
        let m = eventually_a();
        assert_eq!(m.minimize(), m);
    }

    #[test]
    fn absorbing_accepting_sink() {
        let m = eventually_a();
        assert_eq!(m.absorbing_states(), BTreeSet::from([1]));
    }

    #[test]
    fn shape_two_levels_for_single_visit() {
        let m = eventually_a().shape_rewards().unwrap();
        assert_eq!(m.output_classes(), &[0, 1]);
        assert!(m.is_accepting(1));
        assert_eq!(m.level(0), 0);
    }

    #[test]
    fn shape_requires_acceptance() {
        let m = MooreMachine::new(syms(1), vec![0], 0, vec![vec![0]], vec![0]).unwrap();
        assert!(matches!(m.shape_rewards(), Err(Error::Spec(_))));
    }

    #[test]
    fn product_with_true_is_identity() {
        let m = eventually_a();
        let t = MooreMachine::new(syms(2), vec![1], 0, vec![vec![0, 0]], vec![0]).unwrap();
        let prod = m.product_conjunction(&t).unwrap();
        assert!(prod.equivalent(&m).unwrap());
        let sq = m.product_conjunction(&m).unwrap();
        assert!(sq.equivalent(&m).unwrap());
    }

    #[test]
    fn distinguishing_string_is_shortest() {
        let a = eventually_a();
        let b = a.relabel(&SymbolMap::new(vec![1, 0])).unwrap();
        assert_eq!(a.distinguishing_string(&b).unwrap(), Some(vec![0]));
    }
}
