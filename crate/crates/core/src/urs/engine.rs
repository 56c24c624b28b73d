use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::automata::{MooreMachine, StateId, Symbol, SymbolMap};
use crate::error::{Error, Result};

use super::enumerate_maps;

/// Whether `map` keeps the output trace of every string in `data` intact.
pub fn is_working(m: &MooreMachine, map: &SymbolMap, data: &[Vec<Symbol>]) -> Result<bool> {
    if map.len() != m.num_symbols() {
        return Err(Error::input("symbol map does not match the machine alphabet"));
    }
    for x in data {
        let original = m.run_string(x)?;
        let renamed = m.run_string(&map.apply_string(x))?;
        if original.outputs != renamed.outputs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug)]
pub struct UrsOptions {
    /// Do not extend strings whose two runs both sit in absorbing states.
    pub skip_absorbing: bool,
    /// Do not add `x + p` when `p` self-loops on both runs.
    pub skip_self_loops: bool,
    /// Keep full strings in candidate datasets (diagnostics and witnesses).
    pub keep_strings: bool,
    /// Worker threads; `0` uses the rayon default.
    pub jobs: usize,
}

impl Default for UrsOptions {
    fn default() -> Self {
        Self {
            skip_absorbing: true,
            skip_self_loops: true,
            keep_strings: false,
            jobs: 1,
        }
    }
}

/// One frontier string of a candidate dataset, with the states it reaches
/// in the machine and in the relabeled machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetEntry {
    pub string: Vec<Symbol>,
    pub state: StateId,
    pub mapped_state: StateId,
}

/// The growing dataset `D[α]` of one candidate.
///
/// Strings are deduplicated by the pair of states they reach: once a pair
/// has been seen, every extension of it has been (or will be) explored.
#[derive(Clone, Debug)]
pub struct CandidateDataset<'m> {
    machine: &'m MooreMachine,
    absorbing: &'m [bool],
    map: SymbolMap,
    opts: UrsOptions,
    visited: Vec<bool>,
    entries: Vec<DatasetEntry>,
}

impl<'m> CandidateDataset<'m> {
    /// Dataset holding every string of length one.
    pub fn new(machine: &'m MooreMachine, absorbing: &'m [bool], map: SymbolMap, opts: UrsOptions) -> Self {
        let n = machine.num_states();
        let q0 = machine.initial();
        let mut ds = Self {
            machine,
            absorbing,
            map,
            opts,
            visited: vec![false; n * n],
            entries: Vec::new(),
        };
        ds.visited[q0 * n + q0] = true;
        for p in 0..machine.num_symbols() {
            let entry = DatasetEntry {
                string: if opts.keep_strings { vec![p] } else { Vec::new() },
                state: machine.next(q0, p),
                mapped_state: machine.next(q0, ds.map.apply(p)),
            };
            ds.push(entry);
        }
        ds
    }

    fn push(&mut self, e: DatasetEntry) -> bool {
        let key = e.state * self.machine.num_states() + e.mapped_state;
        if self.visited[key] {
            return false;
        }
        self.visited[key] = true;
        self.entries.push(e);
        true
    }

    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn map(&self) -> &SymbolMap {
        &self.map
    }

    /// First entry whose two runs produce different outputs.
    pub fn counterexample(&self) -> Option<&DatasetEntry> {
        let m = self.machine;
        self.entries.iter().find(|e| m.output_label(e.state) != m.output_label(e.mapped_state))
    }

    pub fn is_working(&self) -> bool {
        self.counterexample().is_none()
    }

    /// Replaces the dataset with its one-symbol extensions; returns whether
    /// anything new was added.
    pub fn extend(&mut self) -> bool {
        let m = self.machine;
        let old = std::mem::take(&mut self.entries);
        for e in &old {
            if self.opts.skip_absorbing && self.absorbing[e.state] && self.absorbing[e.mapped_state] {
                continue;
            }
            for p in 0..m.num_symbols() {
                let q = m.next(e.state, p);
                let r = m.next(e.mapped_state, self.map.apply(p));
                if self.opts.skip_self_loops && q == e.state && r == e.mapped_state {
                    continue;
                }
                let string = if self.opts.keep_strings {
                    let mut s = e.string.clone();
                    s.push(p);
                    s
                } else {
                    Vec::new()
                };
                self.push(DatasetEntry {
                    string,
                    state: q,
                    mapped_state: r,
                });
            }
        }
        !self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateOutcome {
    pub map: SymbolMap,
    pub survived: bool,
    /// Loop iterations the candidate took part in.
    pub iterations: usize,
    pub peak_dataset: usize,
    /// For rejected candidates with `keep_strings`, a string on which the
    /// map changes the output trace.
    pub witness: Option<Vec<Symbol>>,
}

/// Outcomes of the candidates that reached the pair search, stored flat.
#[derive(Clone, Debug, Default)]
struct Detail {
    images: Vec<u8>,
    survived: Vec<bool>,
    iterations: Vec<u32>,
    peaks: Vec<u32>,
    witnesses: Vec<Option<Vec<Symbol>>>,
}

impl Detail {
    fn push(&mut self, image: &[usize], survived: bool, iterations: usize, peak: usize, witness: Option<Vec<Symbol>>) {
        self.images.extend(image.iter().map(|&p| p as u8));
        self.survived.push(survived);
        self.iterations.push(iterations as u32);
        self.peaks.push(peak as u32);
        self.witnesses.push(witness);
    }

    fn append(&mut self, other: Detail) {
        self.images.extend(other.images);
        self.survived.extend(other.survived);
        self.iterations.extend(other.iterations);
        self.peaks.extend(other.peaks);
        self.witnesses.extend(other.witnesses);
    }
}

#[derive(Clone, Debug)]
pub struct UrsReport {
    /// Surviving maps in lexicographic order.
    pub shortcuts: Vec<SymbolMap>,
    pub num_symbols: usize,
    /// Largest iteration count over all candidates.
    pub iterations: usize,
    pub peak_dataset: usize,
    pub elapsed: Duration,
    detail: Detail,
}

impl UrsReport {
    pub fn count(&self) -> usize {
        self.shortcuts.len()
    }

    /// Count excluding the identity map.
    pub fn count_without_identity(&self) -> usize {
        self.shortcuts.iter().filter(|m| !m.is_identity()).count()
    }

    /// Outcomes of the candidates that passed the first iteration, in
    /// lexicographic order. Every other map was rejected on a string of
    /// length one.
    pub fn outcomes(&self) -> Vec<CandidateOutcome> {
        let k = self.num_symbols;
        (0..self.detail.survived.len())
            .map(|i| CandidateOutcome {
                map: SymbolMap::new(self.detail.images[i * k..(i + 1) * k].iter().map(|&p| p as usize).collect()),
                survived: self.detail.survived[i],
                iterations: self.detail.iterations[i] as usize,
                peak_dataset: self.detail.peaks[i] as usize,
                witness: self.detail.witnesses[i].clone(),
            })
            .collect()
    }

    /// One outcome per map in lexicographic order, including the maps
    /// rejected in the first iteration.
    pub fn all_outcomes(&self) -> Vec<CandidateOutcome> {
        let mut maps: Vec<SymbolMap> = enumerate_maps(self.num_symbols).collect();
        maps.sort();
        let detailed = self.outcomes();
        let mut detailed = detailed.into_iter().peekable();
        maps.into_iter()
            .map(|map| match detailed.peek() {
                Some(o) if o.map == map => detailed.next().unwrap(),
                _ => CandidateOutcome {
                    map,
                    survived: false,
                    iterations: 1,
                    peak_dataset: self.num_symbols,
                    witness: None,
                },
            })
            .collect()
    }
}

fn absorbing_mask(m: &MooreMachine) -> Vec<bool> {
    (0..m.num_states()).map(|q| m.is_absorbing(q)).collect()
}

/// For each symbol, the images that keep the output of the one-symbol
/// string unchanged. The first iteration's check on a map is the
/// conjunction of these per-symbol conditions, so only the product of
/// these sets needs a pair search.
fn first_layer_images(m: &MooreMachine) -> Vec<Vec<Symbol>> {
    let q0 = m.initial();
    let k = m.num_symbols();
    (0..k)
        .map(|p| {
            let want = m.output_label(m.next(q0, p));
            (0..k).filter(|&s| m.output_label(m.next(q0, s)) == want).collect()
        })
        .collect()
}

/// Mixed-radix view of the maps passing the first iteration; candidate `i`
/// is the `i`-th map in lexicographic order.
struct FirstLayer {
    allowed: Vec<Vec<Symbol>>,
    total: usize,
}

impl FirstLayer {
    fn new(allowed: Vec<Vec<Symbol>>) -> Result<Self> {
        let mut total: usize = 1;
        for a in &allowed {
            total = total
                .checked_mul(a.len())
                .filter(|&t| t <= MAX_CANDIDATES)
                .ok_or_else(|| Error::input(format!("more than {MAX_CANDIDATES} candidate maps")))?;
        }
        Ok(Self { allowed, total })
    }

    fn decode(&self, mut index: usize, digits: &mut [usize]) {
        for p in (0..self.allowed.len()).rev() {
            let radix = self.allowed[p].len();
            digits[p] = index % radix;
            index /= radix;
        }
    }

    /// Advances `digits` to the next candidate; false after the last one.
    fn advance(&self, digits: &mut [usize]) -> bool {
        for p in (0..digits.len()).rev() {
            digits[p] += 1;
            if digits[p] < self.allowed[p].len() {
                return true;
            }
            digits[p] = 0;
        }
        false
    }

    fn image(&self, digits: &[usize], out: &mut [usize]) {
        for (p, &d) in digits.iter().enumerate() {
            out[p] = self.allowed[p][d];
        }
    }
}

const MAX_CANDIDATES: usize = 50_000_000;

/// Reusable buffers for the pair search of one worker.
struct Workspace {
    stamp: Vec<u32>,
    generation: u32,
    frontier: Vec<(u32, u32)>,
    next: Vec<(u32, u32)>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n * n],
            generation: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }
}

/// Same iteration as [`CandidateDataset`] without storing strings.
fn search_pairs(
    m: &MooreMachine,
    absorbing: &[bool],
    image: &[usize],
    opts: UrsOptions,
    ws: &mut Workspace,
) -> Result<(bool, usize, usize)> {
    let n = m.num_states();
    let k = m.num_symbols();
    let cap = (n * n).max(1);
    let trans = m.flat_transitions();
    let out = m.outputs();
    ws.generation = ws.generation.wrapping_add(1);
    if ws.generation == 0 {
        ws.stamp.iter_mut().for_each(|s| *s = 0);
        ws.generation = 1;
    }
    let gen = ws.generation;
    let q0 = m.initial();
    ws.stamp[q0 * n + q0] = gen;
    ws.frontier.clear();
    for p in 0..k {
        let (q, r) = (trans[q0 * k + p], trans[q0 * k + image[p]]);
        let key = q * n + r;
        if ws.stamp[key] != gen {
            ws.stamp[key] = gen;
            ws.frontier.push((q as u32, r as u32));
        }
    }
    let mut peak = ws.frontier.len();
    let mut iteration = 0;
    loop {
        iteration += 1;
        if iteration > cap {
            return Err(Error::IterationCap(cap));
        }
        if ws.frontier.iter().any(|&(q, r)| out[q as usize] != out[r as usize]) {
            return Ok((false, iteration, peak));
        }
        ws.next.clear();
        for &(q, r) in &ws.frontier {
            let (q, r) = (q as usize, r as usize);
            if opts.skip_absorbing && absorbing[q] && absorbing[r] {
                continue;
            }
            for p in 0..k {
                let (q2, r2) = (trans[q * k + p], trans[r * k + image[p]]);
                if opts.skip_self_loops && q2 == q && r2 == r {
                    continue;
                }
                let key = q2 * n + r2;
                if ws.stamp[key] != gen {
                    ws.stamp[key] = gen;
                    ws.next.push((q2 as u32, r2 as u32));
                }
            }
        }
        if ws.next.is_empty() {
            return Ok((true, iteration, peak));
        }
        std::mem::swap(&mut ws.frontier, &mut ws.next);
        peak = peak.max(ws.frontier.len());
    }
}

fn run_with_dataset(m: &MooreMachine, absorbing: &[bool], map: SymbolMap, opts: UrsOptions) -> Result<CandidateOutcome> {
    let n = m.num_states();
    let cap = (n * n).max(1);
    let mut ds = CandidateDataset::new(m, absorbing, map, opts);
    let mut peak = ds.entries.len();
    let mut iteration = 0;
    loop {
        iteration += 1;
        if iteration > cap {
            return Err(Error::IterationCap(cap));
        }
        if let Some(bad) = ds.counterexample() {
            let witness = opts.keep_strings.then(|| bad.string.clone());
            return Ok(CandidateOutcome {
                map: ds.map,
                survived: false,
                iterations: iteration,
                peak_dataset: peak,
                witness,
            });
        }
        if !ds.extend() {
            return Ok(CandidateOutcome {
                map: ds.map,
                survived: true,
                iterations: iteration,
                peak_dataset: peak,
                witness: None,
            });
        }
        peak = peak.max(ds.entries.len());
    }
}

/// Every symbol map under which the machine is output-equivalent to itself.
pub fn find_urs(m: &MooreMachine) -> Result<UrsReport> {
    find_urs_with(m, UrsOptions::default())
}

pub fn find_urs_with(m: &MooreMachine, opts: UrsOptions) -> Result<UrsReport> {
    let start = Instant::now();
    let k = m.num_symbols();
    if k > u8::MAX as usize {
        return Err(Error::input("alphabet too large for map enumeration"));
    }
    let absorbing = absorbing_mask(m);
    let layer = FirstLayer::new(first_layer_images(m))?;

    let run_range = |from: usize, to: usize| -> Result<Detail> {
        let mut detail = Detail::default();
        if from >= to {
            return Ok(detail);
        }
        let mut ws = Workspace::new(m.num_states());
        let mut digits = vec![0; k];
        let mut image = vec![0; k];
        layer.decode(from, &mut digits);
        for _ in from..to {
            layer.image(&digits, &mut image);
            if opts.keep_strings {
                let o = run_with_dataset(m, &absorbing, SymbolMap::new(image.clone()), opts)?;
                detail.push(&image, o.survived, o.iterations, o.peak_dataset, o.witness);
            } else {
                let (survived, iterations, peak) = search_pairs(m, &absorbing, &image, opts, &mut ws)?;
                detail.push(&image, survived, iterations, peak, None);
            }
            layer.advance(&mut digits);
        }
        Ok(detail)
    };

    let detail = if opts.jobs == 1 || layer.total < 2 {
        run_range(0, layer.total)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Usage(e.to_string()))?;
        let chunk = layer.total.div_ceil(pool.current_num_threads() * 4).max(1);
        let starts: Vec<usize> = (0..layer.total).step_by(chunk).collect();
        let parts: Vec<Detail> = pool.install(|| {
            starts
                .par_iter()
                .map(|&s| run_range(s, (s + chunk).min(layer.total)))
                .collect::<Result<_>>()
        })?;
        let mut all = Detail::default();
        parts.into_iter().for_each(|d| all.append(d));
        all
    };

    let shortcuts = (0..detail.survived.len())
        .filter(|&i| detail.survived[i])
        .map(|i| SymbolMap::new(detail.images[i * k..(i + 1) * k].iter().map(|&p| p as usize).collect()))
        .collect();
    Ok(UrsReport {
        shortcuts,
        num_symbols: k,
        iterations: detail.iterations.iter().copied().max().unwrap_or(1) as usize,
        peak_dataset: detail.peaks.iter().copied().max().unwrap_or(k as u32) as usize,
        elapsed: start.elapsed(),
        detail,
    })
}
