use std::collections::HashSet;

use crate::automata::{MooreMachine, SymbolMap};
use crate::error::Result;

use super::enumerate_maps;

/// Brute force: every map whose relabeled machine is output-equivalent to
/// the original. Shares no code with the pruned search.
pub fn urs_oracle_exact(m: &MooreMachine) -> Result<Vec<SymbolMap>> {
    let mut out = Vec::new();
    for map in enumerate_maps(m.num_symbols()) {
        if m.equivalent(&m.relabel(&map)?)? {
            out.push(map);
        }
    }
    out.sort();
    Ok(out)
}

/// Maps that work on every string of length at most `max_len`.
///
/// Checks the complete dataset layer by layer: layer `t` holds the state
/// pairs reached by all strings of length `t`. No fixpoint detection, so the
/// cost grows with `max_len`.
pub fn urs_oracle_bounded(m: &MooreMachine, max_len: usize) -> Result<Vec<SymbolMap>> {
    let mut out = Vec::new();
    for map in enumerate_maps(m.num_symbols()) {
        if works_up_to(m, &m.relabel(&map)?, max_len) {
            out.push(map);
        }
    }
    out.sort();
    Ok(out)
}

fn works_up_to(m: &MooreMachine, renamed: &MooreMachine, max_len: usize) -> bool {
    let mut layer: HashSet<(usize, usize)> = HashSet::from([(m.initial(), renamed.initial())]);
    for _ in 0..max_len {
        let mut next = HashSet::with_capacity(layer.len() * m.num_symbols());
        for &(q, r) in &layer {
            for p in 0..m.num_symbols() {
                let pair = (m.next(q, p), renamed.next(r, p));
                if m.output_label(pair.0) != renamed.output_label(pair.1) {
                    return false;
                }
                next.insert(pair);
            }
        }
        layer = next;
    }
    true
}
