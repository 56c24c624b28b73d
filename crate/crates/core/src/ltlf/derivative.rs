//! Second compilation route: symbol-wise formula derivatives.
//!
//! A state is a normalized residual formula; reading `p` moves to the
//! residual that the rest of the trace must satisfy. A state accepts when
//! the empty continuation satisfies its residual. This path shares nothing
//! with the template compiler except the final minimization and shaping.

use std::collections::HashMap;

use crate::automata::MooreMachine;
use crate::error::{Error, Result};

use super::compile::check_alphabet;
use super::Formula;

/// Residual formulas. Variant order fixes the normal-form sort: node kind
/// first, then symbol index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Term {
    False,
    True,
    Atom(usize),
    NotAtom(usize),
    Eventually(Box<Term>),
    Globally(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
}

const STATE_CAP: usize = 100_000;

fn lower(f: &Formula, alphabet: &[String]) -> Result<Term> {
    let sym = |s: &str| {
        alphabet
            .iter()
            .position(|a| a == s)
            .ok_or_else(|| Error::input(format!("atom {s:?} is not in the alphabet")))
    };
    Ok(match f {
        Formula::Atom(s) => Term::Atom(sym(s)?),
        Formula::Not(g) => match &**g {
            Formula::Atom(s) => Term::NotAtom(sym(s)?),
            other => {
                return Err(Error::Unsupported {
                    node: f.to_string(),
                    msg: format!("negation of non-atom {other}"),
                })
            }
        },
        Formula::Eventually(g) => Term::Eventually(Box::new(lower(g, alphabet)?)),
        Formula::Globally(g) => Term::Globally(Box::new(lower(g, alphabet)?)),
        Formula::And(gs) => and(gs.iter().map(|g| lower(g, alphabet)).collect::<Result<_>>()?),
    })
}

fn and(terms: Vec<Term>) -> Term {
    let mut flat = Vec::new();
    for t in terms {
        match t {
            Term::False => return Term::False,
            Term::True => {}
            Term::And(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    flat.sort();
    flat.dedup();
    match flat.len() {
        0 => Term::True,
        1 => flat.pop().unwrap(),
        _ => Term::And(flat),
    }
}

fn or(terms: Vec<Term>) -> Term {
    let mut flat = Vec::new();
    for t in terms {
        match t {
            Term::True => return Term::True,
            Term::False => {}
            Term::Or(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    flat.sort();
    flat.dedup();
    match flat.len() {
        0 => Term::False,
        1 => flat.pop().unwrap(),
        _ => Term::Or(flat),
    }
}

fn derive(t: &Term, p: usize) -> Term {
    match t {
        Term::False => Term::False,
        Term::True => Term::True,
        Term::Atom(s) => bool_term(*s == p),
        Term::NotAtom(s) => bool_term(*s != p),
        Term::Eventually(g) => or(vec![derive(g, p), t.clone()]),
        Term::Globally(g) => and(vec![derive(g, p), t.clone()]),
        Term::And(gs) => and(gs.iter().map(|g| derive(g, p)).collect()),
        Term::Or(gs) => or(gs.iter().map(|g| derive(g, p)).collect()),
    }
}

fn bool_term(b: bool) -> Term {
    if b {
        Term::True
    } else {
        Term::False
    }
}

/// Whether the empty continuation satisfies the residual.
fn accepts_empty(t: &Term) -> bool {
    match t {
        Term::True | Term::Globally(_) | Term::NotAtom(_) => true,
        Term::False | Term::Atom(_) | Term::Eventually(_) => false,
        Term::And(gs) => gs.iter().all(accepts_empty),
        Term::Or(gs) => gs.iter().any(accepts_empty),
    }
}

/// Acceptor whose states are the residuals reachable from `f`.
pub fn derivative_acceptor(f: &Formula, alphabet: &[String]) -> Result<MooreMachine> {
    check_alphabet(alphabet)?;
    let start = and(vec![lower(f, alphabet)?]);
    let mut index: HashMap<Term, usize> = HashMap::from([(start.clone(), 0)]);
    let mut states = vec![start];
    let mut transitions = Vec::new();
    let mut head = 0;
    while head < states.len() {
        let row: Vec<usize> = (0..alphabet.len())
            .map(|p| {
                let next = derive(&states[head], p);
                let fresh = states.len();
                *index.entry(next.clone()).or_insert_with(|| {
                    states.push(next);
                    fresh
                })
            })
            .collect();
        transitions.push(row);
        head += 1;
        if states.len() > STATE_CAP {
            return Err(Error::Spec(format!("derivative automaton exceeds {STATE_CAP} states")));
        }
    }
    let outputs = states.iter().map(|t| usize::from(accepts_empty(t))).collect();
    MooreMachine::new(alphabet.to_vec(), vec![0, 1], 0, transitions, outputs)
}

/// Reward machine built from the derivative acceptor.
pub fn compile_via_derivatives(f: &Formula, alphabet: &[String]) -> Result<MooreMachine> {
    Ok(derivative_acceptor(f, alphabet)?.minimize().shape_rewards()?.minimize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_is_order_insensitive() {
        let a = and(vec![Term::Atom(1), Term::Atom(0), Term::True, Term::Atom(1)]);
        let b = and(vec![Term::Atom(0), Term::Atom(1)]);
        assert_eq!(a, b);
        assert_eq!(or(vec![Term::False, Term::Atom(2)]), Term::Atom(2));
        assert_eq!(and(vec![Term::Atom(0), Term::False]), Term::False);
    }

    #[test]
    fn eventually_residual_after_match_is_true() {
        let t = Term::Eventually(Box::new(Term::Atom(0)));
        assert_eq!(derive(&t, 0), Term::True);
        assert_eq!(derive(&t, 1), t);
    }
}
