use crate::automata::MooreMachine;
use crate::error::{Error, Result};

use super::parser::visit_chain;
use super::Formula;

/// One conjunct of a fragment formula, with symbols resolved to indices.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Pattern {
    /// Visit the symbols in order; a one-element chain is a plain visit.
    Chain(Vec<usize>),
    /// Never observe any of these symbols.
    Avoid(Vec<usize>),
}

fn resolve(name: &str, alphabet: &[String]) -> Result<usize> {
    alphabet
        .iter()
        .position(|s| s == name)
        .ok_or_else(|| Error::input(format!("atom {name:?} is not in the alphabet")))
}

pub(crate) fn check_alphabet(alphabet: &[String]) -> Result<()> {
    if alphabet.is_empty() {
        return Err(Error::input("alphabet is empty"));
    }
    Ok(())
}

fn patterns(f: &Formula, alphabet: &[String]) -> Result<Vec<Pattern>> {
    f.conjuncts()
        .into_iter()
        .map(|term| match term {
            Formula::Eventually(body) => {
                let chain = visit_chain(body)?;
                Ok(Pattern::Chain(chain.iter().map(|s| resolve(s, alphabet)).collect::<Result<_>>()?))
            }
            Formula::Globally(body) => {
                let syms = body
                    .conjuncts()
                    .into_iter()
                    .map(|lit| match lit {
                        Formula::Not(a) => match &**a {
                            Formula::Atom(s) => resolve(s, alphabet),
                            _ => Err(Error::Spec(format!("unexpected literal {lit}"))),
                        },
                        _ => Err(Error::Spec(format!("unexpected literal {lit}"))),
                    })
                    .collect::<Result<_>>()?;
                Ok(Pattern::Avoid(syms))
            }
            other => Err(Error::Spec(format!("term {other} is outside the fragment"))),
        })
        .collect()
}

/// Chain acceptor: state `i` means the first `i` chain symbols were seen in
/// order. A symbol that completes several consecutive equal chain steps
/// advances through all of them, since `F` includes the current instant.
fn chain_dfa(chain: &[usize], alphabet: &[String]) -> MooreMachine {
    let n = chain.len();
    let transitions = (0..=n)
        .map(|i| {
            (0..alphabet.len())
                .map(|p| {
                    let mut j = i;
                    while j < n && chain[j] == p {
                        j += 1;
                    }
                    j
                })
                .collect()
        })
        .collect();
    let outputs = (0..=n).map(|i| usize::from(i == n)).collect();
    MooreMachine::new(alphabet.to_vec(), vec![0, 1], 0, transitions, outputs).expect("chain template")
}

fn avoid_dfa(forbidden: &[usize], alphabet: &[String]) -> MooreMachine {
    let alive = (0..alphabet.len()).map(|p| usize::from(forbidden.contains(&p))).collect();
    let dead = vec![1; alphabet.len()];
    MooreMachine::new(alphabet.to_vec(), vec![0, 1], 0, vec![alive, dead], vec![1, 0]).expect("avoid template")
}

/// Acceptor for the formula built from per-pattern templates.
pub fn compile_acceptor(f: &Formula, alphabet: &[String]) -> Result<MooreMachine> {
    check_alphabet(alphabet)?;
    let mut acc: Option<MooreMachine> = None;
    for pat in patterns(f, alphabet)? {
        let m = match &pat {
            Pattern::Chain(c) => chain_dfa(c, alphabet),
            Pattern::Avoid(s) => avoid_dfa(s, alphabet),
        };
        acc = Some(match acc {
            None => m,
            Some(prev) => prev.product_conjunction(&m)?.minimize(),
        });
    }
    Ok(acc.expect("fragment formulas have at least one conjunct").minimize())
}

/// Canonical reward machine: template product, minimization, then
/// distance-based potential levels.
pub fn compile(f: &Formula, alphabet: &[String]) -> Result<MooreMachine> {
    Ok(compile_acceptor(f, alphabet)?.shape_rewards()?.minimize())
}
