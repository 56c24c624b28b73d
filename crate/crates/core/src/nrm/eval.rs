use crate::automata::{Symbol, SymbolMap};
use crate::diff::Tensor;
use crate::error::{Error, Result};

use super::grounder::Grounder;

/// Best accuracy of `predicted` against `labels` after renaming the
/// predictions with any map from `shortcuts`.
pub fn corrected_accuracy(predicted: &[Symbol], labels: &[Symbol], shortcuts: &[SymbolMap]) -> Result<f64> {
    if predicted.len() != labels.len() {
        return Err(Error::input("predictions and labels differ in length"));
    }
    if predicted.is_empty() {
        return Err(Error::input("no labelled states"));
    }
    if shortcuts.is_empty() {
        return Err(Error::input("shortcut set is empty; it always contains the identity"));
    }
    let best = shortcuts
        .iter()
        .map(|alpha| {
            predicted
                .iter()
                .zip(labels)
                .filter(|(&p, &l)| p < alpha.len() && alpha.apply(p) == l)
                .count()
        })
        .max()
        .unwrap();
    Ok(best as f64 / predicted.len() as f64)
}

/// Grounder accuracy on labelled states up to the unremovable shortcuts.
pub fn urs_corrected_accuracy(g: &Grounder, states: &[Vec<f64>], labels: &[Symbol], shortcuts: &[SymbolMap]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::input("no labelled states"));
    }
    let predicted = g.predict(&Tensor::from_rows(states)?)?;
    corrected_accuracy(&predicted, labels, shortcuts)
}
