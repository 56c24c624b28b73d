use crate::error::Result;

use super::tape::{Tape, Var};
use super::tensor::Tensor;

pub const STEP: f64 = 1e-5;

/// Denominator floor for the relative error, so that entries whose true
/// gradient is near zero are compared on an absolute scale.
pub const REL_FLOOR: f64 = 1e-2;

/// Largest relative error between the tape gradient of `f` and central
/// differences with step [`STEP`], over every entry of every input.
pub fn max_rel_error<F>(inputs: &[Tensor], f: F) -> Result<f64>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Result<Var<'t>>,
{
    let analytic = {
        let tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
        let loss = f(&tape, &vars)?;
        let grads = tape.backward(loss)?;
        vars.iter().map(|v| grads.wrt(*v)).collect::<Vec<_>>()
    };
    let eval = |xs: &[Tensor]| -> Result<f64> {
        let tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|t| tape.constant(t.clone())).collect();
        let out = f(&tape, &vars)?.item();
        Ok(out)
    };
    let mut worst: f64 = 0.0;
    let mut xs = inputs.to_vec();
    for (k, g) in analytic.iter().enumerate() {
        for i in 0..xs[k].len() {
            let orig = xs[k].data()[i];
            xs[k].data_mut()[i] = orig + STEP;
            let up = eval(&xs)?;
            xs[k].data_mut()[i] = orig - STEP;
            let down = eval(&xs)?;
            xs[k].data_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            let a = g.data()[i];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
