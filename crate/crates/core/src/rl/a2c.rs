use crate::diff::{clip_global_norm, Adam, Bound, ParamSet, Tape, Var};
use crate::error::{Error, Result};

use super::config::TrainConfig;

/// One recorded step of a rollout segment.
#[derive(Clone, Copy, Debug)]
pub struct Transition<'t> {
    pub log_prob: Var<'t>,
    pub value: Var<'t>,
    pub entropy: Var<'t>,
    pub reward: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Losses {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub total: f64,
    /// Gradient norm before clipping.
    pub grad_norm: f64,
}

/// Discounted returns of a segment, bootstrapped from the value of the
/// state that follows it.
pub fn n_step_returns(rewards: &[f64], bootstrap: f64, gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = bootstrap;
    for (o, r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *o = acc;
    }
    out
}

/// Entropy of each row of a probability matrix, summed.
pub fn entropy<'t>(probs: Var<'t>) -> Result<Var<'t>> {
    Ok(probs.mul(probs.ln())?.sum().scale(-1.0))
}

/// Weighted actor-critic loss of a segment.
pub fn a2c_loss<'t>(segment: &[Transition<'t>], bootstrap: f64, cfg: &TrainConfig) -> Result<(Var<'t>, Losses)> {
    let first = segment.first().ok_or_else(|| Error::input("empty rollout segment"))?;
    let tape = first.value.tape();
    let rewards: Vec<f64> = segment.iter().map(|t| t.reward).collect();
    let returns = n_step_returns(&rewards, bootstrap, cfg.gamma);
    let n = segment.len() as f64;
    let mut policy: Option<Var<'t>> = None;
    let mut value: Option<Var<'t>> = None;
    let mut ent: Option<Var<'t>> = None;
    let add = |acc: Option<Var<'t>>, v: Var<'t>| -> Result<Var<'t>> {
        match acc {
            None => Ok(v),
            Some(a) => a.add(v),
        }
    };
    for (tr, &ret) in segment.iter().zip(&returns) {
        let advantage = ret - tr.value.item();
        policy = Some(add(policy, tr.log_prob.scale(-advantage))?);
        let target = tape.constant(crate::diff::Tensor::new(&tr.value.shape(), vec![ret])?);
        value = Some(add(value, target.sub(tr.value)?.square().sum())?);
        ent = Some(add(ent, tr.entropy)?);
    }
    let (policy, value, ent) = (
        policy.unwrap().scale(1.0 / n),
        value.unwrap().scale(1.0 / n),
        ent.unwrap().scale(1.0 / n),
    );
    let total = policy
        .scale(cfg.coef_actor)
        .add(value.scale(cfg.coef_critic))?
        .sub(ent.scale(cfg.coef_entropy))?;
    let losses = Losses {
        policy: policy.item(),
        value: value.item(),
        entropy: ent.item(),
        total: total.item(),
        grad_norm: 0.0,
    };
    Ok((total, losses))
}

/// Backpropagates the segment loss and applies one clipped Adam step.
#[allow(clippy::too_many_arguments)]
pub fn a2c_update<'t>(
    tape: &'t Tape,
    bound: &Bound<'t>,
    params: &mut ParamSet,
    opt: &mut Adam,
    segment: &[Transition<'t>],
    bootstrap: f64,
    cfg: &TrainConfig,
) -> Result<Losses> {
    let (loss, mut losses) = a2c_loss(segment, bootstrap, cfg)?;
    let grads = tape.backward(loss)?;
    let mut gs = bound.grads(&grads);
    losses.grad_norm = clip_global_norm(&mut gs, cfg.clip_norm);
    opt.step(params, &gs)?;
    Ok(losses)
}
