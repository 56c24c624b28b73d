use rand::Rng;

use crate::error::{Error, Result};

use super::params::{Bound, ParamId, ParamSet};
use super::tape::{Tape, Var};
use super::tensor::Tensor;

/// Fully connected layer `x W + b` with PyTorch-style uniform init.
#[derive(Clone, Debug)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub inputs: usize,
    pub outputs: usize,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(params: &mut ParamSet, inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inputs.max(1) as f64).sqrt();
        let weight = params.push(Tensor::uniform(&[inputs, outputs], bound, rng));
        let bias = params.push(Tensor::uniform(&[outputs], bound, rng));
        Self {
            weight,
            bias,
            inputs,
            outputs,
        }
    }

    pub fn forward<'t>(&self, b: &Bound<'t>, x: Var<'t>) -> Result<Var<'t>> {
        x.matmul(b.get(self.weight))?.add_row(b.get(self.bias))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
    Sigmoid,
}

impl Activation {
    fn apply(self, x: Var<'_>) -> Var<'_> {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.relu(),
            Activation::Sigmoid => x.sigmoid(),
        }
    }
}

/// Stack of linear layers with an activation after each hidden layer and an
/// optional softmax head.
#[derive(Clone, Debug)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    /// One per gap between consecutive layers.
    pub activations: Vec<Activation>,
    pub softmax_head: bool,
    /// Drop probability after each hidden layer in training mode.
    pub dropout: f64,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParamSet,
        sizes: &[usize],
        activations: Vec<Activation>,
        softmax_head: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 2 {
            return Err(Error::input(format!(
                "{} layer sizes need {} activations, got {}",
                sizes.len(),
                sizes.len().saturating_sub(2),
                activations.len()
            )));
        }
        let layers = sizes.windows(2).map(|w| Linear::new(params, w[0], w[1], rng)).collect();
        Ok(Self {
            layers,
            activations,
            softmax_head,
            dropout: 0.0,
        })
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().unwrap().outputs
    }

    /// Evaluation-mode forward pass.
    pub fn forward<'t>(&self, b: &Bound<'t>, x: Var<'t>) -> Result<Var<'t>> {
        self.run(b, x, None::<&mut rand::rngs::mock::StepRng>)
    }

    /// Forward pass with dropout masks drawn from `rng`.
    pub fn forward_train<'t, R: Rng + ?Sized>(&self, b: &Bound<'t>, x: Var<'t>, rng: &mut R) -> Result<Var<'t>> {
        self.run(b, x, Some(rng))
    }

    fn run<'t, R: Rng + ?Sized>(&self, b: &Bound<'t>, x: Var<'t>, mut rng: Option<&mut R>) -> Result<Var<'t>> {
        let mut h = x;
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.forward(b, h)?;
            if let Some(&act) = self.activations.get(i) {
                h = act.apply(h);
                if let Some(rng) = rng.as_deref_mut() {
                    if self.dropout > 0.0 {
                        h = dropout(h, self.dropout, rng)?;
                    }
                }
            }
        }
        Ok(if self.softmax_head { h.softmax() } else { h })
    }

    /// Forward pass on a plain matrix of inputs.
    pub fn infer(&self, params: &ParamSet, x: &Tensor) -> Result<Tensor> {
        let tape = Tape::new();
        let b = params.bind_frozen(&tape);
        let y = self.forward(&b, tape.constant(x.clone()))?;
        let out = y.value().clone();
        Ok(out)
    }
}

/// Inverted dropout: zeroes entries with probability `rate` and rescales the rest.
pub fn dropout<'t, R: Rng + ?Sized>(x: Var<'t>, rate: f64, rng: &mut R) -> Result<Var<'t>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::input(format!("dropout rate {rate} outside [0, 1)")));
    }
    let shape = x.shape();
    let n: usize = shape.iter().product();
    let keep = 1.0 / (1.0 - rate);
    let mask = (0..n).map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect();
    x.mul_const(&Tensor::new(&shape, mask)?)
}

pub const HIDDEN: usize = 120;

/// Policy network: three layers with tanh and a softmax over actions.
pub fn actor<R: Rng + ?Sized>(params: &mut ParamSet, inputs: usize, actions: usize, rng: &mut R) -> Mlp {
    Mlp::new(params, &[inputs, HIDDEN, HIDDEN, actions], vec![Activation::Tanh; 2], true, rng).unwrap()
}

/// Value network: three layers with tanh and a scalar output.
pub fn critic<R: Rng + ?Sized>(params: &mut ParamSet, inputs: usize, rng: &mut R) -> Mlp {
    Mlp::new(params, &[inputs, HIDDEN, HIDDEN, 1], vec![Activation::Tanh; 2], false, rng).unwrap()
}

/// Symbol grounder: three layers, tanh only after the first, dropout
/// after each hidden layer, softmax over symbols.
pub fn grounder<R: Rng + ?Sized>(
    params: &mut ParamSet,
    inputs: usize,
    symbols: usize,
    hidden: usize,
    dropout: f64,
    rng: &mut R,
) -> Mlp {
    let mut m = Mlp::new(
        params,
        &[inputs, hidden, hidden, symbols],
        vec![Activation::Tanh, Activation::Identity],
        true,
        rng,
    )
    .unwrap();
    m.dropout = dropout;
    m
}

#[derive(Clone, Debug)]
struct LstmLayer {
    input_weight: ParamId,
    hidden_weight: ParamId,
    bias: ParamId,
    hidden: usize,
}

/// Stacked LSTM with gate order input, forget, cell, output.
#[derive(Clone, Debug)]
pub struct Lstm {
    layers: Vec<LstmLayer>,
    pub inputs: usize,
}

/// Hidden and cell values per layer, each `[batch, hidden]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<Tensor>,
    pub c: Vec<Tensor>,
}

/// Recorded per-layer `(h, c)` pairs.
pub type LstmVars<'t> = Vec<(Var<'t>, Var<'t>)>;

impl LstmState {
    pub fn bind<'t>(&self, tape: &'t Tape) -> LstmVars<'t> {
        self.h
            .iter()
            .zip(&self.c)
            .map(|(h, c)| (tape.constant(h.clone()), tape.constant(c.clone())))
            .collect()
    }

    /// Copies recorded values out, cutting the gradient path.
    pub fn detach(vars: &LstmVars<'_>) -> Self {
        Self {
            h: vars.iter().map(|(h, _)| h.value().clone()).collect(),
            c: vars.iter().map(|(_, c)| c.value().clone()).collect(),
        }
    }
}

pub const LSTM_LAYERS: usize = 2;
pub const LSTM_HIDDEN: usize = 50;

impl Lstm {
    pub fn new<R: Rng + ?Sized>(params: &mut ParamSet, inputs: usize, hidden: usize, layers: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden.max(1) as f64).sqrt();
        let layers = (0..layers)
            .map(|l| {
                let fan_in = if l == 0 { inputs } else { hidden };
                LstmLayer {
                    input_weight: params.push(Tensor::uniform(&[fan_in, 4 * hidden], bound, rng)),
                    hidden_weight: params.push(Tensor::uniform(&[hidden, 4 * hidden], bound, rng)),
                    bias: params.push(Tensor::uniform(&[4 * hidden], bound, rng)),
                    hidden,
                }
            })
            .collect();
        Self { layers, inputs }
    }

    pub fn hidden(&self) -> usize {
        self.layers[0].hidden
    }

    pub fn zero_state(&self, batch: usize) -> LstmState {
        let z: Vec<Tensor> = self.layers.iter().map(|l| Tensor::zeros(&[batch, l.hidden])).collect();
        LstmState { h: z.clone(), c: z }
    }

    /// One time step; returns the top layer's hidden value and the new state.
    pub fn step<'t>(&self, b: &Bound<'t>, x: Var<'t>, state: &LstmVars<'t>) -> Result<(Var<'t>, LstmVars<'t>)> {
        if state.len() != self.layers.len() {
            return Err(Error::shape("lstm", format!("{} state layers for {} layers", state.len(), self.layers.len())));
        }
        let mut input = x;
        let mut next = Vec::with_capacity(self.layers.len());
        for (layer, &(h, c)) in self.layers.iter().zip(state) {
            let n = layer.hidden;
            let z = input
                .matmul(b.get(layer.input_weight))?
                .add(h.matmul(b.get(layer.hidden_weight))?)?
                .add_row(b.get(layer.bias))?;
            let i = z.slice_cols(0, n)?.sigmoid();
            let f = z.slice_cols(n, n)?.sigmoid();
            let g = z.slice_cols(2 * n, n)?.tanh();
            let o = z.slice_cols(3 * n, n)?.sigmoid();
            let c2 = f.mul(c)?.add(i.mul(g)?)?;
            let h2 = o.mul(c2.tanh())?;
            next.push((h2, c2));
            input = h2;
        }
        Ok((input, next))
    }

    /// Runs a whole sequence from `state`, returning each step's top hidden value.
    pub fn forward_seq<'t>(&self, b: &Bound<'t>, xs: &[Var<'t>], state: LstmVars<'t>) -> Result<(Vec<Var<'t>>, LstmVars<'t>)> {
        let mut state = state;
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            let (h, s) = self.step(b, x, &state)?;
            out.push(h);
            state = s;
        }
        Ok((out, state))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn heads_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = ParamSet::new();
        let a = actor(&mut p, 6, 4, &mut rng);
        let g = grounder(&mut p, 2, 5, 32, 0.2, &mut rng);
        let x = Tensor::from_rows(&[vec![0.1, -0.3, 0.5, 1.0, 0.0, 0.0], vec![1.0; 6]]).unwrap();
        let y = a.infer(&p, &x).unwrap();
        for r in 0..2 {
            assert!((y.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let y = g.infer(&p, &Tensor::from_rows(&[vec![0.25, 0.75]]).unwrap()).unwrap();
        assert!((y.data().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(y.data().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn lstm_zero_input_and_state_from_zero_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p = ParamSet::new();
        let lstm = Lstm::new(&mut p, 3, LSTM_HIDDEN, LSTM_LAYERS, &mut rng);
        p.tensors_mut().iter_mut().for_each(|t| t.data_mut().iter_mut().for_each(|x| *x = 0.0));
        let tape = Tape::new();
        let b = p.bind(&tape);
        let s = lstm.zero_state(1).bind(&tape);
        let (h, _) = lstm.step(&b, tape.constant(Tensor::zeros(&[1, 3])), &s).unwrap();
        assert!(h.value().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lstm_hidden_stays_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = ParamSet::new();
        let lstm = Lstm::new(&mut p, 2, 8, 2, &mut rng);
        let mut state = lstm.zero_state(1);
        for t in 0..200 {
            let tape = Tape::new();
            let b = p.bind_frozen(&tape);
            let x = tape.constant(Tensor::from_rows(&[vec![(t as f64).sin() * 5.0, 3.0]]).unwrap());
            let (h, s) = lstm.step(&b, x, &state.bind(&tape)).unwrap();
            assert!(h.value().data().iter().all(|v| v.is_finite() && v.abs() <= 1.0));
            state = LstmState::detach(&s);
        }
    }
}
