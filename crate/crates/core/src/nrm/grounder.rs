use std::io::{Read, Write};

use rand::Rng;

use crate::diff::{self, Bound, Mlp, ParamSet, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Neural symbol grounder: maps a state encoding to a distribution over
/// symbols.
#[derive(Clone, Debug)]
pub struct Grounder {
    pub net: Mlp,
    pub params: ParamSet,
    hidden: usize,
}

pub const GROUNDER_HIDDEN: usize = 64;

const MAGIC: &[u8; 8] = b"NRMGRND1";

impl Grounder {
    pub fn new<R: Rng + ?Sized>(inputs: usize, symbols: usize, hidden: usize, dropout: f64, rng: &mut R) -> Self {
        let mut params = ParamSet::new();
        let net = diff::grounder(&mut params, inputs, symbols, hidden, dropout, rng);
        Self { net, params, hidden }
    }

    pub fn inputs(&self) -> usize {
        self.net.inputs()
    }

    pub fn symbols(&self) -> usize {
        self.net.outputs()
    }

    pub fn forward<'t>(&self, b: &Bound<'t>, x: Var<'t>) -> Result<Var<'t>> {
        self.net.forward(b, x)
    }

    /// Symbol distributions for a batch of encodings `[n, inputs]`.
    pub fn probs(&self, xs: &Tensor) -> Result<Tensor> {
        if xs.shape().len() != 2 || xs.cols() != self.inputs() {
            return Err(Error::input(format!(
                "grounder expects [n, {}] inputs, got {:?}",
                self.inputs(),
                xs.shape()
            )));
        }
        self.net.infer(&self.params, xs)
    }

    /// Most likely symbol per row.
    pub fn predict(&self, xs: &Tensor) -> Result<Vec<usize>> {
        Ok(self.probs(xs)?.argmax_rows())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [self.inputs(), self.hidden, self.symbols()] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        w.write_all(&self.net.dropout.to_le_bytes())?;
        self.params.write_to(w)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::input("not a grounder checkpoint"));
        }
        let mut dims = [0usize; 3];
        for d in &mut dims {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *d = u64::from_le_bytes(b) as usize;
        }
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let dropout = f64::from_le_bytes(b);
        let params = ParamSet::read_from(r)?;
        let mut probe = rand::rngs::mock::StepRng::new(0, 0);
        let mut g = Self::new(dims[0], dims[2], dims[1], dropout, &mut probe);
        let shapes_match = g.params.len() == params.len()
            && g.params.tensors().iter().zip(params.tensors()).all(|(a, b)| a.shape() == b.shape());
        if !shapes_match {
            return Err(Error::input("grounder checkpoint shapes do not match its header"));
        }
        g.params = params;
        Ok(g)
    }

    /// Records the parameters on `tape` for training.
    pub fn bind<'t>(&self, tape: &'t Tape) -> Bound<'t> {
        self.params.bind(tape)
    }
}
