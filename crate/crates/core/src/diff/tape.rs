use std::cell::{Ref, RefCell};

use crate::error::{Error, Result};

use super::tensor::Tensor;

/// Floor applied inside [`Var::ln`] so that zero probabilities give a large
/// finite loss instead of infinity.
pub const LOG_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(usize, usize),
    Add(usize, usize),
    AddRow(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Scale(usize, f64),
    AddScalar(usize),
    MulConst(usize, Tensor),
    Concat(Vec<usize>),
    SliceCols(usize, usize),
    SliceRows(usize, usize),
    Reshape(usize),
    Tanh(usize),
    Relu(usize),
    Sigmoid(usize),
    Exp(usize),
    Ln(usize),
    Square(usize),
    Softmax(usize, f64),
    LogSoftmax(usize),
    Pick(usize, Vec<usize>),
    Sum(usize),
    SumCols(usize),
    Transition { state: usize, symbols: usize, table: usize },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Records the operations of one forward pass for a single backward sweep.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A differentiable input.
    pub fn leaf(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf, true)
    }

    /// An input that never receives a gradient.
    pub fn constant(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf, false)
    }

    fn push(&self, value: Tensor, op: Op, needs_grad: bool) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { value, op, needs_grad });
        Var {
            tape: self,
            id: nodes.len() - 1,
        }
    }

    fn needs(&self, ids: &[usize]) -> bool {
        let nodes = self.nodes.borrow();
        ids.iter().any(|&i| nodes[i].needs_grad)
    }

    /// Gradients of the scalar `loss` with respect to every recorded value.
    pub fn backward(&self, loss: Var<'_>) -> Result<Grads> {
        assert!(std::ptr::eq(loss.tape, self), "loss belongs to another tape");
        let nodes = self.nodes.borrow();
        let out = &nodes[loss.id].value;
        if out.len() != 1 {
            return Err(Error::shape("backward", format!("loss must be a scalar, got shape {:?}", out.shape())));
        }
        if !out.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.id + 1];
        grads[loss.id] = Some(Tensor::full(out.shape(), 1.0));
        for id in (0..=loss.id).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &nodes[id];
            if node.needs_grad {
                propagate(&nodes, node, &g, &mut grads);
            }
            grads[id] = Some(g);
        }
        Ok(Grads { grads })
    }
}

fn accumulate(grads: &mut [Option<Tensor>], nodes: &[Node], id: usize, g: Tensor) {
    if !nodes[id].needs_grad {
        return;
    }
    match &mut grads[id] {
        Some(acc) => acc.add_assign(&g),
        slot => *slot = Some(g),
    }
}

fn propagate(nodes: &[Node], node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) {
    let val = |i: usize| &nodes[i].value;
    let gd = g.data();
    match &node.op {
        Op::Leaf => {}
        Op::MatMul(a, b) => {
            let (av, bv) = (val(*a), val(*b));
            let (m, k, n) = (av.shape()[0], av.shape()[1], bv.shape()[1]);
            if nodes[*a].needs_grad {
                let mut da = vec![0.0; m * k];
                for i in 0..m {
                    let grow = &gd[i * n..(i + 1) * n];
                    for l in 0..k {
                        let brow = &bv.data()[l * n..(l + 1) * n];
                        da[i * k + l] = grow.iter().zip(brow).map(|(x, y)| x * y).sum();
                    }
                }
                accumulate(grads, nodes, *a, Tensor::new(av.shape(), da).unwrap());
            }
            if nodes[*b].needs_grad {
                let mut db = vec![0.0; k * n];
                for i in 0..m {
                    for l in 0..k {
                        let ail = av.data()[i * k + l];
                        if ail == 0.0 {
                            continue;
                        }
                        let row = &mut db[l * n..(l + 1) * n];
                        for (d, &gij) in row.iter_mut().zip(&gd[i * n..(i + 1) * n]) {
                            *d += ail * gij;
                        }
                    }
                }
                accumulate(grads, nodes, *b, Tensor::new(bv.shape(), db).unwrap());
            }
        }
        Op::Add(a, b) => {
            accumulate(grads, nodes, *a, g.reshape(val(*a).shape()).unwrap());
            accumulate(grads, nodes, *b, g.reshape(val(*b).shape()).unwrap());
        }
        Op::AddRow(a, b) => {
            accumulate(grads, nodes, *a, g.clone());
            let n = val(*b).len();
            let mut db = vec![0.0; n];
            for row in gd.chunks(n) {
                for (d, x) in db.iter_mut().zip(row) {
                    *d += x;
                }
            }
            accumulate(grads, nodes, *b, Tensor::new(val(*b).shape(), db).unwrap());
        }
        Op::Sub(a, b) => {
            accumulate(grads, nodes, *a, g.reshape(val(*a).shape()).unwrap());
            accumulate(grads, nodes, *b, g.map(|x| -x).reshape(val(*b).shape()).unwrap());
        }
        Op::Mul(a, b) => {
            let (av, bv) = (val(*a), val(*b));
            let da = gd.iter().zip(bv.data()).map(|(x, y)| x * y).collect();
            let db = gd.iter().zip(av.data()).map(|(x, y)| x * y).collect();
            accumulate(grads, nodes, *a, Tensor::new(av.shape(), da).unwrap());
            accumulate(grads, nodes, *b, Tensor::new(bv.shape(), db).unwrap());
        }
        Op::Scale(a, c) => accumulate(grads, nodes, *a, g.map(|x| x * c)),
        Op::AddScalar(a) => accumulate(grads, nodes, *a, g.clone()),
        Op::MulConst(a, k) => {
            let da = gd.iter().zip(k.data()).map(|(x, y)| x * y).collect();
            accumulate(grads, nodes, *a, Tensor::new(g.shape(), da).unwrap());
        }
        Op::Concat(parts) => {
            let total = g.cols();
            let rows = g.rows();
            let mut offset = 0;
            for &p in parts {
                let pv = val(p);
                let w = pv.cols();
                let mut dp = Vec::with_capacity(rows * w);
                for r in 0..rows {
                    dp.extend_from_slice(&gd[r * total + offset..r * total + offset + w]);
                }
                accumulate(grads, nodes, p, Tensor::new(pv.shape(), dp).unwrap());
                offset += w;
            }
        }
        Op::SliceCols(a, start) => {
            let av = val(*a);
            let (total, w) = (av.cols(), g.cols());
            let mut da = vec![0.0; av.len()];
            for r in 0..g.rows() {
                da[r * total + start..r * total + start + w].copy_from_slice(&gd[r * w..(r + 1) * w]);
            }
            accumulate(grads, nodes, *a, Tensor::new(av.shape(), da).unwrap());
        }
        Op::SliceRows(a, start) => {
            let av = val(*a);
            let c = av.cols();
            let mut da = vec![0.0; av.len()];
            da[start * c..start * c + gd.len()].copy_from_slice(gd);
            accumulate(grads, nodes, *a, Tensor::new(av.shape(), da).unwrap());
        }
        Op::Reshape(a) => accumulate(grads, nodes, *a, g.reshape(val(*a).shape()).unwrap()),
        Op::Tanh(a) => {
            let y = node.value.data();
            let da = gd.iter().zip(y).map(|(g, y)| g * (1.0 - y * y)).collect();
            accumulate(grads, nodes, *a, Tensor::new(g.shape(), da).unwrap());
        }
        Op::Relu(a) => {
            let x = val(*a).data();
            let da = gd.iter().zip(x).map(|(g, &x)| if x > 0.0 { *g } else { 0.0 }).collect();
            accumulate(grads, nodes, *a, Tensor::new(g.shape(), da).unwrap());
        }
        Op::Sigmoid(a) => {
            let y = node.value.data();
            let da = gd.iter().zip(y).map(|(g, y)| g * y * (1.0 - y)).collect();
            accumulate(grads, nodes, *a, Tensor::new(g.shape(), da).unwrap());
        }
        Op::Exp(a) => {
            let y = node.value.data();
            let da = gd.iter().zip(y).map(|(g, y)| g * y).collect();
            accumulate(grads, nodes, *a, Tensor::new(g.shape(), da).unwrap());
        }
        Op::Ln(a) => {
            let x = val(*a).data();
            let da = gd
                .iter()
                .zip(x)
                .map(|(g, &x)| if x > LOG_FLOOR { g / x } else { 0.0 })
                .collect();
            accumulate(grads, nodes, *a, Tensor::new(g.shape(), da).unwrap());
        }
        Op::Square(a) => {
            let x = val(*a).data();
            let da = gd.iter().zip(x).map(|(g, x)| 2.0 * g * x).collect();
            accumulate(grads, nodes, *a, Tensor::new(g.shape(), da).unwrap());
        }
        Op::Softmax(a, tau) => {
            let y = &node.value;
            let c = y.cols();
            let mut da = vec![0.0; y.len()];
            for r in 0..y.rows() {
                let yr = y.row(r);
                let gr = &gd[r * c..(r + 1) * c];
                let dot: f64 = yr.iter().zip(gr).map(|(y, g)| y * g).sum();
                for j in 0..c {
                    da[r * c + j] = yr[j] * (gr[j] - dot) / tau;
                }
            }
            accumulate(grads, nodes, *a, Tensor::new(y.shape(), da).unwrap());
        }
        Op::LogSoftmax(a) => {
            let y = &node.value;
            let c = y.cols();
            let mut da = vec![0.0; y.len()];
            for r in 0..y.rows() {
                let gr = &gd[r * c..(r + 1) * c];
                let total: f64 = gr.iter().sum();
                for (j, ly) in y.row(r).iter().enumerate() {
                    da[r * c + j] = gr[j] - ly.exp() * total;
                }
            }
            accumulate(grads, nodes, *a, Tensor::new(y.shape(), da).unwrap());
        }
        Op::Pick(a, idx) => {
            let av = val(*a);
            let c = av.cols();
            let mut da = vec![0.0; av.len()];
            for (r, &k) in idx.iter().enumerate() {
                da[r * c + k] = gd[r];
            }
            accumulate(grads, nodes, *a, Tensor::new(av.shape(), da).unwrap());
        }
        Op::Sum(a) => {
            let av = val(*a);
            accumulate(grads, nodes, *a, Tensor::full(av.shape(), gd[0]));
        }
        Op::SumCols(a) => {
            let av = val(*a);
            let c = av.cols();
            let da = (0..av.len()).map(|i| gd[i / c]).collect();
            accumulate(grads, nodes, *a, Tensor::new(av.shape(), da).unwrap());
        }
        Op::Transition { state, symbols, table } => {
            let (qv, pv, tv) = (val(*state), val(*symbols), val(*table));
            let (b, q) = (qv.shape()[0], qv.shape()[1]);
            let p = pv.shape()[1];
            let (qd, pd, td) = (qv.data(), pv.data(), tv.data());
            let mut dq = vec![0.0; qd.len()];
            let mut dp = vec![0.0; pd.len()];
            let mut dt = vec![0.0; td.len()];
            for bi in 0..b {
                let gb = &gd[bi * q..(bi + 1) * q];
                for i in 0..p {
                    let w = pd[bi * p + i];
                    let mut acc_p = 0.0;
                    for k in 0..q {
                        let row = &td[(i * q + k) * q..(i * q + k + 1) * q];
                        let s: f64 = row.iter().zip(gb).map(|(t, g)| t * g).sum();
                        dq[bi * q + k] += w * s;
                        acc_p += qd[bi * q + k] * s;
                        let coeff = w * qd[bi * q + k];
                        if coeff != 0.0 {
                            let drow = &mut dt[(i * q + k) * q..(i * q + k + 1) * q];
                            for (d, g) in drow.iter_mut().zip(gb) {
                                *d += coeff * g;
                            }
                        }
                    }
                    dp[bi * p + i] += acc_p;
                }
            }
            accumulate(grads, nodes, *state, Tensor::new(qv.shape(), dq).unwrap());
            accumulate(grads, nodes, *symbols, Tensor::new(pv.shape(), dp).unwrap());
            accumulate(grads, nodes, *table, Tensor::new(tv.shape(), dt).unwrap());
        }
    }
}

/// Result of [`Tape::backward`].
#[derive(Debug)]
pub struct Grads {
    grads: Vec<Option<Tensor>>,
}

impl Grads {
    /// Gradient with respect to `v`; zeros when the loss does not depend on it.
    pub fn wrt(&self, v: Var<'_>) -> Tensor {
        match self.grads.get(v.id).and_then(Option::as_ref) {
            Some(g) => g.clone(),
            None => Tensor::zeros(v.tape.nodes.borrow()[v.id].value.shape()),
        }
    }
}

fn elementwise(a: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    a.map(f)
}

fn row_softmax(x: &Tensor, tau: f64) -> Tensor {
    let c = x.cols();
    let mut out = Vec::with_capacity(x.len());
    for r in 0..x.rows() {
        let row = x.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let start = out.len();
        let mut total = 0.0;
        for &v in row {
            let e = ((v - max) / tau).exp();
            total += e;
            out.push(e);
        }
        for e in &mut out[start..start + c] {
            *e /= total;
        }
    }
    Tensor::new(x.shape(), out).unwrap()
}

fn row_log_softmax(x: &Tensor) -> Tensor {
    let mut out = Vec::with_capacity(x.len());
    for r in 0..x.rows() {
        let row = x.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        out.extend(row.iter().map(|v| v - lse));
    }
    Tensor::new(x.shape(), out).unwrap()
}

impl<'t> Var<'t> {
    pub fn id(self) -> usize {
        self.id
    }

    pub fn tape(self) -> &'t Tape {
        self.tape
    }

    /// Borrow of the recorded value. Drop it before recording new ops.
    pub fn value(self) -> Ref<'t, Tensor> {
        Ref::map(self.tape.nodes.borrow(), |n| &n[self.id].value)
    }

    pub fn shape(self) -> Vec<usize> {
        self.value().shape().to_vec()
    }

    pub fn item(self) -> f64 {
        self.value().item()
    }

    fn same_tape(self, other: Var<'t>) {
        assert!(std::ptr::eq(self.tape, other.tape), "values from different tapes");
    }

    fn unary(self, value: Tensor, op: Op) -> Var<'t> {
        let needs = self.tape.needs(&[self.id]);
        self.tape.push(value, op, needs)
    }

    fn binary(self, other: Var<'t>, value: Tensor, op: Op) -> Var<'t> {
        let needs = self.tape.needs(&[self.id, other.id]);
        self.tape.push(value, op, needs)
    }

    /// Matrix product of `[m, k]` and `[k, n]`.
    pub fn matmul(self, other: Var<'t>) -> Result<Var<'t>> {
        self.same_tape(other);
        let value = {
            let (a, b) = (self.value(), other.value());
            let (sa, sb) = (a.shape(), b.shape());
            if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
                return Err(Error::shape("matmul", format!("{sa:?} x {sb:?}")));
            }
            let (m, k, n) = (sa[0], sa[1], sb[1]);
            let mut out = vec![0.0; m * n];
            let (ad, bd) = (a.data(), b.data());
            for i in 0..m {
                let orow = &mut out[i * n..(i + 1) * n];
                for l in 0..k {
                    let x = ad[i * k + l];
                    if x == 0.0 {
                        continue;
                    }
                    for (o, y) in orow.iter_mut().zip(&bd[l * n..(l + 1) * n]) {
                        *o += x * y;
                    }
                }
            }
            Tensor::new(&[m, n], out)?
        };
        Ok(self.binary(other, value, Op::MatMul(self.id, other.id)))
    }

    fn zip_same(self, other: Var<'t>, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        self.same_tape(other);
        let (a, b) = (self.value(), other.value());
        if a.shape() != b.shape() {
            return Err(Error::shape(op, format!("{:?} vs {:?}", a.shape(), b.shape())));
        }
        let data = a.data().iter().zip(b.data()).map(|(x, y)| f(*x, *y)).collect();
        Tensor::new(a.shape(), data)
    }

    pub fn add(self, other: Var<'t>) -> Result<Var<'t>> {
        let value = self.zip_same(other, "add", |x, y| x + y)?;
        Ok(self.binary(other, value, Op::Add(self.id, other.id)))
    }

    pub fn sub(self, other: Var<'t>) -> Result<Var<'t>> {
        let value = self.zip_same(other, "sub", |x, y| x - y)?;
        Ok(self.binary(other, value, Op::Sub(self.id, other.id)))
    }

    /// Elementwise product.
    pub fn mul(self, other: Var<'t>) -> Result<Var<'t>> {
        let value = self.zip_same(other, "mul", |x, y| x * y)?;
        Ok(self.binary(other, value, Op::Mul(self.id, other.id)))
    }

    /// Adds the vector `row` to every last-axis row.
    pub fn add_row(self, row: Var<'t>) -> Result<Var<'t>> {
        self.same_tape(row);
        let value = {
            let (a, b) = (self.value(), row.value());
            if b.len() != a.cols() || b.shape().len() > 2 || b.rows() > 1 {
                return Err(Error::shape("add_row", format!("{:?} + row {:?}", a.shape(), b.shape())));
            }
            let n = b.len();
            let data = a.data().iter().enumerate().map(|(i, x)| x + b.data()[i % n]).collect();
            Tensor::new(a.shape(), data)?
        };
        Ok(self.binary(row, value, Op::AddRow(self.id, row.id)))
    }

    pub fn scale(self, c: f64) -> Var<'t> {
        let value = elementwise(&self.value(), |x| x * c);
        self.unary(value, Op::Scale(self.id, c))
    }

    pub fn add_scalar(self, c: f64) -> Var<'t> {
        let value = elementwise(&self.value(), |x| x + c);
        self.unary(value, Op::AddScalar(self.id))
    }

    /// Elementwise product with a constant of the same shape.
    pub fn mul_const(self, k: &Tensor) -> Result<Var<'t>> {
        let value = {
            let a = self.value();
            if a.shape() != k.shape() {
                return Err(Error::shape("mul_const", format!("{:?} vs {:?}", a.shape(), k.shape())));
            }
            let data = a.data().iter().zip(k.data()).map(|(x, y)| x * y).collect();
            Tensor::new(a.shape(), data)?
        };
        Ok(self.unary(value, Op::MulConst(self.id, k.clone())))
    }

    /// Joins matrices with equal row counts along the last axis.
    pub fn concat(parts: &[Var<'t>]) -> Result<Var<'t>> {
        let first = *parts.first().ok_or_else(|| Error::shape("concat", "no inputs"))?;
        let value = {
            let vals: Vec<_> = parts.iter().map(|p| {
                first.same_tape(*p);
                p.value()
            }).collect();
            let rows = vals[0].rows();
            if vals.iter().any(|v| v.shape().len() != 2 || v.rows() != rows) {
                let shapes: Vec<_> = vals.iter().map(|v| v.shape().to_vec()).collect();
                return Err(Error::shape("concat", format!("{shapes:?}")));
            }
            let total: usize = vals.iter().map(|v| v.cols()).sum();
            let mut data = Vec::with_capacity(rows * total);
            for r in 0..rows {
                for v in &vals {
                    data.extend_from_slice(v.row(r));
                }
            }
            Tensor::new(&[rows, total], data)?
        };
        let ids: Vec<usize> = parts.iter().map(|p| p.id).collect();
        let needs = first.tape.needs(&ids);
        Ok(first.tape.push(value, Op::Concat(ids), needs))
    }

    /// Columns `start..start + width` of a matrix.
    pub fn slice_cols(self, start: usize, width: usize) -> Result<Var<'t>> {
        let value = {
            let a = self.value();
            if a.shape().len() != 2 || start + width > a.cols() {
                return Err(Error::shape("slice_cols", format!("{:?}[.., {start}..{}]", a.shape(), start + width)));
            }
            let mut data = Vec::with_capacity(a.rows() * width);
            for r in 0..a.rows() {
                data.extend_from_slice(&a.row(r)[start..start + width]);
            }
            Tensor::new(&[a.rows(), width], data)?
        };
        Ok(self.unary(value, Op::SliceCols(self.id, start)))
    }

    /// Rows `start..start + count` of a matrix.
    pub fn slice_rows(self, start: usize, count: usize) -> Result<Var<'t>> {
        let value = {
            let a = self.value();
            if a.shape().len() != 2 || start + count > a.rows() {
                return Err(Error::shape("slice_rows", format!("{:?}[{start}..{}, ..]", a.shape(), start + count)));
            }
            let c = a.cols();
            Tensor::new(&[count, c], a.data()[start * c..(start + count) * c].to_vec())?
        };
        Ok(self.unary(value, Op::SliceRows(self.id, start)))
    }

    pub fn reshape(self, shape: &[usize]) -> Result<Var<'t>> {
        let value = self.value().reshape(shape)?;
        Ok(self.unary(value, Op::Reshape(self.id)))
    }

    pub fn tanh(self) -> Var<'t> {
        let value = elementwise(&self.value(), f64::tanh);
        self.unary(value, Op::Tanh(self.id))
    }

    pub fn relu(self) -> Var<'t> {
        let value = elementwise(&self.value(), |x| x.max(0.0));
        self.unary(value, Op::Relu(self.id))
    }

    pub fn sigmoid(self) -> Var<'t> {
        let value = elementwise(&self.value(), |x| 1.0 / (1.0 + (-x).exp()));
        self.unary(value, Op::Sigmoid(self.id))
    }

    pub fn exp(self) -> Var<'t> {
        let value = elementwise(&self.value(), f64::exp);
        self.unary(value, Op::Exp(self.id))
    }

    /// Natural log, with inputs below [`LOG_FLOOR`] clamped.
    pub fn ln(self) -> Var<'t> {
        let value = elementwise(&self.value(), |x| x.max(LOG_FLOOR).ln());
        self.unary(value, Op::Ln(self.id))
    }

    pub fn square(self) -> Var<'t> {
        let value = elementwise(&self.value(), |x| x * x);
        self.unary(value, Op::Square(self.id))
    }

    /// Softmax along the last axis.
    pub fn softmax(self) -> Var<'t> {
        let value = row_softmax(&self.value(), 1.0);
        self.unary(value, Op::Softmax(self.id, 1.0))
    }

    /// Softmax of `x / tau` along the last axis.
    pub fn tau_softmax(self, tau: f64) -> Result<Var<'t>> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::input(format!("temperature must lie in (0, 1], got {tau}")));
        }
        let value = row_softmax(&self.value(), tau);
        Ok(self.unary(value, Op::Softmax(self.id, tau)))
    }

    pub fn log_softmax(self) -> Var<'t> {
        let value = row_log_softmax(&self.value());
        self.unary(value, Op::LogSoftmax(self.id))
    }

    /// Entry `index[r]` of each last-axis row `r`, as a vector.
    pub fn pick(self, index: &[usize]) -> Result<Var<'t>> {
        let value = {
            let a = self.value();
            if index.len() != a.rows() || index.iter().any(|&k| k >= a.cols()) {
                return Err(Error::shape("pick", format!("{} indices into {:?}", index.len(), a.shape())));
            }
            Tensor::vector(index.iter().enumerate().map(|(r, &k)| a.row(r)[k]).collect())
        };
        Ok(self.unary(value, Op::Pick(self.id, index.to_vec())))
    }

    pub fn sum(self) -> Var<'t> {
        let value = Tensor::scalar(self.value().data().iter().sum());
        self.unary(value, Op::Sum(self.id))
    }

    pub fn mean(self) -> Var<'t> {
        let n = self.value().len().max(1);
        self.sum().scale(1.0 / n as f64)
    }

    /// Sum over the last axis, one value per row.
    pub fn sum_cols(self) -> Var<'t> {
        let value = {
            let a = self.value();
            Tensor::vector((0..a.rows()).map(|r| a.row(r).iter().sum()).collect())
        };
        self.unary(value, Op::SumCols(self.id))
    }

    /// Mean negative log-likelihood of `targets` under row logits.
    pub fn cross_entropy_logits(self, targets: &[usize]) -> Result<Var<'t>> {
        Ok(self.log_softmax().pick(targets)?.mean().scale(-1.0))
    }

    /// Mean negative log-likelihood of `targets` under row probabilities.
    pub fn cross_entropy_probs(self, targets: &[usize]) -> Result<Var<'t>> {
        Ok(self.pick(targets)?.ln().mean().scale(-1.0))
    }

    /// One step of a probabilistic automaton over a batch.
    ///
    /// `self` is the state distribution `[B, Q]`, `symbols` the symbol
    /// distribution `[B, P]`, and `table` the per-symbol transition
    /// matrices `[P, Q, Q]`. Row `b` of the result is
    /// `sum_i symbols[b, i] * (self[b] · table[i])`.
    pub fn transition(self, symbols: Var<'t>, table: Var<'t>) -> Result<Var<'t>> {
        self.same_tape(symbols);
        self.same_tape(table);
        let value = {
            let (qv, pv, tv) = (self.value(), symbols.value(), table.value());
            let (sq, sp, st) = (qv.shape(), pv.shape(), tv.shape());
            if sq.len() != 2 || sp.len() != 2 || st.len() != 3 || sq[0] != sp[0] || st[0] != sp[1] || st[1] != sq[1] || st[2] != sq[1] {
                return Err(Error::shape("transition", format!("state {sq:?}, symbols {sp:?}, table {st:?}")));
            }
            let (b, q, p) = (sq[0], sq[1], sp[1]);
            let (qd, pd, td) = (qv.data(), pv.data(), tv.data());
            let mut out = vec![0.0; b * q];
            for bi in 0..b {
                let orow = &mut out[bi * q..(bi + 1) * q];
                for i in 0..p {
                    let w = pd[bi * p + i];
                    if w == 0.0 {
                        continue;
                    }
                    for k in 0..q {
                        let c = w * qd[bi * q + k];
                        if c == 0.0 {
                            continue;
                        }
                        for (o, t) in orow.iter_mut().zip(&td[(i * q + k) * q..(i * q + k + 1) * q]) {
                            *o += c * t;
                        }
                    }
                }
            }
            Tensor::new(&[b, q], out)?
        };
        let needs = self.tape.needs(&[self.id, symbols.id, table.id]);
        Ok(self.tape.push(
            value,
            Op::Transition {
                state: self.id,
                symbols: symbols.id,
                table: table.id,
            },
            needs,
        ))
    }
}
