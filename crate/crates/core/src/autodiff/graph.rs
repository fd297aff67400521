use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Handle to a node on a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    Exp(Var),
    Log(Var),
    Gelu(Var),
    Transpose(Var),
    Softmax(Var),
    LayerNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        normed: Vec<f64>,
        inv_std: Vec<f64>,
    },
    Sum(Var),
    Mean(Var),
    MeanRows(Var),
    Select(Var, usize),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Tape for one forward/backward pass.
///
/// Nodes are appended in evaluation order, so the node vector is already a
/// topological order and the backward sweep is a reverse scan. Build a fresh
/// graph per forward pass; nothing on it is ever mutated after creation.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Reverse-mode gradients produced by [`Graph::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient with respect to `var`, or `None` if it does not depend on
    /// the loss (or does not require grad).
    pub fn get(&self, var: Var) -> Option<Tensor> {
        self.grads[var.0].as_ref().map(|g| {
            Tensor::new(self.shapes[var.0].clone(), g.clone()).expect("gradient shape")
        })
    }

    /// Gradient with respect to `var`, zero-filled when absent.
    pub fn wrt(&self, var: Var) -> Tensor {
        self.get(var)
            .unwrap_or_else(|| Tensor::zeros(&self.shapes[var.0]))
    }
}

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension {
            op,
            left: a.shape().to_vec(),
            right: b.shape().to_vec(),
        });
    }
    Ok(())
}

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

fn gelu_grad(x: f64) -> f64 {
    let cdf = 0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2));
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    cdf + x * pdf
}

/// `out[m×n] += a[m×k] · b[k×n]`
fn matmul_into(out: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in row.iter_mut().zip(brow) {
                *o += aip * bv;
            }
        }
    }
}

/// Swaps the last two axes; leading axes are treated as a batch.
fn transpose_last_two(shape: &[usize], data: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let nd = shape.len();
    let (r, c) = (shape[nd - 2], shape[nd - 1]);
    let mut out = vec![0.0; data.len()];
    for (src, dst) in data.chunks(r * c).zip(out.chunks_mut(r * c)) {
        for i in 0..r {
            for j in 0..c {
                dst[j * r + i] = src[i * c + j];
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape.swap(nd - 2, nd - 1);
    (new_shape, out)
}

fn accumulate(slot: &mut Option<Vec<f64>>, len: usize, f: impl FnOnce(&mut [f64])) {
    let buf = slot.get_or_insert_with(|| vec![0.0; len]);
    f(buf);
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Leaf whose gradient is tracked.
    pub fn variable(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn scalar(&mut self, value: f64) -> Var {
        self.constant(Tensor::scalar(value))
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.rg(v)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let (m, k) = ta.dims2("matmul")?;
        let (k2, n) = tb.dims2("matmul")?;
        if k != k2 {
            return Err(Error::Dimension {
                op: "matmul",
                left: ta.shape().to_vec(),
                right: tb.shape().to_vec(),
            });
        }
        let mut out = vec![0.0; m * n];
        matmul_into(&mut out, ta.data(), tb.data(), m, k, n);
        let value = Tensor::new(vec![m, n], out)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(value, Op::MatMul(a, b), rg))
    }

    fn binary(
        &mut self,
        op_name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        same_shape(op_name, ta, tb)?;
        let data = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let value = Tensor::new(ta.shape().to_vec(), data)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(value, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.value(b).data().iter().any(|&v| v == 0.0) {
            return Err(Error::Domain {
                op: "div",
                detail: "division by zero".into(),
            });
        }
        self.binary("div", a, b, |x, y| x / y, Op::Div(a, b))
    }

    /// Adds a length-`n` row vector to every row of an `[.., n]` tensor.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (ta, tr) = (self.value(a), self.value(row));
        let n = ta.last_dim();
        if tr.numel() != n {
            return Err(Error::Dimension {
                op: "add_row",
                left: ta.shape().to_vec(),
                right: tr.shape().to_vec(),
            });
        }
        let mut data = ta.data().to_vec();
        for chunk in data.chunks_mut(n) {
            for (d, &r) in chunk.iter_mut().zip(tr.data()) {
                *d += r;
            }
        }
        let value = Tensor::new(ta.shape().to_vec(), data)?;
        let rg = self.rg(a) || self.rg(row);
        Ok(self.push(value, Op::AddRow(a, row), rg))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|v| v * c);
        let rg = self.rg(a);
        self.push(value, Op::Scale(a, c), rg)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::exp);
        let rg = self.rg(a);
        self.push(value, Op::Exp(a), rg)
    }

    pub fn log(&mut self, a: Var) -> Result<Var> {
        if let Some(&bad) = self.value(a).data().iter().find(|&&v| v <= 0.0) {
            return Err(Error::Domain {
                op: "log",
                detail: format!("non-positive operand {bad}"),
            });
        }
        let value = self.value(a).map(f64::ln);
        let rg = self.rg(a);
        Ok(self.push(value, Op::Log(a), rg))
    }

    /// Exact GELU, `x · Φ(x)`.
    pub fn gelu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(gelu);
        let rg = self.rg(a);
        self.push(value, Op::Gelu(a), rg)
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let ta = self.value(a);
        if ta.ndim() < 2 {
            return Err(Error::Dimension {
                op: "transpose",
                left: ta.shape().to_vec(),
                right: vec![],
            });
        }
        let (shape, data) = transpose_last_two(ta.shape(), ta.data());
        let value = Tensor::new(shape, data)?;
        let rg = self.rg(a);
        Ok(self.push(value, Op::Transpose(a), rg))
    }

    pub fn softmax(&mut self, a: Var) -> Var {
        let ta = self.value(a);
        let n = ta.last_dim();
        let mut data = ta.data().to_vec();
        for row in data.chunks_mut(n) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                z += *v;
            }
            for v in row.iter_mut() {
                *v /= z;
            }
        }
        let value = Tensor::new(ta.shape().to_vec(), data).expect("softmax shape");
        let rg = self.rg(a);
        self.push(value, Op::Softmax(a), rg)
    }

    /// Layer normalization over the last axis with learnable scale and shift.
    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var) -> Result<Var> {
        let tx = self.value(x);
        let n = tx.last_dim();
        for p in [gamma, beta] {
            if self.value(p).numel() != n {
                return Err(Error::Dimension {
                    op: "layer_norm",
                    left: tx.shape().to_vec(),
                    right: self.value(p).shape().to_vec(),
                });
            }
        }
        let (g, b) = (self.value(gamma).data(), self.value(beta).data());
        let mut normed = Vec::with_capacity(tx.numel());
        let mut inv_std = Vec::with_capacity(tx.numel() / n);
        let mut out = Vec::with_capacity(tx.numel());
        for row in tx.data().chunks(n) {
            let mean = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let rstd = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            inv_std.push(rstd);
            for (j, &v) in row.iter().enumerate() {
                let xh = (v - mean) * rstd;
                normed.push(xh);
                out.push(xh * g[j] + b[j]);
            }
        }
        let value = Tensor::new(tx.shape().to_vec(), out)?;
        let rg = self.rg(x) || self.rg(gamma) || self.rg(beta);
        Ok(self.push(
            value,
            Op::LayerNorm {
                x,
                gamma,
                beta,
                normed,
                inv_std,
            },
            rg,
        ))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        let rg = self.rg(a);
        self.push(Tensor::scalar(s), Op::Sum(a), rg)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let s = t.data().iter().sum::<f64>() / t.numel() as f64;
        let rg = self.rg(a);
        self.push(Tensor::scalar(s), Op::Mean(a), rg)
    }

    /// Mean over the first axis of a 2-D tensor: `[m×n] -> [1×n]`.
    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        let t = self.value(a);
        let (m, n) = t.dims2("mean_rows")?;
        let mut out = vec![0.0; n];
        for row in t.data().chunks(n) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        for o in &mut out {
            *o /= m as f64;
        }
        let value = Tensor::new(vec![1, n], out)?;
        let rg = self.rg(a);
        Ok(self.push(value, Op::MeanRows(a), rg))
    }

    /// Picks one flat element as a scalar.
    pub fn select(&mut self, a: Var, index: usize) -> Result<Var> {
        let t = self.value(a);
        let v = *t.data().get(index).ok_or_else(|| Error::Dimension {
            op: "select",
            left: t.shape().to_vec(),
            right: vec![index],
        })?;
        let rg = self.rg(a);
        Ok(self.push(Tensor::scalar(v), Op::Select(a, index), rg))
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if !self.value(loss).is_scalar() {
            return Err(Error::contract(format!(
                "backward needs a scalar output, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let count = loss.0 + 1;
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; count];
        grads[loss.0] = Some(vec![1.0]);

        for i in (0..count).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.backprop_node(node, &g, &mut grads);
            grads[i] = Some(g);
        }

        let shapes = self.nodes[..count]
            .iter()
            .map(|n| n.value.shape().to_vec())
            .collect();
        // Only nodes that require grad expose one.
        for (slot, node) in grads.iter_mut().zip(&self.nodes) {
            if !node.requires_grad {
                *slot = None;
            }
        }
        Ok(Gradients { grads, shapes })
    }

    fn backprop_node(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let val = |v: Var| &self.nodes[v.0].value;
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            if self.nodes[v.0].requires_grad {
                let len = self.nodes[v.0].value.numel();
                accumulate(&mut grads[v.0], len, |buf| f(buf));
            }
        };

        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (val(*a), val(*b));
                let (m, k) = (ta.shape()[0], ta.shape()[1]);
                let n = tb.shape()[1];
                acc(*a, &mut |buf| {
                    // dA = dY · Bᵀ
                    let (_, bt) = transpose_last_two(tb.shape(), tb.data());
                    matmul_into(buf, g, &bt, m, n, k);
                });
                acc(*b, &mut |buf| {
                    // dB = Aᵀ · dY
                    let (_, at) = transpose_last_two(ta.shape(), ta.data());
                    matmul_into(buf, &at, g, k, m, n);
                });
            }
            Op::Add(a, b) => {
                for v in [*a, *b] {
                    acc(v, &mut |buf| buf.iter_mut().zip(g).for_each(|(o, &d)| *o += d));
                }
            }
            Op::Sub(a, b) => {
                acc(*a, &mut |buf| buf.iter_mut().zip(g).for_each(|(o, &d)| *o += d));
                acc(*b, &mut |buf| buf.iter_mut().zip(g).for_each(|(o, &d)| *o -= d));
            }
            Op::Mul(a, b) => {
                let (da, db) = (val(*a).data(), val(*b).data());
                acc(*a, &mut |buf| {
                    for ((o, &d), &y) in buf.iter_mut().zip(g).zip(db) {
                        *o += d * y;
                    }
                });
                acc(*b, &mut |buf| {
                    for ((o, &d), &x) in buf.iter_mut().zip(g).zip(da) {
                        *o += d * x;
                    }
                });
            }
            Op::Div(a, b) => {
                let (da, db) = (val(*a).data(), val(*b).data());
                acc(*a, &mut |buf| {
                    for ((o, &d), &y) in buf.iter_mut().zip(g).zip(db) {
                        *o += d / y;
                    }
                });
                acc(*b, &mut |buf| {
                    for (((o, &d), &x), &y) in buf.iter_mut().zip(g).zip(da).zip(db) {
                        *o -= d * x / (y * y);
                    }
                });
            }
            Op::AddRow(a, row) => {
                acc(*a, &mut |buf| buf.iter_mut().zip(g).for_each(|(o, &d)| *o += d));
                let n = val(*row).numel();
                acc(*row, &mut |buf| {
                    for chunk in g.chunks(n) {
                        buf.iter_mut().zip(chunk).for_each(|(o, &d)| *o += d);
                    }
                });
            }
            Op::Scale(a, c) => {
                acc(*a, &mut |buf| buf.iter_mut().zip(g).for_each(|(o, &d)| *o += c * d));
            }
            Op::Exp(a) => {
                let y = node.value.data();
                acc(*a, &mut |buf| {
                    for ((o, &d), &yv) in buf.iter_mut().zip(g).zip(y) {
                        *o += d * yv;
                    }
                });
            }
            Op::Log(a) => {
                let x = val(*a).data();
                acc(*a, &mut |buf| {
                    for ((o, &d), &xv) in buf.iter_mut().zip(g).zip(x) {
                        *o += d / xv;
                    }
                });
            }
            Op::Gelu(a) => {
                let x = val(*a).data();
                acc(*a, &mut |buf| {
                    for ((o, &d), &xv) in buf.iter_mut().zip(g).zip(x) {
                        *o += d * gelu_grad(xv);
                    }
                });
            }
            Op::Transpose(a) => {
                let (_, gt) = transpose_last_two(node.value.shape(), g);
                acc(*a, &mut |buf| buf.iter_mut().zip(&gt).for_each(|(o, &d)| *o += d));
            }
            Op::Softmax(a) => {
                let y = node.value.data();
                let n = node.value.last_dim();
                acc(*a, &mut |buf| {
                    for ((bo, gr), yr) in buf.chunks_mut(n).zip(g.chunks(n)).zip(y.chunks(n)) {
                        let dot: f64 = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                        for ((o, &d), &yv) in bo.iter_mut().zip(gr).zip(yr) {
                            *o += yv * (d - dot);
                        }
                    }
                });
            }
            Op::LayerNorm {
                x,
                gamma,
                beta,
                normed,
                inv_std,
            } => {
                let n = node.value.last_dim();
                let gam = val(*gamma).data();
                acc(*gamma, &mut |buf| {
                    for (gr, xr) in g.chunks(n).zip(normed.chunks(n)) {
                        for ((o, &d), &xh) in buf.iter_mut().zip(gr).zip(xr) {
                            *o += d * xh;
                        }
                    }
                });
                acc(*beta, &mut |buf| {
                    for gr in g.chunks(n) {
                        buf.iter_mut().zip(gr).for_each(|(o, &d)| *o += d);
                    }
                });
                acc(*x, &mut |buf| {
                    let rows = buf
                        .chunks_mut(n)
                        .zip(g.chunks(n))
                        .zip(normed.chunks(n))
                        .zip(inv_std);
                    for (((bo, gr), xr), &rstd) in rows {
                        let gx: Vec<f64> = gr.iter().zip(gam).map(|(d, w)| d * w).collect();
                        let mean_g = gx.iter().sum::<f64>() / n as f64;
                        let mean_gx =
                            gx.iter().zip(xr).map(|(a, b)| a * b).sum::<f64>() / n as f64;
                        for ((o, &gv), &xh) in bo.iter_mut().zip(&gx).zip(xr) {
                            *o += rstd * (gv - mean_g - xh * mean_gx);
                        }
                    }
                });
            }
            Op::Sum(a) => {
                acc(*a, &mut |buf| buf.iter_mut().for_each(|o| *o += g[0]));
            }
            Op::Mean(a) => {
                let scale = g[0] / val(*a).numel() as f64;
                acc(*a, &mut |buf| buf.iter_mut().for_each(|o| *o += scale));
            }
            Op::MeanRows(a) => {
                let m = val(*a).shape()[0] as f64;
                let n = node.value.numel();
                acc(*a, &mut |buf| {
                    for chunk in buf.chunks_mut(n) {
                        chunk.iter_mut().zip(g).for_each(|(o, &d)| *o += d / m);
                    }
                });
            }
            Op::Select(a, index) => {
                acc(*a, &mut |buf| buf[*index] += g[0]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Tensor {
        Tensor::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let mut g = Graph::new();
        let a = g.constant(mat(&[&[1.0, 2.0], &[3.0, 4.0]]));
        let i = g.constant(mat(&[&[1.0, 0.0], &[0.0, 1.0]]));
        let y = g.matmul(a, i).unwrap();
        assert_eq!(g.value(y).data(), &[1.0, 2.0, 3.0, 4.0]);
        let y2 = g.matmul(i, a).unwrap();
        assert_eq!(g.value(y2).data(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn matmul_row_by_column() {
        let mut g = Graph::new();
        let a = g.constant(mat(&[&[1.0, 2.0]]));
        let b = g.constant(mat(&[&[3.0], &[4.0]]));
        let y = g.matmul(a, b).unwrap();
        assert_eq!(g.value(y).shape(), &[1, 1]);
        assert_eq!(g.value(y).data(), &[11.0]);
    }

    #[test]
    fn matmul_shape_mismatch_names_both_shapes() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::zeros(&[2, 3]));
        let b = g.constant(Tensor::zeros(&[2, 3]));
        let err = g.matmul(a, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2, 3]"), "{msg}");
        assert!(matches!(err, Error::Dimension { op: "matmul", .. }));
    }

    #[test]
    fn matmul_backward_matches_formula() {
        let mut g = Graph::new();
        let a = g.variable(mat(&[&[1.0, 2.0], &[3.0, 4.0]]));
        let b = g.variable(mat(&[&[5.0, 6.0], &[7.0, 8.0]]));
        let y = g.matmul(a, b).unwrap();
        let s = g.sum(y);
        let grads = g.backward(s).unwrap();
        // dL/dA = 1·Bᵀ row sums, dL/dB = Aᵀ·1
        assert_eq!(grads.wrt(a).data(), &[11.0, 15.0, 11.0, 15.0]);
        assert_eq!(grads.wrt(b).data(), &[4.0, 4.0, 6.0, 6.0]);
    }

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::vector(vec![0.0, 0.0, 0.0]));
        let y = g.softmax(x);
        for &v in g.value(y).data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gelu_at_zero() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::scalar(0.0));
        let y = g.gelu(x);
        assert_eq!(g.value(y).data(), &[0.0]);
        assert!((gelu_grad(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn layer_norm_of_constant_row_is_shift() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::vector(vec![3.0; 4]));
        let gamma = g.constant(Tensor::vector(vec![2.0, 1.0, 5.0, 7.0]));
        let beta = g.constant(Tensor::vector(vec![0.1, -0.2, 0.3, 0.0]));
        let y = g.layer_norm(x, gamma, beta).unwrap();
        assert_eq!(g.value(y).data(), &[0.1, -0.2, 0.3, 0.0]);
    }

    #[test]
    fn log_and_div_domain_errors() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::vector(vec![1.0, 0.0]));
        assert!(matches!(g.log(x), Err(Error::Domain { op: "log", .. })));
        let y = g.constant(Tensor::vector(vec![1.0, 1.0]));
        assert!(matches!(g.div(y, x), Err(Error::Domain { op: "div", .. })));
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut g = Graph::new();
        let x = g.variable(Tensor::vector(vec![1.0, 2.0]));
        let y = g.exp(x);
        assert!(matches!(g.backward(y), Err(Error::Contract(_))));
    }

    #[test]
    fn transpose_batched() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::new(vec![2, 1, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let y = g.transpose(x).unwrap();
        assert_eq!(g.value(y).shape(), &[2, 2, 1]);
        assert_eq!(g.value(y).data(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn constants_get_no_gradient() {
        let mut g = Graph::new();
        let c = g.constant(Tensor::scalar(2.0));
        let x = g.variable(Tensor::scalar(3.0));
        let y = g.mul(c, x).unwrap();
        let grads = g.backward(y).unwrap();
        assert!(grads.get(c).is_none());
        assert_eq!(grads.wrt(x).data(), &[2.0]);
    }
}
