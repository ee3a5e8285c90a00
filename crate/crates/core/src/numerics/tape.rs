//! Recorded-operation reverse-mode differentiation.
//!
//! A [`Tape`] appends one node per primitive call, storing the operation,
//! its forward value and whether any parameter feeds it. [`Tape::backward`]
//! walks the nodes in reverse, propagating adjoints only into inputs that
//! need them, and collects per-parameter gradients keyed by name.

use std::collections::BTreeMap;

use super::{NumericsError, Tensor};

/// Probabilities are clamped here before the log inside cross-entropy.
const PROB_CLAMP: f64 = 1e-12;

/// Handle to a value on a tape. Only meaningful for the tape that made it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueId(usize);

#[derive(Debug, Clone)]
enum Op {
    Constant,
    Param(String),
    Matmul(ValueId, ValueId),
    Add(ValueId, ValueId),
    Sub(ValueId, ValueId),
    Mul(ValueId, ValueId),
    /// Broadcast-add a 1-row vector to every row of a matrix.
    AddRow(ValueId, ValueId),
    Scale(ValueId, f64),
    ConcatRows(Vec<ValueId>),
    ConcatCols(ValueId, ValueId),
    SliceRows(ValueId, usize, usize),
    SliceCols(ValueId, usize, usize),
    Tanh(ValueId),
    Sigmoid(ValueId),
    Relu(ValueId),
    SoftmaxRows(ValueId),
    /// Per-row negative log-likelihood of one-hot targets under given
    /// probability rows; output is a rows x 1 column.
    CrossEntropyRows { probs: ValueId, targets: ValueId },
    SumAll(ValueId),
    MeanAll(ValueId),
}

struct Node {
    op: Op,
    value: Tensor,
    needs_grad: bool,
}

/// Gradient map produced by [`Tape::backward`]: parameter name to adjoint
/// tensor. Parameters the loss never touched are simply absent, which
/// readers treat as zero.
#[derive(Debug, Clone, Default)]
pub struct Gradients {
    by_name: BTreeMap<String, Tensor>,
}

impl Gradients {
    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.by_name.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.by_name.iter()
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }

    /// self += scale * other, unioning missing entries.
    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (name, grad) in &other.by_name {
            match self.by_name.get_mut(name) {
                Some(existing) => existing.add_scaled(grad, scale),
                None => {
                    let mut scaled = Tensor::zeros(grad.rows(), grad.cols());
                    scaled.add_scaled(grad, scale);
                    self.by_name.insert(name.clone(), scaled);
                }
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for grad in self.by_name.values_mut() {
            for v in grad.values_mut() {
                *v *= factor;
            }
        }
    }

    fn accumulate(&mut self, name: &str, grad: &Tensor) {
        match self.by_name.get_mut(name) {
            Some(existing) => existing.add_scaled(grad, 1.0),
            None => {
                self.by_name.insert(name.to_string(), grad.clone());
            }
        }
    }
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    param_ids: BTreeMap<String, ValueId>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: ValueId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, op: Op, value: Tensor, needs_grad: bool) -> ValueId {
        self.nodes.push(Node { op, value, needs_grad });
        ValueId(self.nodes.len() - 1)
    }

    fn needs(&self, id: ValueId) -> bool {
        self.nodes[id.0].needs_grad
    }

    fn shape_err(
        &self,
        op: &'static str,
        a: ValueId,
        b: ValueId,
    ) -> NumericsError {
        let (lr, lc) = self.value(a).shape();
        let (rr, rc) = self.value(b).shape();
        NumericsError::ShapeMismatch {
            op,
            left_rows: lr,
            left_cols: lc,
            right_rows: rr,
            right_cols: rc,
        }
    }

    /// Record a value that gradients never reach.
    pub fn constant(&mut self, value: Tensor) -> ValueId {
        self.push(Op::Constant, value, false)
    }

    pub fn scalar(&mut self, value: f64) -> ValueId {
        self.constant(Tensor::scalar(value))
    }

    /// Record a named parameter. Repeated registration of one name returns
    /// the original handle, so shared weights appear once on the tape.
    pub fn param(&mut self, name: &str, value: Tensor) -> ValueId {
        if let Some(&id) = self.param_ids.get(name) {
            return id;
        }
        let id = self.push(Op::Param(name.to_string()), value, true);
        self.param_ids.insert(name.to_string(), id);
        id
    }

    pub fn matmul(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NumericsError> {
        if self.value(a).cols() != self.value(b).rows() {
            return Err(self.shape_err("matmul", a, b));
        }
        let value = self.value(a).matmul(self.value(b));
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Op::Matmul(a, b), value, needs))
    }

    pub fn add(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NumericsError> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(self.shape_err("add", a, b));
        }
        let value = self.value(a).zip_map(self.value(b), |x, y| x + y);
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Op::Add(a, b), value, needs))
    }

    pub fn sub(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NumericsError> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(self.shape_err("sub", a, b));
        }
        let value = self.value(a).zip_map(self.value(b), |x, y| x - y);
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Op::Sub(a, b), value, needs))
    }

    pub fn mul(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NumericsError> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(self.shape_err("mul", a, b));
        }
        let value = self.value(a).zip_map(self.value(b), |x, y| x * y);
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Op::Mul(a, b), value, needs))
    }

    /// matrix + broadcast row: `row` must be 1 x cols(matrix).
    pub fn add_row(&mut self, matrix: ValueId, row: ValueId) -> Result<ValueId, NumericsError> {
        let (_, mc) = self.value(matrix).shape();
        let (rr, rc) = self.value(row).shape();
        if rr != 1 || rc != mc {
            return Err(self.shape_err("add_row", matrix, row));
        }
        let m = self.value(matrix);
        let r = self.value(row);
        let mut out = m.clone();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.set(i, j, m.get(i, j) + r.get(0, j));
            }
        }
        let needs = self.needs(matrix) || self.needs(row);
        Ok(self.push(Op::AddRow(matrix, row), out, needs))
    }

    pub fn scale(&mut self, a: ValueId, factor: f64) -> ValueId {
        let value = self.value(a).map(|v| v * factor);
        let needs = self.needs(a);
        self.push(Op::Scale(a, factor), value, needs)
    }

    /// Stack blocks vertically; all must share a column count.
    pub fn concat_rows(&mut self, parts: &[ValueId]) -> Result<ValueId, NumericsError> {
        assert!(!parts.is_empty(), "concat_rows needs at least one part");
        let cols = self.value(parts[0]).cols();
        for &p in parts {
            if self.value(p).cols() != cols {
                return Err(self.shape_err("concat_rows", parts[0], p));
            }
        }
        let mut values = Vec::new();
        let mut rows = 0;
        for &p in parts {
            values.extend_from_slice(self.value(p).values());
            rows += self.value(p).rows();
        }
        let needs = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(Op::ConcatRows(parts.to_vec()), Tensor::new(rows, cols, values), needs))
    }

    /// Stack two blocks side by side; row counts must agree.
    pub fn concat_cols(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NumericsError> {
        let (ar, ac) = self.value(a).shape();
        let (br, bc) = self.value(b).shape();
        if ar != br {
            return Err(self.shape_err("concat_cols", a, b));
        }
        let mut values = Vec::with_capacity(ar * (ac + bc));
        for i in 0..ar {
            values.extend_from_slice(self.value(a).row(i));
            values.extend_from_slice(self.value(b).row(i));
        }
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Op::ConcatCols(a, b), Tensor::new(ar, ac + bc, values), needs))
    }

    pub fn slice_rows(
        &mut self,
        a: ValueId,
        start: usize,
        end: usize,
    ) -> Result<ValueId, NumericsError> {
        let (rows, cols) = self.value(a).shape();
        if start >= end || end > rows {
            return Err(NumericsError::BadRange { op: "slice_rows", start, end, extent: rows });
        }
        let values = self.value(a).values()[start * cols..end * cols].to_vec();
        let needs = self.needs(a);
        Ok(self.push(Op::SliceRows(a, start, end), Tensor::new(end - start, cols, values), needs))
    }

    pub fn slice_cols(
        &mut self,
        a: ValueId,
        start: usize,
        end: usize,
    ) -> Result<ValueId, NumericsError> {
        let (rows, cols) = self.value(a).shape();
        if start >= end || end > cols {
            return Err(NumericsError::BadRange { op: "slice_cols", start, end, extent: cols });
        }
        let src = self.value(a);
        let mut values = Vec::with_capacity(rows * (end - start));
        for i in 0..rows {
            values.extend_from_slice(&src.row(i)[start..end]);
        }
        let needs = self.needs(a);
        Ok(self.push(Op::SliceCols(a, start, end), Tensor::new(rows, end - start, values), needs))
    }

    pub fn tanh(&mut self, a: ValueId) -> ValueId {
        let value = self.value(a).map(f64::tanh);
        let needs = self.needs(a);
        self.push(Op::Tanh(a), value, needs)
    }

    pub fn sigmoid(&mut self, a: ValueId) -> ValueId {
        let value = self.value(a).map(|v| 1.0 / (1.0 + (-v).exp()));
        let needs = self.needs(a);
        self.push(Op::Sigmoid(a), value, needs)
    }

    /// max(0, x), which doubles as the hinge of the margin loss.
    pub fn relu(&mut self, a: ValueId) -> ValueId {
        let value = self.value(a).map(|v| v.max(0.0));
        let needs = self.needs(a);
        self.push(Op::Relu(a), value, needs)
    }

    /// Row-wise softmax with the usual max-shift for stability.
    pub fn softmax_rows(&mut self, a: ValueId) -> ValueId {
        let src = self.value(a);
        let mut out = src.clone();
        for i in 0..src.rows() {
            let row_max = src.row(i).iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let exps: Vec<f64> = src.row(i).iter().map(|&v| (v - row_max).exp()).collect();
            let total: f64 = exps.iter().sum();
            for (j, e) in exps.iter().enumerate() {
                out.set(i, j, e / total);
            }
        }
        let needs = self.needs(a);
        self.push(Op::SoftmaxRows(a), out, needs)
    }

    /// Negative log-likelihood of one-hot `targets` under probability rows
    /// `probs`, one output per row. Probabilities are clamped at 1e-12
    /// before the log; clamped entries get zero gradient.
    pub fn cross_entropy_rows(
        &mut self,
        probs: ValueId,
        targets: ValueId,
    ) -> Result<ValueId, NumericsError> {
        if self.value(probs).shape() != self.value(targets).shape() {
            return Err(self.shape_err("cross_entropy_rows", probs, targets));
        }
        let p = self.value(probs);
        let y = self.value(targets);
        let mut values = Vec::with_capacity(p.rows());
        for i in 0..p.rows() {
            let mut nll = 0.0;
            for j in 0..p.cols() {
                let t = y.get(i, j);
                if t != 0.0 {
                    nll -= t * p.get(i, j).max(PROB_CLAMP).ln();
                }
            }
            values.push(nll);
        }
        let needs = self.needs(probs);
        Ok(self.push(
            Op::CrossEntropyRows { probs, targets },
            Tensor::new(p.rows(), 1, values),
            needs,
        ))
    }

    pub fn sum_all(&mut self, a: ValueId) -> ValueId {
        let total: f64 = self.value(a).values().iter().sum();
        let needs = self.needs(a);
        self.push(Op::SumAll(a), Tensor::scalar(total), needs)
    }

    pub fn mean_all(&mut self, a: ValueId) -> ValueId {
        let t = self.value(a);
        let mean = t.values().iter().sum::<f64>() / t.len() as f64;
        let needs = self.needs(a);
        self.push(Op::MeanAll(a), Tensor::scalar(mean), needs)
    }

    /// Reverse pass from a scalar loss. Returns per-parameter adjoints;
    /// parameters with no path to the loss are absent from the result.
    pub fn backward(&self, loss: ValueId) -> Result<Gradients, NumericsError> {
        let (lr, lc) = self.value(loss).shape();
        if (lr, lc) != (1, 1) {
            return Err(NumericsError::NotScalar { op: "backward", rows: lr, cols: lc });
        }
        let mut adjoints: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        adjoints[loss.0] = Some(Tensor::scalar(1.0));
        let mut grads = Gradients::default();

        for idx in (0..=loss.0).rev() {
            if !self.nodes[idx].needs_grad {
                continue;
            }
            let Some(adj) = adjoints[idx].take() else { continue };
            match &self.nodes[idx].op {
                Op::Constant => {}
                Op::Param(name) => grads.accumulate(name, &adj),
                Op::Matmul(a, b) => {
                    if self.needs(*a) {
                        let da = adj.matmul(&self.value(*b).transpose());
                        add_adjoint(&mut adjoints, *a, da);
                    }
                    if self.needs(*b) {
                        let db = self.value(*a).transpose().matmul(&adj);
                        add_adjoint(&mut adjoints, *b, db);
                    }
                }
                Op::Add(a, b) => {
                    if self.needs(*a) {
                        add_adjoint(&mut adjoints, *a, adj.clone());
                    }
                    if self.needs(*b) {
                        add_adjoint(&mut adjoints, *b, adj);
                    }
                }
                Op::Sub(a, b) => {
                    if self.needs(*a) {
                        add_adjoint(&mut adjoints, *a, adj.clone());
                    }
                    if self.needs(*b) {
                        let mut neg = Tensor::zeros(adj.rows(), adj.cols());
                        neg.add_scaled(&adj, -1.0);
                        add_adjoint(&mut adjoints, *b, neg);
                    }
                }
                Op::Mul(a, b) => {
                    if self.needs(*a) {
                        add_adjoint(&mut adjoints, *a, adj.zip_map(self.value(*b), |g, v| g * v));
                    }
                    if self.needs(*b) {
                        add_adjoint(&mut adjoints, *b, adj.zip_map(self.value(*a), |g, v| g * v));
                    }
                }
                Op::AddRow(matrix, row) => {
                    if self.needs(*matrix) {
                        add_adjoint(&mut adjoints, *matrix, adj.clone());
                    }
                    if self.needs(*row) {
                        let mut sums = Tensor::zeros(1, adj.cols());
                        for i in 0..adj.rows() {
                            for j in 0..adj.cols() {
                                sums.set(0, j, sums.get(0, j) + adj.get(i, j));
                            }
                        }
                        add_adjoint(&mut adjoints, *row, sums);
                    }
                }
                Op::Scale(a, factor) => {
                    add_adjoint(&mut adjoints, *a, adj.map(|g| g * factor));
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let rows = self.value(p).rows();
                        if self.needs(p) {
                            let cols = adj.cols();
                            let slab =
                                adj.values()[offset * cols..(offset + rows) * cols].to_vec();
                            add_adjoint(&mut adjoints, p, Tensor::new(rows, cols, slab));
                        }
                        offset += rows;
                    }
                }
                Op::ConcatCols(a, b) => {
                    let ac = self.value(*a).cols();
                    if self.needs(*a) {
                        let mut da = Tensor::zeros(adj.rows(), ac);
                        for i in 0..adj.rows() {
                            for j in 0..ac {
                                da.set(i, j, adj.get(i, j));
                            }
                        }
                        add_adjoint(&mut adjoints, *a, da);
                    }
                    if self.needs(*b) {
                        let bc = adj.cols() - ac;
                        let mut db = Tensor::zeros(adj.rows(), bc);
                        for i in 0..adj.rows() {
                            for j in 0..bc {
                                db.set(i, j, adj.get(i, ac + j));
                            }
                        }
                        add_adjoint(&mut adjoints, *b, db);
                    }
                }
                Op::SliceRows(a, start, _end) => {
                    let (rows, cols) = self.value(*a).shape();
                    let mut da = Tensor::zeros(rows, cols);
                    for i in 0..adj.rows() {
                        for j in 0..cols {
                            da.set(start + i, j, adj.get(i, j));
                        }
                    }
                    add_adjoint(&mut adjoints, *a, da);
                }
                Op::SliceCols(a, start, _end) => {
                    let (rows, cols) = self.value(*a).shape();
                    let mut da = Tensor::zeros(rows, cols);
                    for i in 0..rows {
                        for j in 0..adj.cols() {
                            da.set(i, start + j, adj.get(i, j));
                        }
                    }
                    add_adjoint(&mut adjoints, *a, da);
                }
                Op::Tanh(a) => {
                    let y = &self.nodes[idx].value;
                    add_adjoint(&mut adjoints, *a, adj.zip_map(y, |g, t| g * (1.0 - t * t)));
                }
                Op::Sigmoid(a) => {
                    let y = &self.nodes[idx].value;
                    add_adjoint(&mut adjoints, *a, adj.zip_map(y, |g, s| g * s * (1.0 - s)));
                }
                Op::Relu(a) => {
                    let x = self.value(*a);
                    add_adjoint(
                        &mut adjoints,
                        *a,
                        adj.zip_map(x, |g, v| if v > 0.0 { g } else { 0.0 }),
                    );
                }
                Op::SoftmaxRows(a) => {
                    let y = &self.nodes[idx].value;
                    let mut da = Tensor::zeros(y.rows(), y.cols());
                    for i in 0..y.rows() {
                        let dot: f64 = (0..y.cols()).map(|j| adj.get(i, j) * y.get(i, j)).sum();
                        for j in 0..y.cols() {
                            da.set(i, j, y.get(i, j) * (adj.get(i, j) - dot));
                        }
                    }
                    add_adjoint(&mut adjoints, *a, da);
                }
                Op::CrossEntropyRows { probs, targets } => {
                    let p = self.value(*probs);
                    let y = self.value(*targets);
                    let mut dp = Tensor::zeros(p.rows(), p.cols());
                    for i in 0..p.rows() {
                        let g = adj.get(i, 0);
                        for j in 0..p.cols() {
                            let t = y.get(i, j);
                            if t != 0.0 && p.get(i, j) > PROB_CLAMP {
                                dp.set(i, j, -g * t / p.get(i, j));
                            }
                        }
                    }
                    add_adjoint(&mut adjoints, *probs, dp);
                }
                Op::SumAll(a) => {
                    let (rows, cols) = self.value(*a).shape();
                    let g = adj.item();
                    add_adjoint(&mut adjoints, *a, Tensor::new(rows, cols, vec![g; rows * cols]));
                }
                Op::MeanAll(a) => {
                    let (rows, cols) = self.value(*a).shape();
                    let g = adj.item() / (rows * cols) as f64;
                    add_adjoint(&mut adjoints, *a, Tensor::new(rows, cols, vec![g; rows * cols]));
                }
            }
        }
        Ok(grads)
    }
}

fn add_adjoint(adjoints: &mut [Option<Tensor>], id: ValueId, grad: Tensor) {
    match &mut adjoints[id.0] {
        Some(existing) => existing.add_scaled(&grad, 1.0),
        slot @ None => *slot = Some(grad),
    }
}
