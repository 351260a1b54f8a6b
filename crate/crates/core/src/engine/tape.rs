//! Reverse-mode differentiation over a linear tape of matrix operations.

use ndarray::{Array1, Array2, Axis, Zip};

use super::params::ParamStore;
use super::EngineError;

pub type Tensor = Array2<f64>;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

/// One directed message edge; `kind` selects the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    pub src: u32,
    pub dst: u32,
    pub kind: u8,
}

pub const BN_EPS: f64 = 1e-5;

enum Op<'a> {
    Input,
    Param(usize),
    Gather { param: usize, ids: &'a [u32] },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    MatMul(Var, Var),
    AddRow(Var, Var),
    MulRow(Var, Var),
    Relu(Var),
    Sigmoid(Var),
    Tanh(Var),
    EdgeSum { h: Var, gate: Var, edges: &'a [GraphEdge] },
    Normalize { x: Var, inv_std: Array1<f64> },
    Affine { x: Var, scale: Array1<f64> },
    SegmentMax { x: Var, argmax: Array2<usize> },
    Mse { pred: Var, target: Tensor },
}

/// Records operations for one forward pass; parameters are read from the
/// store and their gradients come back from [`Tape::backward`].
pub struct Tape<'a> {
    store: &'a ParamStore,
    vals: Vec<Tensor>,
    ops: Vec<Op<'a>>,
}

/// Weighted neighbor sum: `out[dst] += gate[kind] * h[src]` for every edge.
pub fn edge_sum(h: &Tensor, gate: &[f64], edges: &[GraphEdge]) -> Tensor {
    let mut out = Tensor::zeros(h.raw_dim());
    for e in edges {
        let g = gate[e.kind as usize];
        let src = h.row(e.src as usize);
        let mut dst = out.row_mut(e.dst as usize);
        dst.scaled_add(g, &src);
    }
    out
}

/// Columnwise maximum per segment, plus the winning row of each entry.
/// Ties go to the first row.
pub fn segment_max(x: &Tensor, segments: &[(usize, usize)]) -> (Tensor, Array2<usize>) {
    let d = x.ncols();
    let mut out = Tensor::zeros((segments.len(), d));
    let mut arg = Array2::zeros((segments.len(), d));
    for (s, &(start, end)) in segments.iter().enumerate() {
        for j in 0..d {
            let mut best = start;
            for i in start + 1..end {
                if x[[i, j]] > x[[best, j]] {
                    best = i;
                }
            }
            out[[s, j]] = x[[best, j]];
            arg[[s, j]] = best;
        }
    }
    (out, arg)
}

/// Batch statistics of each column: mean and biased variance.
pub fn column_stats(x: &Tensor) -> (Array1<f64>, Array1<f64>) {
    let n = x.nrows() as f64;
    let mean = x.sum_axis(Axis(0)) / n;
    let centered = x - &mean;
    let var = (&centered * &centered).sum_axis(Axis(0)) / n;
    (mean, var)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn same_shape(a: &Tensor, b: &Tensor, what: &str) -> Result<(), EngineError> {
    if a.dim() != b.dim() {
        return Err(EngineError::ShapeMismatch(format!("{what}: {:?} vs {:?}", a.dim(), b.dim())));
    }
    Ok(())
}

fn row_shape(a: &Tensor, row: &Tensor, what: &str) -> Result<(), EngineError> {
    if row.nrows() != 1 || row.ncols() != a.ncols() {
        return Err(EngineError::ShapeMismatch(format!("{what}: {:?} with row {:?}", a.dim(), row.dim())));
    }
    Ok(())
}

impl<'a> Tape<'a> {
    pub fn new(store: &'a ParamStore) -> Self {
        Tape { store, vals: Vec::new(), ops: Vec::new() }
    }

    fn push(&mut self, val: Tensor, op: Op<'a>) -> Var {
        self.vals.push(val);
        self.ops.push(op);
        Var(self.vals.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.vals[v.0]
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn input(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Input)
    }

    pub fn param(&mut self, id: usize) -> Var {
        let val = self.store.value(id).clone();
        self.push(val, Op::Param(id))
    }

    /// Rows of a parameter table, one per id.
    pub fn gather(&mut self, id: usize, ids: &'a [u32]) -> Result<Var, EngineError> {
        let table = self.store.value(id);
        if let Some(&bad) = ids.iter().find(|&&i| i as usize >= table.nrows()) {
            return Err(EngineError::VocabMismatch(format!(
                "index {bad} into {} with {} rows",
                self.store.name(id),
                table.nrows()
            )));
        }
        let idx: Vec<usize> = ids.iter().map(|&i| i as usize).collect();
        let val = table.select(Axis(0), &idx);
        Ok(self.push(val, Op::Gather { param: id, ids }))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, EngineError> {
        same_shape(self.value(a), self.value(b), "add")?;
        let val = self.value(a) + self.value(b);
        Ok(self.push(val, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, EngineError> {
        same_shape(self.value(a), self.value(b), "sub")?;
        let val = self.value(a) - self.value(b);
        Ok(self.push(val, Op::Sub(a, b)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, EngineError> {
        same_shape(self.value(a), self.value(b), "mul")?;
        let val = self.value(a) * self.value(b);
        Ok(self.push(val, Op::Mul(a, b)))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, EngineError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.ncols() != y.nrows() {
            return Err(EngineError::ShapeMismatch(format!("matmul: {:?} x {:?}", x.dim(), y.dim())));
        }
        let val = x.dot(y);
        Ok(self.push(val, Op::MatMul(a, b)))
    }

    /// Adds a `1 x d` row to every row.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, EngineError> {
        row_shape(self.value(a), self.value(row), "add_row")?;
        let val = self.value(a) + self.value(row);
        Ok(self.push(val, Op::AddRow(a, row)))
    }

    /// Multiplies every row elementwise by a `1 x d` row.
    pub fn mul_row(&mut self, a: Var, row: Var) -> Result<Var, EngineError> {
        row_shape(self.value(a), self.value(row), "mul_row")?;
        let val = self.value(a) * self.value(row);
        Ok(self.push(val, Op::MulRow(a, row)))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let val = self.value(a).mapv(|x| x.max(0.0));
        self.push(val, Op::Relu(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let val = self.value(a).mapv(sigmoid);
        self.push(val, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let val = self.value(a).mapv(f64::tanh);
        self.push(val, Op::Tanh(a))
    }

    /// `out[dst] += gate[kind] * h[src]`; `gate` is a `1 x kinds` row.
    pub fn edge_sum(&mut self, h: Var, gate: Var, edges: &'a [GraphEdge]) -> Result<Var, EngineError> {
        let (hv, gv) = (self.value(h), self.value(gate));
        let n = hv.nrows() as u32;
        if gv.nrows() != 1 {
            return Err(EngineError::ShapeMismatch(format!("edge gate {:?}", gv.dim())));
        }
        for e in edges {
            if e.src >= n || e.dst >= n {
                return Err(EngineError::ShapeMismatch(format!("edge {}->{} with {n} nodes", e.src, e.dst)));
            }
            if e.kind as usize >= gv.ncols() {
                return Err(EngineError::ShapeMismatch(format!("edge kind {} with {} gates", e.kind, gv.ncols())));
            }
        }
        let gate_vals: Vec<f64> = gv.iter().copied().collect();
        let val = edge_sum(hv, &gate_vals, edges);
        Ok(self.push(val, Op::EdgeSum { h, gate, edges }))
    }

    /// Standardizes each column with the statistics of this batch.
    pub fn normalize(&mut self, x: Var) -> Result<(Var, Array1<f64>, Array1<f64>), EngineError> {
        let xv = self.value(x);
        if xv.nrows() == 0 {
            return Err(EngineError::EmptyGraph);
        }
        let (mean, var) = column_stats(xv);
        let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
        let val = (xv - &mean) * &inv_std;
        let var_out = self.push(val, Op::Normalize { x, inv_std });
        Ok((var_out, mean, var))
    }

    /// `(x - shift) * scale` with constant per-column shift and scale.
    pub fn affine(&mut self, x: Var, shift: &Array1<f64>, scale: Array1<f64>) -> Var {
        let val = (self.value(x) - shift) * &scale;
        self.push(val, Op::Affine { x, scale })
    }

    /// Per-segment columnwise max; segments are `[start, end)` row ranges.
    pub fn segment_max(&mut self, x: Var, segments: &[(usize, usize)]) -> Result<Var, EngineError> {
        let xv = self.value(x);
        for &(s, e) in segments {
            if s >= e {
                return Err(EngineError::EmptyGraph);
            }
            if e > xv.nrows() {
                return Err(EngineError::ShapeMismatch(format!("segment {s}..{e} of {} rows", xv.nrows())));
            }
        }
        let (val, argmax) = segment_max(xv, segments);
        Ok(self.push(val, Op::SegmentMax { x, argmax }))
    }

    /// Mean squared error against a constant target of the same shape.
    pub fn mse(&mut self, pred: Var, target: Tensor) -> Result<Var, EngineError> {
        same_shape(self.value(pred), &target, "mse")?;
        let diff = self.value(pred) - &target;
        let val = Tensor::from_elem((1, 1), diff.mapv(|d| d * d).mean().unwrap_or(0.0));
        Ok(self.push(val, Op::Mse { pred, target }))
    }

    /// Gradients of the scalar `out` with respect to every parameter in the store.
    pub fn backward(&self, out: Var) -> Vec<Tensor> {
        let mut grads: Vec<Option<Tensor>> = (0..self.vals.len()).map(|_| None).collect();
        grads[out.0] = Some(Tensor::ones(self.vals[out.0].raw_dim()));
        let mut pgrads: Vec<Tensor> = self.store.values().iter().map(|p| Tensor::zeros(p.raw_dim())).collect();

        fn acc(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
            match &mut grads[v.0] {
                Some(existing) => *existing += &g,
                slot @ None => *slot = Some(g),
            }
        }

        for i in (0..=out.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            match &self.ops[i] {
                Op::Input => {}
                Op::Param(id) => pgrads[*id] += &g,
                Op::Gather { param, ids } => {
                    let pg = &mut pgrads[*param];
                    for (row, &id) in ids.iter().enumerate() {
                        let mut dst = pg.row_mut(id as usize);
                        dst += &g.row(row);
                    }
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *b, g.clone());
                    acc(&mut grads, *a, g);
                }
                Op::Sub(a, b) => {
                    acc(&mut grads, *b, -&g);
                    acc(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    let ga = &g * &self.vals[b.0];
                    let gb = &g * &self.vals[a.0];
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::MatMul(a, b) => {
                    let ga = g.dot(&self.vals[b.0].t());
                    let gb = self.vals[a.0].t().dot(&g);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::AddRow(a, row) => {
                    let gr = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    acc(&mut grads, *row, gr);
                    acc(&mut grads, *a, g);
                }
                Op::MulRow(a, row) => {
                    let gr = (&g * &self.vals[a.0]).sum_axis(Axis(0)).insert_axis(Axis(0));
                    let ga = &g * &self.vals[row.0];
                    acc(&mut grads, *row, gr);
                    acc(&mut grads, *a, ga);
                }
                Op::Relu(a) => {
                    let mut ga = g;
                    Zip::from(&mut ga).and(&self.vals[a.0]).for_each(|d, &x| {
                        if x <= 0.0 {
                            *d = 0.0;
                        }
                    });
                    acc(&mut grads, *a, ga);
                }
                Op::Sigmoid(a) => {
                    let mut ga = g;
                    Zip::from(&mut ga).and(&self.vals[i]).for_each(|d, &y| *d *= y * (1.0 - y));
                    acc(&mut grads, *a, ga);
                }
                Op::Tanh(a) => {
                    let mut ga = g;
                    Zip::from(&mut ga).and(&self.vals[i]).for_each(|d, &y| *d *= 1.0 - y * y);
                    acc(&mut grads, *a, ga);
                }
                Op::EdgeSum { h, gate, edges } => {
                    let hv = &self.vals[h.0];
                    let gv = &self.vals[gate.0];
                    let mut gh = Tensor::zeros(hv.raw_dim());
                    let mut gg = Tensor::zeros(gv.raw_dim());
                    for e in edges.iter() {
                        let k = e.kind as usize;
                        let up = g.row(e.dst as usize);
                        gg[[0, k]] += up.dot(&hv.row(e.src as usize));
                        gh.row_mut(e.src as usize).scaled_add(gv[[0, k]], &up);
                    }
                    acc(&mut grads, *gate, gg);
                    acc(&mut grads, *h, gh);
                }
                Op::Normalize { x, inv_std } => {
                    let xhat = &self.vals[i];
                    let n = xhat.nrows() as f64;
                    let sum_g = g.sum_axis(Axis(0));
                    let sum_gx = (&g * xhat).sum_axis(Axis(0));
                    let gx = ((&g * n - &sum_g) - xhat * &sum_gx) * &(inv_std / n);
                    acc(&mut grads, *x, gx);
                }
                Op::Affine { x, scale } => acc(&mut grads, *x, g * scale),
                Op::SegmentMax { x, argmax } => {
                    let mut gx = Tensor::zeros(self.vals[x.0].raw_dim());
                    for ((s, j), &row) in argmax.indexed_iter() {
                        gx[[row, j]] += g[[s, j]];
                    }
                    acc(&mut grads, *x, gx);
                }
                Op::Mse { pred, target } => {
                    let p = &self.vals[pred.0];
                    let scale = 2.0 * g[[0, 0]] / p.len().max(1) as f64;
                    acc(&mut grads, *pred, (p - target) * scale);
                }
            }
        }
        pgrads
    }
}
