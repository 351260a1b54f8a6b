//! The graph regression networks: GraphConv stack and the gated baseline.

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::faast::EdgeKind;
use crate::repr::EncodedGraph;

use super::params::{glorot, uniform, ParamStore};
use super::tape::{GraphEdge, Tape, Tensor, Var, BN_EPS};
use super::EngineError;

pub const EMBED_INIT: f64 = 0.05;
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    GraphConv,
    Ggnn,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::GraphConv => "graphconv",
            ModelKind::Ggnn => "ggnn",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "graphconv" => Ok(ModelKind::GraphConv),
            "ggnn" => Ok(ModelKind::Ggnn),
            _ => Err(format!("unknown model kind `{s}` (expected graphconv or ggnn)")),
        }
    }
}

/// Where the ReLU sits in a GraphConv block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockOrder {
    /// conv, batch norm, ReLU
    #[default]
    NormRelu,
    /// conv, ReLU, batch norm
    ReluNorm,
}

impl std::fmt::Display for BlockOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BlockOrder::NormRelu => "norm_relu",
            BlockOrder::ReluNorm => "relu_norm",
        })
    }
}

impl std::str::FromStr for BlockOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "norm_relu" => Ok(BlockOrder::NormRelu),
            "relu_norm" => Ok(BlockOrder::ReluNorm),
            _ => Err(format!("unknown block order `{s}` (expected norm_relu or relu_norm)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub kind: ModelKind,
    pub hidden_dim: usize,
    pub num_kinds: usize,
    pub num_values: usize,
    /// GraphConv blocks.
    pub layers: usize,
    /// Propagation steps of the gated model.
    pub ggnn_steps: usize,
    #[serde(default)]
    pub block_order: BlockOrder,
}

impl NetConfig {
    pub fn new(kind: ModelKind, hidden_dim: usize, num_kinds: usize, num_values: usize) -> Self {
        NetConfig { kind, hidden_dim, num_kinds, num_values, layers: 3, ggnn_steps: 4, block_order: BlockOrder::default() }
    }

    fn head_dim(&self) -> usize {
        (self.hidden_dim / 2).max(1)
    }
}

/// Several encoded graphs stacked into one disjoint union.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub kind_ids: Vec<u32>,
    pub value_ids: Vec<u32>,
    pub edges: Vec<GraphEdge>,
    /// `[start, end)` node range of each graph.
    pub segments: Vec<(usize, usize)>,
    /// `graphs x 1` targets, present when every graph has one.
    pub targets: Option<Tensor>,
}

impl Batch {
    pub fn new(graphs: &[&EncodedGraph]) -> Result<Batch, EngineError> {
        let mut b = Batch { kind_ids: Vec::new(), value_ids: Vec::new(), edges: Vec::new(), segments: Vec::new(), targets: None };
        let mut targets = Vec::with_capacity(graphs.len());
        for g in graphs {
            let n = g.num_nodes();
            if n == 0 {
                return Err(EngineError::EmptyGraph);
            }
            if g.node_value_ids.len() != n || g.edge_kind_ids.len() != g.edge_index.len() {
                return Err(EngineError::ShapeMismatch("encoded graph arrays disagree in length".into()));
            }
            let offset = b.kind_ids.len() as u32;
            b.kind_ids.extend_from_slice(&g.node_kind_ids);
            b.value_ids.extend_from_slice(&g.node_value_ids);
            for (&(s, d), &k) in g.edge_index.iter().zip(&g.edge_kind_ids) {
                if s as usize >= n || d as usize >= n {
                    return Err(EngineError::ShapeMismatch(format!("edge {s}->{d} in a graph of {n} nodes")));
                }
                b.edges.push(GraphEdge { src: s + offset, dst: d + offset, kind: k });
            }
            b.segments.push((offset as usize, offset as usize + n));
            targets.extend(g.target);
        }
        if !graphs.is_empty() && targets.len() == graphs.len() {
            b.targets = Some(Tensor::from_shape_vec((targets.len(), 1), targets).expect("one target per graph"));
        }
        Ok(b)
    }

    pub fn num_graphs(&self) -> usize {
        self.segments.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.kind_ids.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics in batch norm.
    Train,
    /// Running statistics in batch norm.
    Eval,
}

/// Per-layer batch-norm statistics of one training batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BnStats {
    pub mean: Array1<f64>,
    /// Biased variance over the batch nodes.
    pub var: Array1<f64>,
    pub count: usize,
}

pub struct Forward<'a> {
    pub tape: Tape<'a>,
    pub pred: Var,
    pub bn_stats: Vec<BnStats>,
}

pub struct TrainStep {
    pub loss: f64,
    pub grads: Vec<Tensor>,
    pub bn_stats: Vec<BnStats>,
}

/// One GraphConv layer, without activation:
/// `h W_self + (sum over in-edges of gate[kind] h_src) W_neigh + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphConvLayer {
    pub w_self: Tensor,
    pub w_neigh: Tensor,
    pub bias: Tensor,
    pub edge_gate: Tensor,
}

impl GraphConvLayer {
    pub fn forward(&self, h: &Tensor, edges: &[GraphEdge]) -> Result<Tensor, EngineError> {
        let mut store = ParamStore::default();
        let ids = [
            store.insert("w_self", self.w_self.clone()),
            store.insert("w_neigh", self.w_neigh.clone()),
            store.insert("bias", self.bias.clone()),
            store.insert("edge_gate", self.edge_gate.clone()),
        ];
        let mut tape = Tape::new(&store);
        let x = tape.input(h.clone());
        let out = graph_conv(&mut tape, x, ids, edges)?;
        let val = tape.value(out).clone();
        check_finite(&val, "graph convolution output")?;
        Ok(val)
    }
}

fn graph_conv<'a>(tape: &mut Tape<'a>, x: Var, ids: [usize; 4], edges: &'a [GraphEdge]) -> Result<Var, EngineError> {
    let [w_self, w_neigh, bias, gate] = ids.map(|id| tape.param(id));
    let own = tape.matmul(x, w_self)?;
    let agg = tape.edge_sum(x, gate, edges)?;
    let neigh = tape.matmul(agg, w_neigh)?;
    let sum = tape.add(own, neigh)?;
    tape.add_row(sum, bias)
}

fn check_finite(t: &Tensor, what: &str) -> Result<(), EngineError> {
    if t.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(EngineError::NonFiniteValue(what.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    config: NetConfig,
    params: ParamStore,
    /// Batch-norm running statistics; not trained by gradient.
    buffers: ParamStore,
}

const GRU_GATES: [&str; 3] = ["r", "z", "n"];

impl Net {
    pub fn new(config: NetConfig, seed: u64) -> Result<Net, EngineError> {
        let d = config.hidden_dim;
        if d == 0 || config.num_kinds == 0 || config.num_values == 0 {
            return Err(EngineError::ShapeMismatch("network dimensions must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::default();
        let mut buffers = ParamStore::default();
        params.insert("embed.kind", uniform(&mut rng, (config.num_kinds, d), EMBED_INIT));
        params.insert("embed.value", uniform(&mut rng, (config.num_values, d), EMBED_INIT));
        match config.kind {
            ModelKind::GraphConv => {
                for l in 0..config.layers {
                    params.insert(&format!("conv{l}.w_self"), glorot(&mut rng, d, d));
                    params.insert(&format!("conv{l}.w_neigh"), glorot(&mut rng, d, d));
                    params.insert(&format!("conv{l}.bias"), Tensor::zeros((1, d)));
                    params.insert(&format!("conv{l}.edge_gate"), Tensor::ones((1, EdgeKind::COUNT)));
                    params.insert(&format!("bn{l}.gamma"), Tensor::ones((1, d)));
                    params.insert(&format!("bn{l}.beta"), Tensor::zeros((1, d)));
                    buffers.insert(&format!("bn{l}.running_mean"), Tensor::zeros((1, d)));
                    buffers.insert(&format!("bn{l}.running_var"), Tensor::ones((1, d)));
                }
            }
            ModelKind::Ggnn => {
                params.insert("ggnn.w_msg", glorot(&mut rng, d, d));
                params.insert("ggnn.edge_gate", Tensor::ones((1, EdgeKind::COUNT)));
                let bound = 1.0 / (d as f64).sqrt();
                for side in ["i", "h"] {
                    for gate in GRU_GATES {
                        params.insert(&format!("gru.w_{side}{gate}"), uniform(&mut rng, (d, d), bound));
                        params.insert(&format!("gru.b_{side}{gate}"), uniform(&mut rng, (1, d), bound));
                    }
                }
            }
        }
        let h = config.head_dim();
        params.insert("head0.weight", glorot(&mut rng, d, h));
        params.insert("head0.bias", Tensor::zeros((1, h)));
        params.insert("head1.weight", glorot(&mut rng, h, 1));
        params.insert("head1.bias", Tensor::zeros((1, 1)));
        Ok(Net { config, params, buffers })
    }

    /// Rebuilds a network from stored tensors, checking names and shapes
    /// against the layout implied by `config`.
    pub fn from_parts(config: NetConfig, params: ParamStore, buffers: ParamStore) -> Result<Net, EngineError> {
        let template = Net::new(config.clone(), 0)?;
        for (expected, got, what) in [(&template.params, &params, "parameter"), (&template.buffers, &buffers, "buffer")] {
            if expected.names() != got.names() {
                return Err(EngineError::ShapeMismatch(format!("{what} names differ from the configured layout")));
            }
            for ((name, a), (_, b)) in expected.iter().zip(got.iter()) {
                if a.dim() != b.dim() {
                    return Err(EngineError::ShapeMismatch(format!("{name}: expected {:?}, found {:?}", a.dim(), b.dim())));
                }
                check_finite(b, name)?;
            }
        }
        Ok(Net { config, params, buffers })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn buffers(&self) -> &ParamStore {
        &self.buffers
    }

    /// Parameters of GraphConv layer `l`.
    pub fn conv_layer(&self, l: usize) -> Option<GraphConvLayer> {
        let get = |s: &str| self.params.get(&format!("conv{l}.{s}")).cloned();
        Some(GraphConvLayer { w_self: get("w_self")?, w_neigh: get("w_neigh")?, bias: get("bias")?, edge_gate: get("edge_gate")? })
    }

    fn pid(&self, name: &str) -> usize {
        self.params.id(name).unwrap_or_else(|| panic!("parameter {name} missing"))
    }

    fn p<'a>(&self, tape: &mut Tape<'a>, name: &str) -> Var {
        tape.param(self.pid(name))
    }

    /// `x W + b` for the linear layer `name`.
    fn linear<'a>(&self, tape: &mut Tape<'a>, x: Var, name: &str) -> Result<Var, EngineError> {
        let w = self.p(tape, &format!("{name}.weight"));
        let b = self.p(tape, &format!("{name}.bias"));
        let xw = tape.matmul(x, w)?;
        tape.add_row(xw, b)
    }

    /// Records the forward pass and returns the `graphs x 1` predictions.
    pub fn forward<'a>(&'a self, batch: &'a Batch, mode: Mode) -> Result<Forward<'a>, EngineError> {
        if batch.num_graphs() == 0 {
            return Err(EngineError::EmptyGraph);
        }
        let mut tape = Tape::new(&self.params);
        let kinds = tape.gather(self.pid("embed.kind"), &batch.kind_ids)?;
        let values = tape.gather(self.pid("embed.value"), &batch.value_ids)?;
        let mut h = tape.add(kinds, values)?;
        let mut bn_stats = Vec::new();

        match self.config.kind {
            ModelKind::GraphConv => {
                for l in 0..self.config.layers {
                    let ids = ["w_self", "w_neigh", "bias", "edge_gate"].map(|s| self.pid(&format!("conv{l}.{s}")));
                    let c = graph_conv(&mut tape, h, ids, &batch.edges)?;
                    let r = match self.config.block_order {
                        BlockOrder::NormRelu => c,
                        BlockOrder::ReluNorm => tape.relu(c),
                    };
                    let xhat = match mode {
                        Mode::Train => {
                            let (xhat, mean, var) = tape.normalize(r)?;
                            bn_stats.push(BnStats { mean, var, count: batch.num_nodes() });
                            xhat
                        }
                        Mode::Eval => {
                            let mean = self.buffers.get(&format!("bn{l}.running_mean")).expect("buffer").row(0).to_owned();
                            let var = self.buffers.get(&format!("bn{l}.running_var")).expect("buffer").row(0).to_owned();
                            let scale = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
                            tape.affine(r, &mean, scale)
                        }
                    };
                    let gamma = self.p(&mut tape, &format!("bn{l}.gamma"));
                    let beta = self.p(&mut tape, &format!("bn{l}.beta"));
                    let scaled = tape.mul_row(xhat, gamma)?;
                    h = tape.add_row(scaled, beta)?;
                    if self.config.block_order == BlockOrder::NormRelu {
                        h = tape.relu(h);
                    }
                }
            }
            ModelKind::Ggnn => {
                let w_msg = self.p(&mut tape, "ggnn.w_msg");
                let gate = self.p(&mut tape, "ggnn.edge_gate");
                let w = |tape: &mut Tape<'a>, name: &str| self.p(tape, &format!("gru.{name}"));
                for _ in 0..self.config.ggnn_steps {
                    let agg = tape.edge_sum(h, gate, &batch.edges)?;
                    let m = tape.matmul(agg, w_msg)?;
                    let mut pre = Vec::with_capacity(3);
                    for g in GRU_GATES {
                        let (wi, bi, wh, bh) = (w(&mut tape, &format!("w_i{g}")), w(&mut tape, &format!("b_i{g}")), w(&mut tape, &format!("w_h{g}")), w(&mut tape, &format!("b_h{g}")));
                        let xi = tape.matmul(m, wi)?;
                        let xi = tape.add_row(xi, bi)?;
                        let xh = tape.matmul(h, wh)?;
                        let xh = tape.add_row(xh, bh)?;
                        pre.push((xi, xh));
                    }
                    let r_in = tape.add(pre[0].0, pre[0].1)?;
                    let r = tape.sigmoid(r_in);
                    let z_in = tape.add(pre[1].0, pre[1].1)?;
                    let z = tape.sigmoid(z_in);
                    let gated = tape.mul(r, pre[2].1)?;
                    let n_in = tape.add(pre[2].0, gated)?;
                    let n = tape.tanh(n_in);
                    // h' = (1 - z) * n + z * h = n + z * (h - n)
                    let diff = tape.sub(h, n)?;
                    let keep = tape.mul(z, diff)?;
                    h = tape.add(n, keep)?;
                }
            }
        }

        let pooled = tape.segment_max(h, &batch.segments)?;
        let hidden = self.linear(&mut tape, pooled, "head0")?;
        let hidden = tape.relu(hidden);
        let out = self.linear(&mut tape, hidden, "head1")?;
        let pred = tape.sigmoid(out);
        check_finite(tape.value(pred), "prediction")?;
        Ok(Forward { tape, pred, bn_stats })
    }

    pub fn predict(&self, batch: &Batch) -> Result<Vec<f64>, EngineError> {
        let fwd = self.forward(batch, Mode::Eval)?;
        Ok(fwd.tape.value(fwd.pred).iter().copied().collect())
    }

    /// Loss and gradients on a labelled batch.
    pub fn train_step(&self, batch: &Batch, mode: Mode) -> Result<TrainStep, EngineError> {
        let targets = batch.targets.clone().ok_or_else(|| EngineError::ShapeMismatch("batch has no targets".into()))?;
        let Forward { mut tape, pred, bn_stats } = self.forward(batch, mode)?;
        let loss = tape.mse(pred, targets)?;
        let loss_val = tape.value(loss)[[0, 0]];
        if !loss_val.is_finite() {
            return Err(EngineError::NonFiniteValue("loss".into()));
        }
        let grads = tape.backward(loss);
        for (g, name) in grads.iter().zip(self.params.names()) {
            check_finite(g, &format!("gradient of {name}"))?;
        }
        Ok(TrainStep { loss: loss_val, grads, bn_stats })
    }

    /// Folds one batch's statistics into the running estimates. The running
    /// variance uses the unbiased batch variance.
    pub fn update_running_stats(&mut self, stats: &[BnStats]) {
        for (l, s) in stats.iter().enumerate() {
            let n = s.count as f64;
            let unbiased = if s.count > 1 { &s.var * (n / (n - 1.0)) } else { s.var.clone() };
            let mid = self.buffers.id(&format!("bn{l}.running_mean")).expect("buffer");
            let vid = self.buffers.id(&format!("bn{l}.running_var")).expect("buffer");
            let rm = self.buffers.value_mut(mid);
            *rm = &*rm * (1.0 - BN_MOMENTUM) + &(s.mean.view().insert_axis(ndarray::Axis(0)).to_owned() * BN_MOMENTUM);
            let rv = self.buffers.value_mut(vid);
            *rv = &*rv * (1.0 - BN_MOMENTUM) + &(unbiased.insert_axis(ndarray::Axis(0)) * BN_MOMENTUM);
        }
    }
}
