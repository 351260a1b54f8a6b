//! Random graphs, reference implementations and numeric checks for the network.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use testtime::engine::{Batch, GraphConvLayer, GraphEdge, Mode, Net, Tensor};
use testtime::repr::EncodedGraph;

pub const KINDS: usize = 5;
pub const VALUES: usize = 7;

pub fn random_tensor(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Tensor {
    Tensor::from_shape_fn((r, c), |_| rng.random_range(-1.0..1.0))
}

pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<GraphEdge> {
    (0..m)
        .map(|_| GraphEdge { src: rng.random_range(0..n) as u32, dst: rng.random_range(0..n) as u32, kind: rng.random_range(0..10) })
        .collect()
}

pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> EncodedGraph {
    let n = rng.random_range(1..=max_nodes);
    let m = rng.random_range(0..=3 * n);
    let edges = random_edges(rng, n, m);
    EncodedGraph {
        node_kind_ids: (0..n).map(|_| rng.random_range(0..KINDS as u32)).collect(),
        node_value_ids: (0..n).map(|_| rng.random_range(0..VALUES as u32)).collect(),
        edge_index: edges.iter().map(|e| (e.src, e.dst)).collect(),
        edge_kind_ids: edges.iter().map(|e| e.kind).collect(),
        target: Some(rng.random_range(0.0..1.0)),
    }
}

/// `H W1 + M H W2 + b` with `M[dst][src]` the summed gates of all src->dst edges,
/// computed with explicit loops.
pub fn dense_oracle(layer: &GraphConvLayer, h: &Tensor, edges: &[GraphEdge]) -> Tensor {
    let n = h.nrows();
    let (d_in, d_out) = layer.w_self.dim();
    let mut m = vec![vec![0.0; n]; n];
    for e in edges {
        m[e.dst as usize][e.src as usize] += layer.edge_gate[[0, e.kind as usize]];
    }
    let mut mh = vec![vec![0.0; d_in]; n];
    for v in 0..n {
        for u in 0..n {
            for k in 0..d_in {
                mh[v][k] += m[v][u] * h[[u, k]];
            }
        }
    }
    Tensor::from_shape_fn((n, d_out), |(v, j)| {
        let mut s = layer.bias[[0, j]];
        for k in 0..d_in {
            s += h[[v, k]] * layer.w_self[[k, j]] + mh[v][k] * layer.w_neigh[[k, j]];
        }
        s
    })
}

/// Largest relative error between analytic and central-difference gradients
/// over every scalar of every parameter. Relative error is
/// `|a - n| / max(|a|, |n|, FLOOR)`.
pub fn worst_gradient_error(net: &mut Net, batch: &Batch) -> (f64, String) {
    const EPS: f64 = 1e-5;
    const FLOOR: f64 = 1e-6;
    let analytic = net.train_step(batch, Mode::Train).unwrap().grads;
    let mut worst = (0.0, String::new());
    for id in 0..net.params().len() {
        let name = net.params().name(id).to_string();
        for idx in 0..net.params().value(id).len() {
            let orig = net.params().value(id).as_slice().unwrap()[idx];
            net.params_mut().value_mut(id).as_slice_mut().unwrap()[idx] = orig + EPS;
            let up = net.train_step(batch, Mode::Train).unwrap().loss;
            net.params_mut().value_mut(id).as_slice_mut().unwrap()[idx] = orig - EPS;
            let down = net.train_step(batch, Mode::Train).unwrap().loss;
            net.params_mut().value_mut(id).as_slice_mut().unwrap()[idx] = orig;
            let numeric = (up - down) / (2.0 * EPS);
            let a = analytic[id].as_slice().unwrap()[idx];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
            if err > worst.0 {
                worst = (err, format!("{name}[{idx}] analytic {a:e} numeric {numeric:e}"));
            }
        }
    }
    worst
}

/// Moves every parameter to a generic point. At initialization the embeddings
/// are tiny, which puts batch norm next to its epsilon where the loss is so
/// curved that central differences carry more truncation error than the
/// tolerance allows.
pub fn randomize(net: &mut Net, rng: &mut ChaCha8Rng) {
    for t in net.params_mut().values_mut() {
        t.mapv_inplace(|_| rng.random_range(-1.0..1.0));
    }
}

pub fn permute(g: &EncodedGraph, perm: &[usize]) -> EncodedGraph {
    // perm[old] = new
    let n = g.num_nodes();
    let mut kinds = vec![0; n];
    let mut values = vec![0; n];
    for old in 0..n {
        kinds[perm[old]] = g.node_kind_ids[old];
        values[perm[old]] = g.node_value_ids[old];
    }
    EncodedGraph {
        node_kind_ids: kinds,
        node_value_ids: values,
        edge_index: g.edge_index.iter().map(|&(s, d)| (perm[s as usize] as u32, perm[d as usize] as u32)).collect(),
        edge_kind_ids: g.edge_kind_ids.clone(),
        target: g.target,
    }
}
