mod common;

use common::nets::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use testtime::engine::{Batch, BlockOrder, GraphConvLayer, GraphEdge, Mode, ModelKind, Net, NetConfig, Tensor};
use testtime::repr::EncodedGraph;

#[test]
fn graphconv_matches_dense_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=50);
        let (d_in, d_out) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let layer = GraphConvLayer {
            w_self: random_tensor(&mut rng, d_in, d_out),
            w_neigh: random_tensor(&mut rng, d_in, d_out),
            bias: random_tensor(&mut rng, 1, d_out),
            edge_gate: random_tensor(&mut rng, 1, 10),
        };
        let h = random_tensor(&mut rng, n, d_in);
        let m = rng.random_range(0..=4 * n);
        let edges = random_edges(&mut rng, n, m);
        let got = layer.forward(&h, &edges).unwrap();
        let want = dense_oracle(&layer, &h, &edges);
        worst = worst.max((&got - &want).iter().fold(0.0, |a, &x| a.max(x.abs())));
    }
    assert!(worst < 1e-10, "max abs diff {worst}");
}

#[test]
fn graphconv_degenerate_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = random_tensor(&mut rng, 4, 3);
    let layer = GraphConvLayer {
        w_self: random_tensor(&mut rng, 3, 2),
        w_neigh: random_tensor(&mut rng, 3, 2),
        bias: random_tensor(&mut rng, 1, 2),
        edge_gate: random_tensor(&mut rng, 1, 10),
    };
    assert_eq!(layer.forward(&h, &[]).unwrap(), h.dot(&layer.w_self) + &layer.bias);
    let identity = GraphConvLayer {
        w_self: Tensor::eye(3),
        w_neigh: Tensor::zeros((3, 3)),
        bias: Tensor::zeros((1, 3)),
        edge_gate: Tensor::ones((1, 10)),
    };
    assert_eq!(identity.forward(&h, &random_edges(&mut rng, 4, 6)).unwrap(), h);
}

#[test]
fn gradients_match_finite_differences() {
    for kind in [ModelKind::GraphConv, ModelKind::Ggnn] {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let graphs: Vec<EncodedGraph> = (0..3).map(|_| random_graph(&mut rng, 6)).collect();
            let batch = Batch::new(&graphs.iter().collect::<Vec<_>>()).unwrap();
            let mut net = Net::new(NetConfig::new(kind, 6, KINDS, VALUES), seed).unwrap();
            randomize(&mut net, &mut rng);
            let (err, at) = worst_gradient_error(&mut net, &batch);
            println!("{kind} seed {seed}: worst rel err {err:.2e} at {at}");
            assert!(err < 1e-4, "{kind} seed {seed}: {err:e} at {at}");
        }
    }
}

#[test]
fn relu_first_blocks_have_correct_gradients() {
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let graphs: Vec<EncodedGraph> = (0..3).map(|_| random_graph(&mut rng, 6)).collect();
        let batch = Batch::new(&graphs.iter().collect::<Vec<_>>()).unwrap();
        let mut config = NetConfig::new(ModelKind::GraphConv, 6, KINDS, VALUES);
        config.block_order = BlockOrder::ReluNorm;
        let mut net = Net::new(config, seed).unwrap();
        randomize(&mut net, &mut rng);
        let (err, at) = worst_gradient_error(&mut net, &batch);
        assert!(err < 1e-4, "seed {seed}: {err:e} at {at}");
    }
}

#[test]
fn predictions_ignore_node_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..50 {
        let graphs: Vec<EncodedGraph> = (0..3).map(|_| random_graph(&mut rng, 30)).collect();
        let permuted: Vec<EncodedGraph> = graphs
            .iter()
            .map(|g| {
                let mut perm: Vec<usize> = (0..g.num_nodes()).collect();
                for i in (1..perm.len()).rev() {
                    perm.swap(i, rng.random_range(0..=i));
                }
                permute(g, &perm)
            })
            .collect();
        let a = Batch::new(&graphs.iter().collect::<Vec<_>>()).unwrap();
        let b = Batch::new(&permuted.iter().collect::<Vec<_>>()).unwrap();
        let kind = if trial % 2 == 0 { ModelKind::GraphConv } else { ModelKind::Ggnn };
        let mut net = Net::new(NetConfig::new(kind, 16, KINDS, VALUES), trial).unwrap();
        randomize(&mut net, &mut rng);
        for mode in [Mode::Train, Mode::Eval] {
            let pa = net.forward(&a, mode).unwrap();
            let pb = net.forward(&b, mode).unwrap();
            let diff = (pa.tape.value(pa.pred) - pb.tape.value(pb.pred)).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(diff < 1e-9, "trial {trial} {mode:?}: {diff:e}");
        }
    }
}

#[test]
fn untrained_predictions_lie_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let graphs: Vec<EncodedGraph> = (0..8).map(|_| random_graph(&mut rng, 20)).collect();
    let batch = Batch::new(&graphs.iter().collect::<Vec<_>>()).unwrap();
    for kind in [ModelKind::GraphConv, ModelKind::Ggnn] {
        let net = Net::new(NetConfig::new(kind, 64, KINDS, VALUES), 1).unwrap();
        let p = net.predict(&batch).unwrap();
        assert!(p.iter().all(|&x| x > 0.0 && x < 1.0));
    }
}

#[test]
fn duplicate_graphs_predict_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = random_graph(&mut rng, 10);
    let batch = Batch::new(&[&g, &g]).unwrap();
    let net = Net::new(NetConfig::new(ModelKind::GraphConv, 8, KINDS, VALUES), 2).unwrap();
    let p = net.predict(&batch).unwrap();
    assert_eq!(p[0], p[1]);
}

#[test]
fn perfect_predictions_give_zero_head_bias_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut g = random_graph(&mut rng, 10);
    let net = Net::new(NetConfig::new(ModelKind::GraphConv, 8, KINDS, VALUES), 2).unwrap();
    g.target = Some(net.forward(&Batch::new(&[&g]).unwrap(), Mode::Train).map(|f| f.tape.value(f.pred)[[0, 0]]).unwrap());
    let step = net.train_step(&Batch::new(&[&g]).unwrap(), Mode::Train).unwrap();
    assert_eq!(step.loss, 0.0);
    let id = net.params().id("head1.bias").unwrap();
    assert_eq!(step.grads[id][[0, 0]], 0.0);
}

/// At k = 1 the local k-set neighborhood is node adjacency, so a GraphConv
/// layer over a simple symmetric edge list with unit gates computes the k-set
/// update `f(s) W1 + sum over N_L(s) of f(t) W2`.
#[test]
fn graphconv_is_the_k1_set_update() {
    use testtime::engine::kset_neighborhoods;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..30 {
        let n = rng.random_range(1..=12);
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(0.3) {
                    pairs.push((u, v));
                }
            }
        }
        let edges: Vec<GraphEdge> = pairs
            .iter()
            .flat_map(|&(u, v)| [GraphEdge { src: u as u32, dst: v as u32, kind: 0 }, GraphEdge { src: v as u32, dst: u as u32, kind: 0 }])
            .collect();
        let layer = GraphConvLayer {
            w_self: random_tensor(&mut rng, 4, 3),
            w_neigh: random_tensor(&mut rng, 4, 3),
            bias: Tensor::zeros((1, 3)),
            edge_gate: Tensor::ones((1, 10)),
        };
        let h = random_tensor(&mut rng, n, 4);
        let nb = kset_neighborhoods(n, &pairs, 1).unwrap();
        let mut want = h.dot(&layer.w_self);
        for (i, set) in nb.sets.iter().enumerate() {
            for &j in &nb.local[i] {
                let u = nb.sets[j][0];
                let contrib = h.row(u).dot(&layer.w_neigh);
                let mut row = want.row_mut(set[0]);
                row += &contrib;
            }
        }
        let got = layer.forward(&h, &edges).unwrap();
        assert!((&got - &want).iter().all(|x| x.abs() < 1e-12));
    }
}
