//! The acceptance criteria, run in order with one `PASS`/`FAIL` line each.
//! `cargo test --test acceptance -- --nocapture` shows the report.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::nets::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use testtime::engine::{Batch, GraphConvLayer, Mode, ModelKind, Net, NetConfig};
use testtime::faast::{build_fa_ast, check_invariants, EdgeKind};
use testtime::java::{parse_file, parse_source, NodeKind};
use testtime::miner::{pair_with_sources, read_reports, DEFAULT_SOURCE_ROOT};
use testtime::pipeline::*;
use testtime::repr::EncodedGraph;

type Outcome = Result<String, String>;

#[derive(Default)]
struct Report {
    failed: Vec<u8>,
}

impl Report {
    /// Runs one criterion. A panic or an exceeded time budget counts as a failure.
    fn run(&mut self, id: u8, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {:.1} s, budget {} s", elapsed.as_secs_f64(), b.as_secs())),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {id:>2} {name}: {detail} [{:.1} s]", elapsed.as_secs_f64());
        if outcome.is_err() {
            self.failed.push(id);
        }
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fa_ast_invariants() -> Outcome {
    let files = common::java_fixtures();
    let mut kinds = BTreeMap::new();
    for f in &files {
        let g = build_fa_ast(&parse_file(f).map_err(|e| format!("{}: {e}", f.display()))?);
        let errs = check_invariants(&g);
        if !errs.is_empty() {
            return Err(format!("{}: {errs:?}", f.display()));
        }
        for k in &g.node_kinds {
            *kinds.entry(*k).or_insert(0usize) += 1;
        }
    }
    let missing: Vec<String> = NodeKind::ALL.iter().filter(|k| !kinds.contains_key(k)).map(|k| k.to_string()).collect();
    ensure(
        files.len() >= 30 && missing.is_empty(),
        format!("{} files, all invariants hold, uncovered kinds {missing:?}", files.len()),
    )
}

fn listing_one() -> Outcome {
    let src = common::read_fixture("WeatherAPITest.java");
    let ast = parse_source(&src, "WeatherAPITest.java").map_err(|e| e.to_string())?;
    let g = build_fa_ast(&ast);
    let node = |kind: NodeKind, value: Option<&str>, line: u32| {
        ast.nodes
            .iter()
            .find(|n| n.kind == kind && n.line == line && (value.is_none() || n.value.as_deref() == value))
            .map(|n| n.id)
            .ok_or(format!("no {kind} on line {line}"))
    };
    let ty = node(NodeKind::TypeRef, Some("WeatherAPI"), 10)?;
    let decl = node(NodeKind::Name, Some("api"), 10)?;
    let constr = node(NodeKind::ConstructorCall, None, 10)?;
    let used = node(NodeKind::Name, Some("api"), 14)?;
    let hist = g.edge_histogram();
    let count = |k| hist.get(&k).copied().unwrap_or(0);
    let named = [
        g.has_edge(ty, decl, EdgeKind::NextToken),
        g.has_edge(decl, constr, EdgeKind::NextSibling),
        g.has_edge(decl, used, EdgeKind::NextUse),
    ];
    ensure(
        named.iter().all(|&b| b) && count(EdgeKind::IfFlow) == 1 && count(EdgeKind::ElseFlow) == 1,
        format!(
            "NextToken/NextSibling/NextUse present {named:?}, IfFlow {}, ElseFlow {}",
            count(EdgeKind::IfFlow),
            count(EdgeKind::ElseFlow)
        ),
    )
}

fn graphconv_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=50);
        let (d_in, d_out) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let layer = GraphConvLayer {
            w_self: random_tensor(&mut rng, d_in, d_out),
            w_neigh: random_tensor(&mut rng, d_in, d_out),
            bias: random_tensor(&mut rng, 1, d_out),
            edge_gate: random_tensor(&mut rng, 1, EdgeKind::COUNT),
        };
        let h = random_tensor(&mut rng, n, d_in);
        let m = rng.random_range(0..=4 * n);
        let edges = random_edges(&mut rng, n, m);
        let got = layer.forward(&h, &edges).map_err(|e| e.to_string())?;
        worst = worst.max((&got - &dense_oracle(&layer, &h, &edges)).iter().fold(0.0, |a, &x| a.max(x.abs())));
    }
    ensure(worst <= 1e-10, format!("100 graphs, max abs diff {worst:.1e} (tolerance 1e-10)"))
}

fn gradient_checks() -> Outcome {
    let mut worst = (0.0, String::new());
    for kind in [ModelKind::GraphConv, ModelKind::Ggnn] {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
            let graphs: Vec<EncodedGraph> = (0..3).map(|_| random_graph(&mut rng, 6)).collect();
            let batch = Batch::new(&graphs.iter().collect::<Vec<_>>()).map_err(|e| e.to_string())?;
            let mut net = Net::new(NetConfig::new(kind, 6, KINDS, VALUES), seed).map_err(|e| e.to_string())?;
            randomize(&mut net, &mut rng);
            let (err, at) = worst_gradient_error(&mut net, &batch);
            if err > worst.0 {
                worst = (err, format!("{kind} seed {seed} {at}"));
            }
        }
    }
    ensure(worst.0 < 1e-4, format!("2 models x 20 seeds, worst rel err {:.1e} at {} (tolerance 1e-4)", worst.0, worst.1))
}

fn permutation_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst = 0.0f64;
    for trial in 0..50u64 {
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
        let a = Batch::new(&graphs.iter().collect::<Vec<_>>()).map_err(|e| e.to_string())?;
        let b = Batch::new(&permuted.iter().collect::<Vec<_>>()).map_err(|e| e.to_string())?;
        let kind = if trial % 2 == 0 { ModelKind::GraphConv } else { ModelKind::Ggnn };
        let mut net = Net::new(NetConfig::new(kind, 16, KINDS, VALUES), trial).map_err(|e| e.to_string())?;
        randomize(&mut net, &mut rng);
        for mode in [Mode::Train, Mode::Eval] {
            let pa = net.forward(&a, mode).map_err(|e| e.to_string())?;
            let pb = net.forward(&b, mode).map_err(|e| e.to_string())?;
            let diff = (pa.tape.value(pa.pred) - pb.tape.value(pb.pred)).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            worst = worst.max(diff);
        }
    }
    ensure(worst <= 1e-9, format!("50 trials, max abs diff {worst:.1e} (tolerance 1e-9)"))
}

fn load_synth(dir: &std::path::Path, n: usize, seed: u64) -> Result<Vec<Sample>, String> {
    write_synth_corpus(dir, n, seed).map_err(|e| e.to_string())?;
    let ds = load_dataset(&dir.join("manifest.jsonl"), 0, None).map_err(|e| e.to_string())?;
    if !ds.skipped.is_empty() {
        return Err(format!("{} synthetic files skipped", ds.skipped.len()));
    }
    Ok(ds.samples)
}

fn memorization() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let samples = load_synth(dir.path(), SYNTH_MIN_FILES, 11)?;
    let ten = &samples[..10];
    let out = train(ten, &RunConfig { seed: 11, ..RunConfig::default() }).map_err(|e| e.to_string())?;
    let ev = evaluate(&out.model, ten).map_err(|e| e.to_string())?;
    let mse = ev.metrics.mse_normalized;
    ensure(mse < 1e-3, format!("10 samples, 100 epochs, train MSE {mse:.2e} (threshold 1e-3)"))
}

/// The synthetic benchmark shared by the end-to-end criteria.
struct Bench {
    _dir: tempfile::TempDir,
    samples: Vec<Sample>,
    config: RunConfig,
    train: Vec<Sample>,
    model: TrainedModel,
    evaluation: Evaluation,
}

fn end_to_end(bench: &mut Option<Bench>) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let samples = load_synth(dir.path(), 200, 7)?;
    let config = RunConfig { seed: 7, ..RunConfig::default() };
    let (train_set, test_set) = split(&samples, config.train_frac, config.seed).map_err(|e| e.to_string())?;
    let model = train(&train_set, &config).map_err(|e| e.to_string())?.model;
    let evaluation = evaluate(&model, &test_set).map_err(|e| e.to_string())?;
    let m = evaluation.metrics.clone();
    let rmse = m.mse_ms.sqrt();
    let limit = 3.0 * SYNTH_NOISE_SD_MS;
    let pearson = m.pearson.unwrap_or(f64::NAN);
    *bench = Some(Bench { _dir: dir, samples, config, train: train_set, model, evaluation });
    ensure(
        pearson >= 0.95 && rmse <= limit,
        format!(
            "n=200, {}/{} split, pearson {pearson:.4} (>= 0.95), RMSE {rmse:.2} ms (<= {limit} ms), MSE normalized {:.2e}",
            200 - m.n_test,
            m.n_test,
            m.mse_normalized
        ),
    )
}

fn comparison(bench: &Bench) -> Outcome {
    let c = compare_models(&bench.samples, &bench.config).map_err(|e| e.to_string())?;
    let paths = |e: &Evaluation| e.pairs.iter().map(|p| p.source_path.clone()).collect::<Vec<_>>();
    if paths(&c.graphconv) != paths(&c.ggnn) || paths(&c.graphconv) != paths(&bench.evaluation) {
        return Err("the models were tested on different splits".into());
    }
    let (gc, gg) = (c.graphconv.metrics.pearson, c.ggnn.metrics.pearson);
    let (Some(gc), Some(gg)) = (gc, gg) else {
        return Err(format!("undefined correlation: graphconv {gc:?}, ggnn {gg:?}"));
    };
    ensure(gc >= gg - 0.05, format!("shared split of {} test files, graphconv {gc:.4} vs ggnn {gg:.4}", c.n_test))
}

fn transfer(bench: &Bench) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for project in SYNTH_PROJECTS {
        let x = cross_eval(&bench.samples, project, &bench.config).map_err(|e| e.to_string())?;
        let r = x.evaluation.metrics.pearson.unwrap_or(f64::NAN);
        ok &= r >= 0.9 && x.unseen_tokens > 0;
        parts.push(format!("held-out {project} pearson {r:.4}, {} unseen tokens", x.unseen_tokens));
    }
    ensure(ok, format!("{}; vocabulary and normalization fit on training projects only", parts.join("; ")))
}

fn determinism(bench: &Bench) -> Outcome {
    let again = train(&bench.train, &bench.config).map_err(|e| e.to_string())?.model;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    bench.model.save(&a).map_err(|e| e.to_string())?;
    again.save(&b).map_err(|e| e.to_string())?;
    let (a, b) = (std::fs::read(a).map_err(|e| e.to_string())?, std::fs::read(b).map_err(|e| e.to_string())?);
    ensure(a == b, format!("two 100-epoch runs with seed {}, {} byte artifacts identical: {}", bench.config.seed, a.len(), a == b))
}

fn miner_sheet() -> Outcome {
    let h2 = common::fixture_dir().join("surefire/h2");
    let entries = read_reports(&h2.join("reports"), 0).map_err(|e| e.to_string())?;
    let repo = h2.join("repo");
    let pairing = pair_with_sources(&entries, &repo, &[DEFAULT_SOURCE_ROOT.to_string()]).map_err(|e| e.to_string())?;
    let mut expected: BTreeMap<String, f64> = BTreeMap::new();
    for row in common::surefire_sheet().into_iter().filter(|r| !r.source_path.is_empty()) {
        *expected.entry(row.source_path).or_default() += row.mean_s;
    }
    let rows = pairing.manifest(&repo, &repo, "h2");
    if rows.len() != expected.len() {
        return Err(format!("{} manifest rows, sheet has {}", rows.len(), expected.len()));
    }
    let mut worst = 0.0f64;
    for r in &rows {
        let want = expected.get(&r.source_path).ok_or(format!("{} not in the sheet", r.source_path))?;
        worst = worst.max((r.execution_time_ms / 1000.0 - want).abs());
    }
    let runs: std::collections::BTreeSet<&str> = entries.iter().map(|e| e.run_id.as_str()).collect();
    ensure(
        worst <= 1e-6,
        format!("{} runs, {} rows, max deviation from the sheet {worst:.1e} s (tolerance 1e-6)", runs.len(), rows.len()),
    )
}

#[test]
fn acceptance_criteria() {
    let mut report = Report::default();
    report.run(1, "FA-AST invariants", secs(10), fa_ast_invariants);
    report.run(2, "Listing 1 golden edges", None, listing_one);
    report.run(3, "GraphConv dense oracle", secs(5), graphconv_oracle);
    report.run(4, "gradient checks", secs(60), gradient_checks);
    report.run(5, "permutation invariance", None, permutation_invariance);
    report.run(6, "memorization", secs(120), memorization);
    let mut bench = None;
    report.run(7, "synthetic end-to-end", secs(15 * 60), || end_to_end(&mut bench));
    match &bench {
        Some(b) => {
            report.run(8, "model comparison", None, || comparison(b));
            report.run(9, "leave-one-project-out transfer", None, || transfer(b));
            report.run(10, "determinism", None, || determinism(b));
        }
        None => {
            for (id, name) in [(8, "model comparison"), (9, "leave-one-project-out transfer"), (10, "determinism")] {
                report.run(id, name, None, || Err("synthetic benchmark unavailable".into()));
            }
        }
    }
    report.run(11, "miner spreadsheet", None, miner_sheet);
    assert!(report.failed.is_empty(), "failed criteria: {:?}", report.failed);
}
