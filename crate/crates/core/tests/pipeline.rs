use std::collections::BTreeSet;

use testtime::faast::check_invariants;
use testtime::java::{parse_source, NodeKind};
use testtime::pipeline::*;
use testtime::repr::Normalizer;

fn synth_dataset(n: usize, seed: u64) -> (tempfile::TempDir, SynthManifest, Dataset) {
    let dir = tempfile::tempdir().unwrap();
    let synth = write_synth_corpus(dir.path(), n, seed).unwrap();
    let ds = load_dataset(&dir.path().join("manifest.jsonl"), 2, None).unwrap();
    (dir, synth, ds)
}

fn quick(epochs: usize) -> RunConfig {
    RunConfig { epochs, hidden_dim: 16, batch_size: 8, seed: 3, ..RunConfig::default() }
}

#[test]
fn synth_corpus_loads_without_skips_and_is_well_formed() {
    let (_dir, synth, ds) = synth_dataset(40, 1);
    assert!(ds.skipped.is_empty(), "{:?}", ds.skipped);
    assert_eq!(ds.samples.len(), 40);
    for (s, f) in ds.samples.iter().zip(&synth.files) {
        assert_eq!(s.graph.source_path, f.source_path);
        assert_eq!(s.project, f.project);
        assert!(check_invariants(&s.graph).is_empty());
    }
    let projects: BTreeSet<&str> = ds.samples.iter().map(|s| s.project.as_str()).collect();
    assert_eq!(projects.into_iter().collect::<Vec<_>>(), SYNTH_PROJECTS);
}

#[test]
fn synth_labels_follow_recounted_constructs() {
    let (dir, synth, _) = synth_dataset(30, 2);
    let written: SynthManifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("synth.json")).unwrap()).unwrap();
    assert_eq!((written.loop_ms, written.statement_ms, written.call_ms, written.noise_sd_ms), (50.0, 5.0, 10.0, 2.0));
    for f in &written.files {
        let src = std::fs::read_to_string(dir.path().join(&f.source_path)).unwrap();
        let ast = parse_source(&src, &f.source_path).unwrap();
        let loops = ast.count_kind(NodeKind::ForStmt) + ast.count_kind(NodeKind::WhileStmt);
        let statements = ast.nodes.iter().filter(|n| n.kind.is_statement() && n.kind != NodeKind::Block).count();
        let calls = ast.count_kind(NodeKind::MethodCall);
        let rule = 50.0 * loops as f64 + 5.0 * statements as f64 + 10.0 * calls as f64;
        assert!((f.execution_time_ms - rule - f.noise_ms).abs() < 1e-9, "{}", f.source_path);
    }
    let noise: Vec<f64> = synth.files.iter().map(|f| f.noise_ms).collect();
    assert!(noise.iter().all(|n| n.abs() < 5.0 * 2.0));
}

#[test]
fn synth_corpus_bytes_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_synth_corpus(a.path(), 200, 7).unwrap();
    write_synth_corpus(b.path(), 200, 7).unwrap();
    let files = |root: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let mut out: Vec<(String, Vec<u8>)> = walkdir::WalkDir::new(root)
            .into_iter()
            .map(Result::unwrap)
            .filter(|e| e.file_type().is_file())
            .map(|e| (e.path().strip_prefix(root).unwrap().display().to_string(), std::fs::read(e.path()).unwrap()))
            .collect();
        out.sort();
        out
    };
    let fa = files(a.path());
    assert_eq!(fa.len(), 202);
    assert_eq!(fa, files(b.path()));
}

#[test]
fn untrained_model_predicts_inside_unit_interval() {
    let (_dir, _, ds) = synth_dataset(20, 4);
    let out = train(&ds.samples, &quick(0)).unwrap();
    assert!(out.loss_log.is_empty());
    let graphs: Vec<_> = ds.samples.iter().map(|s| &s.graph).collect();
    let pred = predict_normalized(&out.model, &graphs).unwrap();
    assert_eq!(pred.len(), 20);
    assert!(pred.iter().all(|&p| p > 0.0 && p < 1.0));
}

#[test]
fn training_lowers_the_loss() {
    let (_dir, _, ds) = synth_dataset(20, 5);
    let out = train(&ds.samples[..10], &quick(30)).unwrap();
    assert_eq!(out.loss_log.len(), 30);
    assert!(out.loss_log[29] < out.loss_log[0] / 2.0, "{:?}", out.loss_log);
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let (_dir, _, ds) = synth_dataset(20, 6);
    let a = train(&ds.samples, &quick(3)).unwrap();
    let b = train(&ds.samples, &quick(3)).unwrap();
    assert_eq!(a.model.to_bytes(), b.model.to_bytes());
    assert_eq!(a.loss_log, b.loss_log);
    let c = train(&ds.samples, &RunConfig { seed: 4, ..quick(3) }).unwrap();
    assert_ne!(a.model.to_bytes(), c.model.to_bytes());
}

#[test]
fn saved_model_reproduces_predictions() {
    let (dir, _, ds) = synth_dataset(20, 8);
    let out = train(&ds.samples, &quick(2)).unwrap();
    let path = dir.path().join("model.ttm");
    out.model.save(&path).unwrap();
    let back = TrainedModel::load(&path).unwrap();
    let graphs: Vec<_> = ds.samples.iter().map(|s| &s.graph).collect();
    assert_eq!(predict_normalized(&back, &graphs).unwrap(), predict_normalized(&out.model, &graphs).unwrap());
}

#[test]
fn evaluation_reports_one_pair_per_test_sample() {
    let (_dir, _, ds) = synth_dataset(20, 9);
    let (tr, te) = split(&ds.samples, 0.8, 1).unwrap();
    let out = train(&tr, &quick(2)).unwrap();
    let ev = evaluate(&out.model, &te).unwrap();
    assert_eq!(ev.metrics.n_test, 4);
    assert_eq!(ev.pairs.len(), 4);
    let norm = out.model.norm;
    for p in &ev.pairs {
        let t = norm.normalize(p.predicted_ms);
        assert!(t > 0.0 && t < 1.0);
    }
    assert!(matches!(evaluate(&out.model, &[]), Err(PipelineError::EmptyTestSet)));
}

#[test]
fn pearson_is_the_same_on_either_scale() {
    let (_dir, _, ds) = synth_dataset(20, 10);
    let (tr, te) = split(&ds.samples, 0.75, 2).unwrap();
    let out = train(&tr, &quick(2)).unwrap();
    let graphs: Vec<_> = te.iter().map(|s| &s.graph).collect();
    let norm_pred = predict_normalized(&out.model, &graphs).unwrap();
    let norm = out.model.norm;
    let actual: Vec<f64> = te.iter().map(|s| s.execution_time_ms).collect();
    let actual_norm: Vec<f64> = actual.iter().map(|&a| norm.normalize(a)).collect();
    let ms_pred: Vec<f64> = norm_pred.iter().map(|&p| norm.denormalize(p)).collect();
    let a = pearson(&norm_pred, &actual_norm).unwrap();
    let b = pearson(&ms_pred, &actual).unwrap();
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    assert_eq!(evaluate(&out.model, &te).unwrap().metrics.pearson, Some(b));
}

#[test]
fn vocabulary_and_normalization_come_from_training_samples_only() {
    let (_dir, _, ds) = synth_dataset(20, 11);
    let (tr, te) = split(&ds.samples, 0.8, 3).unwrap();
    let out = train(&tr, &quick(1)).unwrap();
    check_no_leakage(&out.model, &tr).unwrap();
    assert_eq!(out.model.norm, Normalizer::fit(tr.iter().map(|s| s.execution_time_ms)).unwrap());
    let all: Vec<Sample> = tr.iter().chain(&te).cloned().collect();
    assert!(matches!(check_no_leakage(&out.model, &all), Err(PipelineError::Leakage(_))));
}

#[test]
fn cross_evaluation_holds_out_one_project() {
    let (_dir, _, ds) = synth_dataset(20, 12);
    let x = cross_eval(&ds.samples, "beta", &quick(2)).unwrap();
    assert_eq!(x.train_projects, vec!["alpha".to_string()]);
    assert_eq!(x.n_train, 10);
    assert_eq!(x.evaluation.pairs.len(), 10);
    assert!(x.evaluation.pairs.iter().all(|p| p.project == "beta"));
    assert!(x.unseen_tokens > 0);
    assert!(matches!(cross_eval(&ds.samples, "gamma", &quick(1)), Err(PipelineError::UnknownProject(_))));
    let alpha: Vec<Sample> = ds.samples.iter().filter(|s| s.project == "alpha").cloned().collect();
    assert!(matches!(cross_eval(&alpha, "alpha", &quick(1)), Err(PipelineError::TooFewProjects(1))));
}

#[test]
fn comparison_uses_one_split_for_both_models() {
    let (_dir, _, ds) = synth_dataset(20, 13);
    let c = compare_models(&ds.samples, &RunConfig { ggnn_steps: 2, ..quick(1) }).unwrap();
    assert_eq!((c.n_train, c.n_test), (16, 4));
    let paths = |e: &Evaluation| e.pairs.iter().map(|p| p.source_path.clone()).collect::<Vec<_>>();
    assert_eq!(paths(&c.graphconv), paths(&c.ggnn));
    let actual = |e: &Evaluation| e.pairs.iter().map(|p| p.actual_ms).collect::<Vec<_>>();
    assert_eq!(actual(&c.graphconv), actual(&c.ggnn));
}
