use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{Adam, Batch, Mode, ModelKind, Net, NetConfig};
use crate::faast::FaAstGraph;
use crate::repr::{encode, EncodedGraph, Normalizer, Vocabulary};

use super::artifact::TrainedModel;
use super::dataset::{split_indices, Sample};
use super::{derive_seed, PipelineError, RunConfig};

pub struct TrainOutcome {
    pub model: TrainedModel,
    /// Mean training loss of each epoch.
    pub loss_log: Vec<f64>,
}

/// Fits vocabulary and normalization on `samples`, then trains a network.
pub fn train(samples: &[Sample], config: &RunConfig) -> Result<TrainOutcome, PipelineError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(PipelineError::EmptyTrainSet);
    }
    let vocab = Vocabulary::build(samples.iter().map(|s| &s.graph), config.value_cap)?;
    let norm = Normalizer::fit(samples.iter().map(|s| s.execution_time_ms))?;
    let encoded: Vec<EncodedGraph> = samples
        .iter()
        .map(|s| {
            let mut g = s.graph.clone();
            g.label_ms = Some(s.execution_time_ms);
            encode(&g, &vocab, Some(&norm))
        })
        .collect::<Result<_, _>>()?;

    let mut net_config = NetConfig::new(config.model_kind, config.hidden_dim, vocab.num_kinds(), vocab.num_values());
    net_config.ggnn_steps = config.ggnn_steps;
    net_config.block_order = config.block_order;
    let mut net = Net::new(net_config, derive_seed(config.seed, "init"))?;
    let mut adam = Adam::new(config.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "shuffle"));
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut loss_log = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let graphs: Vec<&EncodedGraph> = chunk.iter().map(|&i| &encoded[i]).collect();
            let batch = Batch::new(&graphs)?;
            let step = net.train_step(&batch, Mode::Train)?;
            adam.step(net.params_mut(), &step.grads);
            net.update_running_stats(&step.bn_stats);
            total += step.loss * chunk.len() as f64;
        }
        let mean = total / encoded.len() as f64;
        log::debug!("epoch {epoch}: loss {mean:.6}");
        loss_log.push(mean);
    }

    Ok(TrainOutcome { model: TrainedModel { net, vocab, norm, config: config.clone(), train_size: samples.len() }, loss_log })
}

/// Normalized predictions, computed batch-parallel with running statistics.
pub fn predict_normalized(model: &TrainedModel, graphs: &[&FaAstGraph]) -> Result<Vec<f64>, PipelineError> {
    let encoded: Vec<EncodedGraph> = graphs.iter().map(|g| encode(g, &model.vocab, None)).collect::<Result<_, _>>()?;
    let chunks: Vec<Vec<f64>> = encoded
        .par_chunks(model.config.batch_size.max(1))
        .map(|chunk| {
            let refs: Vec<&EncodedGraph> = chunk.iter().collect();
            let batch = Batch::new(&refs)?;
            Ok(model.net.predict(&batch)?)
        })
        .collect::<Result<_, PipelineError>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// Undefined (None) when either side is constant or there are fewer than two samples.
    pub pearson: Option<f64>,
    pub mse_normalized: f64,
    pub mse_ms: f64,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionPair {
    pub source_path: String,
    pub project: String,
    pub actual_ms: f64,
    pub predicted_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub metrics: Metrics,
    pub pairs: Vec<PredictionPair>,
}

/// Population Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, PipelineError> {
    if xs.len() != ys.len() {
        return Err(PipelineError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(PipelineError::ConstantInput);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(PipelineError::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn evaluate(model: &TrainedModel, test: &[Sample]) -> Result<Evaluation, PipelineError> {
    if test.is_empty() {
        return Err(PipelineError::EmptyTestSet);
    }
    let graphs: Vec<&FaAstGraph> = test.iter().map(|s| &s.graph).collect();
    let pred = predict_normalized(model, &graphs)?;
    let norm = &model.norm;
    let actual: Vec<f64> = test.iter().map(|s| s.execution_time_ms).collect();
    let pred_ms: Vec<f64> = pred.iter().map(|&p| norm.denormalize(p)).collect();
    let n = test.len() as f64;
    let mse_normalized = pred.iter().zip(&actual).map(|(p, a)| (p - norm.normalize(*a)).powi(2)).sum::<f64>() / n;
    let mse_ms = pred_ms.iter().zip(&actual).map(|(p, a)| (p - a).powi(2)).sum::<f64>() / n;
    let pearson = match pearson(&pred_ms, &actual) {
        Ok(r) => Some(r),
        Err(PipelineError::ConstantInput) => {
            log::warn!("Pearson correlation undefined on this test set");
            None
        }
        Err(e) => return Err(e),
    };
    let pairs = test
        .iter()
        .zip(&pred_ms)
        .map(|(s, &p)| PredictionPair {
            source_path: s.graph.source_path.clone(),
            project: s.project.clone(),
            actual_ms: s.execution_time_ms,
            predicted_ms: p,
        })
        .collect();
    Ok(Evaluation { metrics: Metrics { pearson, mse_normalized, mse_ms, n_test: test.len() }, pairs })
}

/// Recomputes vocabulary and normalization from the training samples and
/// checks that the model carries exactly those.
pub fn check_no_leakage(model: &TrainedModel, train: &[Sample]) -> Result<(), PipelineError> {
    let vocab = Vocabulary::build(train.iter().map(|s| &s.graph), model.config.value_cap)?;
    let norm = Normalizer::fit(train.iter().map(|s| s.execution_time_ms))?;
    if vocab != model.vocab {
        return Err(PipelineError::Leakage("vocabulary differs from one fit on the training samples".into()));
    }
    if norm != model.norm {
        return Err(PipelineError::Leakage("normalization constants differ from the training samples".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossEval {
    pub held_out: String,
    pub train_projects: Vec<String>,
    pub n_train: usize,
    /// Held-out tokens that the vocabulary maps to the unknown id.
    pub unseen_tokens: usize,
    pub evaluation: Evaluation,
}

/// Trains on every project except `held_out` and tests on `held_out`.
pub fn cross_eval(samples: &[Sample], held_out: &str, config: &RunConfig) -> Result<CrossEval, PipelineError> {
    let projects: BTreeSet<&str> = samples.iter().map(|s| s.project.as_str()).collect();
    if !projects.contains(held_out) {
        return Err(PipelineError::UnknownProject(held_out.to_string()));
    }
    if projects.len() < 2 {
        return Err(PipelineError::TooFewProjects(projects.len()));
    }
    let (test, train_set): (Vec<Sample>, Vec<Sample>) = samples.iter().cloned().partition(|s| s.project == held_out);
    let outcome = train(&train_set, config)?;
    check_no_leakage(&outcome.model, &train_set)?;
    let seen: BTreeSet<&str> = train_set.iter().flat_map(|s| s.graph.node_values.iter().flatten().map(String::as_str)).collect();
    let unseen: BTreeSet<&str> = test
        .iter()
        .flat_map(|s| s.graph.node_values.iter().flatten().map(String::as_str))
        .filter(|v| !seen.contains(v))
        .collect();
    if let Some(v) = unseen.iter().find(|v| outcome.model.vocab.contains_value(v)) {
        return Err(PipelineError::Leakage(format!("held-out token `{v}` is in the vocabulary")));
    }
    let evaluation = evaluate(&outcome.model, &test)?;
    Ok(CrossEval {
        held_out: held_out.to_string(),
        train_projects: projects.into_iter().filter(|p| *p != held_out).map(String::from).collect(),
        n_train: train_set.len(),
        unseen_tokens: unseen.len(),
        evaluation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub n_train: usize,
    pub n_test: usize,
    pub graphconv: Evaluation,
    pub ggnn: Evaluation,
}

/// Trains both model kinds on the same split with the same seed.
pub fn compare_models(samples: &[Sample], config: &RunConfig) -> Result<Comparison, PipelineError> {
    let (tr, te) = split_indices(samples.len(), config.train_frac, config.seed)?;
    let train_set: Vec<Sample> = tr.iter().map(|&i| samples[i].clone()).collect();
    let test_set: Vec<Sample> = te.iter().map(|&i| samples[i].clone()).collect();
    let run = |kind: ModelKind| -> Result<Evaluation, PipelineError> {
        let cfg = RunConfig { model_kind: kind, ..config.clone() };
        evaluate(&train(&train_set, &cfg)?.model, &test_set)
    };
    Ok(Comparison { n_train: train_set.len(), n_test: test_set.len(), graphconv: run(ModelKind::GraphConv)?, ggnn: run(ModelKind::Ggnn)? })
}
