use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use testtime::faast::io::{to_binary, to_json};
use testtime::faast::stats::{control_flow_stats, corpus_stats, ControlFlowStats, CorpusStats};
use testtime::faast::{build_fa_ast, EdgeKind};
use testtime::java::{parse_file, Ast, NodeKind};
use testtime::miner::{pair_with_sources, read_reports, ZERO_TIME_MS};
use testtime::pipeline::{
    compare_models, cross_eval, evaluate, load_dataset, read_manifest, split, train, write_manifest,
    write_synth_corpus, Dataset, Evaluation, ManifestRecord, Metrics, TrainedModel,
};

use crate::{Cli, Command, DataArgs, GraphFormat};

/// Output is buffered and written once, so a closed pipe cannot interrupt a command halfway.
macro_rules! outln {
    ($o:expr, $($arg:tt)*) => {{ let _ = writeln!($o, $($arg)*); }};
}

macro_rules! out {
    ($o:expr, $($arg:tt)*) => {{ let _ = write!($o, $($arg)*); }};
}

pub fn run(cli: Cli, o: &mut String) -> Result<()> {
    let Cli { json, jobs, command, .. } = cli;
    match command {
        Command::Parse { file, emit_ast } => parse(&file, emit_ast, json, o),
        Command::Graph { input, out, format } => graph(&input, &out, format, jobs, json, o),
        Command::Stats { graph_dir } => stats(&graph_dir, json, o),
        Command::Ingest { reports, repo, out, project, source_roots } => {
            ingest(&reports, &repo, &out, project, &source_roots, jobs, json, o)
        }
        Command::Synth { n, seed, out } => synth(n, seed, &out, json, o),
        Command::Split { manifest, train_frac, seed, out } => {
            split_manifest(&manifest, train_frac, seed, &out, json, o)
        }
        Command::Train { data, run, out, loss_log } => {
            let config = run.resolve()?;
            let ds = load(&data, jobs)?;
            let outcome = train(&ds.samples, &config)?;
            outcome.model.save(&out)?;
            let log_path = loss_log.unwrap_or_else(|| out.with_extension("loss.csv"));
            let mut csv = String::from("epoch,loss\n");
            for (i, l) in outcome.loss_log.iter().enumerate() {
                let _ = writeln!(csv, "{},{l}", i + 1);
            }
            write_file(&log_path, csv.as_bytes())?;
            let summary = TrainSummary {
                model: out.display().to_string(),
                loss_log: log_path.display().to_string(),
                model_kind: config.model_kind.to_string(),
                n_train: ds.samples.len(),
                skipped: ds.skipped.len(),
                final_loss: outcome.loss_log.last().copied(),
            };
            if json {
                print_json(o, &summary);
            } else {
                outln!(
                    o,
                    "trained {} on {} samples ({} skipped), final loss {}",
                    summary.model_kind,
                    summary.n_train,
                    summary.skipped,
                    summary.final_loss.map_or("n/a".into(), |l| format!("{l:.6}"))
                );
                outln!(o, "model    {}\nloss log {}", summary.model, summary.loss_log);
            }
            Ok(())
        }
        Command::Eval { model, data, scatter } => {
            let model = TrainedModel::load(&model)?;
            let ds = load(&data, jobs)?;
            let ev = evaluate(&model, &ds.samples)?;
            if let Some(path) = scatter {
                write_scatter(&path, &ev)?;
            }
            if json {
                print_json(o, &ev.metrics);
            } else {
                print_metrics(o, &ev.metrics);
            }
            Ok(())
        }
        Command::CrossEval { data, run, hold_out, scatter } => {
            let config = run.resolve()?;
            let ds = load(&data, jobs)?;
            let x = cross_eval(&ds.samples, &hold_out, &config)?;
            if let Some(path) = scatter {
                write_scatter(&path, &x.evaluation)?;
            }
            let summary = CrossSummary {
                held_out: x.held_out,
                train_projects: x.train_projects,
                n_train: x.n_train,
                unseen_tokens: x.unseen_tokens,
                leakage_check: "passed",
                metrics: x.evaluation.metrics,
            };
            if json {
                print_json(o, &summary);
            } else {
                outln!(o, "held out   {} (trained on {})", summary.held_out, summary.train_projects.join(", "));
                outln!(o, "n_train    {}", summary.n_train);
                outln!(o, "unseen     {} held-out tokens, none in the vocabulary", summary.unseen_tokens);
                print_metrics(o, &summary.metrics);
            }
            Ok(())
        }
        Command::Compare { data, run, scatter_dir } => {
            let config = run.resolve()?;
            let ds = load(&data, jobs)?;
            let c = compare_models(&ds.samples, &config)?;
            if let Some(dir) = scatter_dir {
                std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                write_scatter(&dir.join("graphconv.csv"), &c.graphconv)?;
                write_scatter(&dir.join("ggnn.csv"), &c.ggnn)?;
            }
            let summary = CompareSummary {
                n_train: c.n_train,
                n_test: c.n_test,
                graphconv: c.graphconv.metrics,
                ggnn: c.ggnn.metrics,
            };
            if json {
                print_json(o, &summary);
            } else {
                outln!(o, "split      {} train / {} test", summary.n_train, summary.n_test);
                outln!(o, "{:<10} {:>10} {:>14} {:>10}", "model", "pearson", "mse (norm)", "rmse ms");
                for (name, m) in [("graphconv", &summary.graphconv), ("ggnn", &summary.ggnn)] {
                    outln!(
                        o,
                        "{name:<10} {:>10} {:>14.6} {:>10.3}",
                        fmt_pearson(m.pearson),
                        m.mse_normalized,
                        m.mse_ms.sqrt()
                    );
                }
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct TrainSummary {
    model: String,
    loss_log: String,
    model_kind: String,
    n_train: usize,
    skipped: usize,
    final_loss: Option<f64>,
}

#[derive(Serialize)]
struct CrossSummary {
    held_out: String,
    train_projects: Vec<String>,
    n_train: usize,
    unseen_tokens: usize,
    leakage_check: &'static str,
    metrics: Metrics,
}

#[derive(Serialize)]
struct CompareSummary {
    n_train: usize,
    n_test: usize,
    graphconv: Metrics,
    ggnn: Metrics,
}

fn print_json<T: Serialize>(o: &mut String, value: &T) {
    outln!(o, "{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load(data: &DataArgs, jobs: usize) -> Result<Dataset> {
    let ds = load_dataset(&data.manifest, jobs, data.min_ms)?;
    if !ds.skipped.is_empty() {
        log::warn!("{} of {} records skipped", ds.skipped.len(), ds.skipped.len() + ds.samples.len());
    }
    Ok(ds)
}

fn fmt_pearson(p: Option<f64>) -> String {
    p.map_or("undefined".into(), |r| format!("{r:.4}"))
}

fn print_metrics(o: &mut String, m: &Metrics) {
    outln!(o, "n_test     {}", m.n_test);
    outln!(o, "pearson    {}", fmt_pearson(m.pearson));
    outln!(o, "mse norm   {:.6}", m.mse_normalized);
    outln!(o, "mse ms^2   {:.3}", m.mse_ms);
    outln!(o, "rmse ms    {:.3}", m.mse_ms.sqrt());
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_scatter(path: &Path, ev: &Evaluation) -> Result<()> {
    let mut out = String::from("source_path,project,actual_ms,predicted_ms\n");
    for p in &ev.pairs {
        let _ =
            writeln!(out, "{},{},{},{}", csv_field(&p.source_path), csv_field(&p.project), p.actual_ms, p.predicted_ms);
    }
    write_file(path, out.as_bytes())
}

#[derive(Serialize)]
struct ParseSummary {
    source_path: String,
    package: Option<String>,
    imports: usize,
    nodes: usize,
    terminals: usize,
    depth: usize,
    classes: usize,
    methods: usize,
    statements: usize,
    kinds: BTreeMap<String, usize>,
}

impl ParseSummary {
    fn of(ast: &Ast) -> Self {
        let mut kinds = BTreeMap::new();
        for n in &ast.nodes {
            *kinds.entry(n.kind.to_string()).or_insert(0) += 1;
        }
        ParseSummary {
            source_path: ast.source_path.clone(),
            package: ast.package.clone(),
            imports: ast.imports.len(),
            nodes: ast.len(),
            terminals: ast.terminals().count(),
            depth: (0..ast.len()).map(|id| ast.ancestors(id).count()).max().unwrap_or(0),
            classes: ast.count_kind(NodeKind::ClassDecl),
            methods: ast.count_kind(NodeKind::MethodDecl),
            statements: ast.nodes.iter().filter(|n| n.kind.is_statement()).count(),
            kinds,
        }
    }
}

fn parse(file: &Path, emit_ast: bool, json: bool, o: &mut String) -> Result<()> {
    let ast = parse_file(file)?;
    match (emit_ast, json) {
        (true, true) => print_json(o, &ast),
        (true, false) => out!(o, "{}", ast.pretty()),
        (false, true) => print_json(o, &ParseSummary::of(&ast)),
        (false, false) => {
            let s = ParseSummary::of(&ast);
            outln!(o, "{}: {} nodes, {} terminals, depth {}", s.source_path, s.nodes, s.terminals, s.depth);
            outln!(o, "  classes {}, methods {}, statements {}", s.classes, s.methods, s.statements);
            if let Some(p) = &s.package {
                outln!(o, "  package {p}, imports {}", s.imports);
            }
        }
    }
    Ok(())
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

/// Files under `root` with one of `exts`, sorted, paired with their path relative to `root`.
fn files_with_ext(root: &Path, exts: &[&str]) -> Result<Vec<(PathBuf, PathBuf)>> {
    let mut out = Vec::new();
    for e in walkdir::WalkDir::new(root).sort_by_file_name() {
        let e = e.with_context(|| format!("walking {}", root.display()))?;
        let matches = e.path().extension().and_then(|x| x.to_str()).is_some_and(|x| exts.contains(&x));
        if e.file_type().is_file() && matches {
            let rel = e.path().strip_prefix(root).expect("walk stays under root").to_path_buf();
            out.push((e.into_path(), rel));
        }
    }
    Ok(out)
}

fn slash_path(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

#[derive(Serialize)]
struct Failure {
    source_path: String,
    reason: String,
}

#[derive(Serialize)]
struct GraphSummary {
    written: usize,
    failed: Vec<Failure>,
    edges: BTreeMap<String, usize>,
}

fn graph(input: &Path, out: &Path, format: GraphFormat, jobs: usize, json: bool, o: &mut String) -> Result<()> {
    let files = if input.is_dir() {
        files_with_ext(input, &["java"])?
    } else {
        let name = input.file_name().with_context(|| format!("{} is not a file", input.display()))?;
        vec![(input.to_path_buf(), PathBuf::from(name))]
    };
    if files.is_empty() {
        bail!("no .java files under {}", input.display());
    }
    let ext = match format {
        GraphFormat::Json => "json",
        GraphFormat::Binary => "faag",
    };
    let results: Vec<Result<Result<BTreeMap<EdgeKind, usize>, Failure>>> = pool(jobs)?.install(|| {
        files
            .par_iter()
            .map(|(path, rel)| {
                let ast = match parse_file(path) {
                    Ok(a) => a,
                    Err(e) => return Ok(Err(Failure { source_path: slash_path(rel), reason: e.to_string() })),
                };
                let mut g = build_fa_ast(&ast);
                g.source_path = slash_path(rel);
                let bytes = match format {
                    GraphFormat::Json => to_json(&g).into_bytes(),
                    GraphFormat::Binary => to_binary(&g),
                };
                write_file(&out.join(rel).with_extension(ext), &bytes)?;
                Ok(Ok(g.edge_histogram()))
            })
            .collect()
    });
    let mut total: BTreeMap<EdgeKind, usize> = EdgeKind::ALL.iter().map(|&k| (k, 0)).collect();
    let mut summary = GraphSummary { written: 0, failed: Vec::new(), edges: BTreeMap::new() };
    for r in results {
        match r? {
            Ok(hist) => {
                summary.written += 1;
                for (k, n) in hist {
                    *total.get_mut(&k).expect("every kind present") += n;
                }
            }
            Err(f) => {
                log::warn!("skipping {}: {}", f.source_path, f.reason);
                summary.failed.push(f);
            }
        }
    }
    summary.edges = total.iter().map(|(k, n)| (k.to_string(), *n)).collect();
    if json {
        print_json(o, &summary);
    } else {
        outln!(o, "wrote {} graphs to {} ({} failed)", summary.written, out.display(), summary.failed.len());
        for (k, n) in &total {
            outln!(o, "  {:<14} {n:>10}", k.to_string());
        }
    }
    if summary.written == 0 {
        bail!("no file could be parsed");
    }
    Ok(())
}

#[derive(Serialize)]
struct StatsSummary {
    control_flow: ControlFlowStats,
    corpus: CorpusStats,
}

fn stats(dir: &Path, json: bool, o: &mut String) -> Result<()> {
    let files = files_with_ext(dir, &["json", "faag"])?;
    if files.is_empty() {
        bail!("no graph files under {}", dir.display());
    }
    let default_project = dir.file_name().map_or(".".to_string(), |n| n.to_string_lossy().into_owned());
    let mut graphs = Vec::with_capacity(files.len());
    for (path, rel) in &files {
        let g = testtime::faast::io::read_graph(path).with_context(|| format!("reading {}", path.display()))?;
        let mut comps = rel.components();
        let project = match (comps.next(), comps.next()) {
            (Some(first), Some(_)) => first.as_os_str().to_string_lossy().into_owned(),
            _ => default_project.clone(),
        };
        graphs.push((project, g));
    }
    let pairs = || graphs.iter().map(|(p, g)| (p.as_str(), g));
    let summary = StatsSummary { control_flow: control_flow_stats(pairs()), corpus: corpus_stats(pairs()) };
    if json {
        print_json(o, &summary);
    } else {
        outln!(o, "{}", summary.corpus);
        out!(o, "{}", summary.control_flow);
    }
    Ok(())
}

#[derive(Serialize)]
struct IngestSummary {
    manifest: String,
    unmatched_file: String,
    report_entries: usize,
    rows: usize,
    unmatched: usize,
    zero_time: usize,
}

fn ingest(
    reports: &Path,
    repo: &Path,
    out: &Path,
    project: Option<String>,
    roots: &[String],
    jobs: usize,
    json: bool,
    o: &mut String,
) -> Result<()> {
    let entries = read_reports(reports, jobs)?;
    if entries.is_empty() {
        bail!("no test reports found under {}", reports.display());
    }
    let pairing = pair_with_sources(&entries, repo, roots)?;
    let project = match project {
        Some(p) => p,
        None => std::path::absolute(repo)?
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .context("cannot derive a project name from the repository path; pass --project")?,
    };
    let out_dir = out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let records = pairing.manifest(repo, out_dir, &project);
    write_manifest(out, &records)?;
    let unmatched_path = out.with_extension("unmatched.json");
    let text = serde_json::to_string_pretty(&pairing.unmatched).expect("unmatched serializes");
    write_file(&unmatched_path, text.as_bytes())?;
    let summary = IngestSummary {
        manifest: out.display().to_string(),
        unmatched_file: unmatched_path.display().to_string(),
        report_entries: entries.len(),
        rows: records.len(),
        unmatched: pairing.unmatched.len(),
        zero_time: pairing.sources.iter().filter(|s| s.zero_time).count(),
    };
    if json {
        print_json(o, &summary);
    } else {
        outln!(
            o,
            "{} report entries -> {} manifest rows in {}",
            summary.report_entries,
            summary.rows,
            summary.manifest
        );
        outln!(o, "{} classes unmatched (listed in {})", summary.unmatched, summary.unmatched_file);
        if summary.zero_time > 0 {
            outln!(o, "{} rows below {ZERO_TIME_MS} ms; exclude them with --min-ms", summary.zero_time);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SynthSummary {
    files: usize,
    manifest: String,
    per_project: BTreeMap<String, usize>,
    min_ms: f64,
    max_ms: f64,
}

fn synth(n: usize, seed: u64, out: &Path, json: bool, o: &mut String) -> Result<()> {
    let m = write_synth_corpus(out, n, seed)?;
    let mut per_project = BTreeMap::new();
    for f in &m.files {
        *per_project.entry(f.project.clone()).or_insert(0) += 1;
    }
    let times = || m.files.iter().map(|f| f.execution_time_ms);
    let summary = SynthSummary {
        files: m.files.len(),
        manifest: out.join("manifest.jsonl").display().to_string(),
        per_project,
        min_ms: times().fold(f64::INFINITY, f64::min),
        max_ms: times().fold(f64::NEG_INFINITY, f64::max),
    };
    if json {
        print_json(o, &summary);
    } else {
        let projects: Vec<String> = summary.per_project.iter().map(|(p, n)| format!("{p} {n}")).collect();
        outln!(o, "wrote {} files ({}) to {}", summary.files, projects.join(", "), out.display());
        outln!(o, "labels {:.1}..{:.1} ms, manifest {}", summary.min_ms, summary.max_ms, summary.manifest);
    }
    Ok(())
}

/// `path` relative to `base`, stepping up with `..` where needed. Both are absolute.
fn relative_to(path: &Path, base: &Path) -> PathBuf {
    let (p, b): (Vec<_>, Vec<_>) = (path.components().collect(), base.components().collect());
    let common = p.iter().zip(&b).take_while(|(x, y)| x == y).count();
    if common == 0 {
        return path.to_path_buf();
    }
    let mut rel: PathBuf = b[common..].iter().map(|_| "..").collect();
    rel.extend(&p[common..]);
    rel
}

/// Re-expresses manifest paths for a manifest that will live in `to`.
fn rebase(records: Vec<ManifestRecord>, from: &Path, to: &Path) -> Result<Vec<ManifestRecord>> {
    let canon = |p: &Path| std::fs::canonicalize(p).or_else(|_| std::path::absolute(p));
    let to = canon(to)?;
    records
        .into_iter()
        .map(|mut r| {
            r.source_path = slash_path(&relative_to(&canon(&from.join(&r.source_path))?, &to));
            Ok(r)
        })
        .collect()
}

fn split_manifest(manifest: &Path, train_frac: f64, seed: u64, out: &Path, json: bool, o: &mut String) -> Result<()> {
    let records = read_manifest(manifest)?;
    let (tr, te) = split(&records, train_frac, seed)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let from = manifest.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let (tr, te) = (rebase(tr, from, out)?, rebase(te, from, out)?);
    write_manifest(&out.join("train.jsonl"), &tr)?;
    write_manifest(&out.join("test.jsonl"), &te)?;
    if json {
        print_json(o, &serde_json::json!({ "train": tr.len(), "test": te.len() }));
    } else {
        outln!(o, "{} train / {} test rows in {}", tr.len(), te.len(), out.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_step_up() {
        let rel = |a: &str, b: &str| slash_path(&relative_to(Path::new(a), Path::new(b)));
        assert_eq!(rel("/d/syn/a/X.java", "/d/split"), "../syn/a/X.java");
        assert_eq!(rel("/d/syn/a/X.java", "/d/syn"), "a/X.java");
        assert_eq!(rel("/d/X.java", "/d/a/b"), "../../X.java");
    }

    #[test]
    fn csv_fields_are_quoted_when_needed() {
        assert_eq!(csv_field("a/B.java"), "a/B.java");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
