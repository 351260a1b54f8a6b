//! Execution times from Surefire/JUnit XML reports, paired with the test
//! sources they came from.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::java::parse_file;
use crate::pipeline::ManifestRecord;

/// Times below this are under report precision and get flagged.
pub const ZERO_TIME_MS: f64 = 1.0;
pub const DEFAULT_SOURCE_ROOT: &str = "src/test/java";

#[derive(Debug, Error)]
pub enum MinerError {
    #[error("malformed report{}: byte {offset}: {message}", path.as_ref().map(|p| format!(" {}", p.display())).unwrap_or_default())]
    MalformedReport { path: Option<PathBuf>, offset: u64, message: String },
    #[error("no source root ({roots}) under {repo}")]
    NoSourceRoots { repo: PathBuf, roots: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReportEntry {
    /// Fully qualified, possibly with `$Nested` suffixes.
    pub class_name: String,
    pub time_s: f64,
    pub run_id: String,
}

struct Suite {
    name: Option<String>,
    time: Option<f64>,
    has_child_suite: bool,
    cases: BTreeMap<String, f64>,
}

fn malformed(offset: u64, message: impl Into<String>) -> MinerError {
    MinerError::MalformedReport { path: None, offset, message: message.into() }
}

/// Surefire writes times with locale grouping (`1,234.5`) on some versions.
fn parse_time(raw: &str, offset: u64) -> Result<f64, MinerError> {
    let t: f64 = raw
        .trim()
        .replace(',', "")
        .parse()
        .map_err(|_| malformed(offset, format!("time `{raw}` is not a number")))?;
    if !t.is_finite() || t < 0.0 {
        return Err(malformed(offset, format!("time `{raw}` is not a non-negative number")));
    }
    Ok(t)
}

fn attrs(e: &BytesStart, reader: &Reader<&[u8]>, offset: u64) -> Result<BTreeMap<String, String>, MinerError> {
    let mut out = BTreeMap::new();
    for a in e.attributes() {
        let a = a.map_err(|err| malformed(offset, err.to_string()))?;
        let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
        let value = a.decode_and_unescape_value(reader.decoder()).map_err(|err| malformed(offset, err.to_string()))?;
        out.insert(key, value.into_owned());
    }
    Ok(out)
}

fn close_suite(s: Suite, out: &mut BTreeMap<String, f64>) {
    if s.has_child_suite {
        return;
    }
    match (s.name, s.time) {
        (Some(name), Some(time)) => *out.entry(name).or_default() += time,
        (name, _) => {
            for (class, t) in s.cases {
                let class = if class.is_empty() { name.clone().unwrap_or_default() } else { class };
                *out.entry(class).or_default() += t;
            }
        }
    }
}

/// One entry per class. A `testsuite` with `name` and `time` gives the class
/// total directly; otherwise its `testcase` times are summed per `classname`.
/// Suites that only wrap other suites are skipped, and repeated classes
/// within one report are summed.
pub fn parse_surefire_xml(xml: &[u8], run_id: &str) -> Result<Vec<TestReportEntry>, MinerError> {
    let mut reader = Reader::from_reader(xml);
    let mut buf = Vec::new();
    let mut stack: Vec<Option<Suite>> = Vec::new();
    let mut loose: BTreeMap<String, f64> = BTreeMap::new();
    let mut totals: BTreeMap<String, f64> = BTreeMap::new();
    let mut seen_element = false;
    loop {
        let offset = reader.buffer_position();
        let event = reader.read_event_into(&mut buf).map_err(|e| malformed(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                match e.local_name().as_ref() {
                    b"testsuite" => {
                        seen_element = true;
                        let a = attrs(e, &reader, offset)?;
                        let time = a.get("time").filter(|t| !t.trim().is_empty()).map(|t| parse_time(t, offset)).transpose()?;
                        if let Some(Some(parent)) = stack.iter_mut().rev().find(|s| s.is_some()) {
                            parent.has_child_suite = true;
                        }
                        let suite = Suite { name: a.get("name").cloned(), time, has_child_suite: false, cases: BTreeMap::new() };
                        if empty {
                            close_suite(suite, &mut totals);
                        } else {
                            stack.push(Some(suite));
                        }
                    }
                    b"testcase" => {
                        seen_element = true;
                        let a = attrs(e, &reader, offset)?;
                        let time = match a.get("time").filter(|t| !t.trim().is_empty()) {
                            Some(t) => parse_time(t, offset)?,
                            None => 0.0,
                        };
                        let class = a.get("classname").cloned().unwrap_or_default();
                        match stack.iter_mut().rev().find(|s| s.is_some()) {
                            Some(Some(suite)) => *suite.cases.entry(class).or_default() += time,
                            _ => {
                                if class.is_empty() {
                                    return Err(malformed(offset, "testcase outside a testsuite has no classname"));
                                }
                                *loose.entry(class).or_default() += time;
                            }
                        }
                        if !empty {
                            stack.push(None);
                        }
                    }
                    _ => {
                        if !empty {
                            stack.push(None);
                        }
                    }
                }
            }
            Event::End(e) => {
                let top = stack.pop().ok_or_else(|| malformed(offset, "unexpected closing tag"))?;
                if e.local_name().as_ref() == b"testsuite" {
                    if let Some(suite) = top {
                        close_suite(suite, &mut totals);
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(malformed(reader.buffer_position(), "unclosed element at end of input"));
    }
    if !seen_element {
        return Err(malformed(0, "no testsuite or testcase elements"));
    }
    for (class, t) in loose {
        *totals.entry(class).or_default() += t;
    }
    Ok(totals
        .into_iter()
        .filter(|(name, _)| !name.is_empty())
        .map(|(class_name, time_s)| TestReportEntry { class_name, time_s, run_id: run_id.to_string() })
        .collect())
}

/// Parses every `*.xml` under `dir`. The run id of a report is its first
/// directory component below `dir` (empty for reports directly in `dir`).
pub fn read_reports(dir: &Path, jobs: usize) -> Result<Vec<TestReportEntry>, MinerError> {
    let mut files: Vec<PathBuf> = Vec::new();
    for e in WalkDir::new(dir).sort_by_file_name() {
        let e = e.map_err(|err| MinerError::Io {
            path: err.path().unwrap_or(dir).to_path_buf(),
            source: err.into_io_error().unwrap_or_else(|| std::io::Error::other("directory loop")),
        })?;
        if e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "xml") {
            files.push(e.into_path());
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
    let parsed: Vec<Result<Vec<TestReportEntry>, MinerError>> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let bytes = std::fs::read(path).map_err(|source| MinerError::Io { path: path.clone(), source })?;
                let rel = path.strip_prefix(dir).expect("walked below dir");
                let run_id = if rel.components().count() > 1 {
                    rel.components().next().expect("non-empty").as_os_str().to_string_lossy().into_owned()
                } else {
                    String::new()
                };
                parse_surefire_xml(&bytes, &run_id).map_err(|e| match e {
                    MinerError::MalformedReport { offset, message, .. } => {
                        MinerError::MalformedReport { path: Some(path.clone()), offset, message }
                    }
                    other => other,
                })
            })
            .collect()
    });
    let mut out = Vec::new();
    for p in parsed {
        out.extend(p?);
    }
    Ok(out)
}

/// Arithmetic mean per class, sorted by class name. Classes seen once are
/// returned unchanged, so aggregating twice changes nothing. Merged entries
/// carry the `+`-joined run ids.
pub fn aggregate_runs(entries: &[TestReportEntry]) -> Vec<TestReportEntry> {
    let mut groups: BTreeMap<&str, Vec<&TestReportEntry>> = BTreeMap::new();
    for e in entries {
        groups.entry(&e.class_name).or_default().push(e);
    }
    groups
        .into_iter()
        .map(|(class, es)| {
            if es.len() == 1 {
                return es[0].clone();
            }
            let time_s = es.iter().map(|e| e.time_s).sum::<f64>() / es.len() as f64;
            let runs: BTreeSet<&str> = es.iter().map(|e| e.run_id.as_str()).collect();
            TestReportEntry { class_name: class.to_string(), time_s, run_id: runs.into_iter().collect::<Vec<_>>().join("+") }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedSource {
    /// Relative to the repository root.
    pub source_path: String,
    pub class_names: Vec<String>,
    pub time_ms: f64,
    /// Below report precision; kept in the manifest.
    pub zero_time: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unmatched {
    pub class_name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Pairing {
    pub sources: Vec<PairedSource>,
    pub unmatched: Vec<Unmatched>,
}

impl Pairing {
    /// Manifest rows with paths resolved for a manifest written into
    /// `manifest_dir`.
    pub fn manifest(&self, repo_root: &Path, manifest_dir: &Path, project: &str) -> Vec<ManifestRecord> {
        let repo = std::path::absolute(repo_root).unwrap_or_else(|_| repo_root.to_path_buf());
        let base = std::path::absolute(manifest_dir).unwrap_or_else(|_| manifest_dir.to_path_buf());
        self.sources
            .iter()
            .map(|s| {
                let full = repo.join(&s.source_path);
                let path = full.strip_prefix(&base).map(Path::to_path_buf).unwrap_or(full);
                ManifestRecord {
                    source_path: path.to_string_lossy().replace('\\', "/"),
                    project: project.to_string(),
                    execution_time_ms: s.time_ms,
                }
            })
            .collect()
    }
}

/// `a.b.C$Inner` becomes `a/b/C.java`.
pub fn class_to_relative_path(class_name: &str) -> PathBuf {
    let outer = class_name.split('$').next().unwrap_or(class_name);
    let mut p: PathBuf = outer.split('.').collect();
    p.set_extension("java");
    p
}

/// Every directory under `repo_root` whose path ends with one of `roots`
/// (for example `src/test/java`), in sorted order.
pub fn find_source_roots(repo_root: &Path, roots: &[String]) -> Result<Vec<PathBuf>, MinerError> {
    let suffixes: Vec<PathBuf> = roots.iter().map(PathBuf::from).collect();
    let mut found = Vec::new();
    for e in WalkDir::new(repo_root).sort_by_file_name() {
        let e = e.map_err(|err| MinerError::Io {
            path: err.path().unwrap_or(repo_root).to_path_buf(),
            source: err.into_io_error().unwrap_or_else(|| std::io::Error::other("directory loop")),
        })?;
        if e.file_type().is_dir() && suffixes.iter().any(|s| e.path().ends_with(s)) {
            found.push(e.into_path());
        }
    }
    if found.is_empty() {
        return Err(MinerError::NoSourceRoots { repo: repo_root.to_path_buf(), roots: roots.join(", ") });
    }
    Ok(found)
}

/// Resolves aggregated class times to test sources. Nested classes count
/// toward their top-level file; several classes in one file are summed.
/// Classes without a file, or whose file does not parse, are reported in
/// `unmatched` instead of failing.
pub fn pair_with_sources(entries: &[TestReportEntry], repo_root: &Path, roots: &[String]) -> Result<Pairing, MinerError> {
    let source_roots = find_source_roots(repo_root, roots)?;
    let mut by_file: BTreeMap<PathBuf, (Vec<String>, f64)> = BTreeMap::new();
    let mut pairing = Pairing::default();
    for e in aggregate_runs(entries) {
        let rel = class_to_relative_path(&e.class_name);
        let hits: Vec<PathBuf> = source_roots.iter().map(|r| r.join(&rel)).filter(|p| p.is_file()).collect();
        let Some(hit) = hits.first() else {
            pairing.unmatched.push(Unmatched { class_name: e.class_name, reason: "no source file".into() });
            continue;
        };
        if hits.len() > 1 {
            log::warn!("{} found in {} source roots, using {}", e.class_name, hits.len(), hit.display());
        }
        let entry = by_file.entry(hit.clone()).or_default();
        entry.0.push(e.class_name);
        entry.1 += e.time_s * 1000.0;
    }
    for (path, (class_names, time_ms)) in by_file {
        if let Err(err) = parse_file(&path) {
            for class_name in class_names {
                pairing.unmatched.push(Unmatched { class_name, reason: format!("source does not parse: {err}") });
            }
            continue;
        }
        let rel = path.strip_prefix(repo_root).expect("found below repo root");
        pairing.sources.push(PairedSource {
            source_path: rel.to_string_lossy().replace('\\', "/"),
            class_names,
            time_ms,
            zero_time: time_ms < ZERO_TIME_MS,
        });
    }
    pairing.unmatched.sort_by(|a, b| a.class_name.cmp(&b.class_name));
    Ok(pairing)
}
