use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::faast::{build_fa_ast, FaAstGraph};
use crate::java::parse_file;

use super::{derive_seed, PipelineError};

/// One line of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    /// Relative paths are resolved against the manifest's directory.
    pub source_path: String,
    pub project: String,
    pub execution_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Carries the execution time as its label.
    pub graph: FaAstGraph,
    pub project: String,
    pub execution_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub source_path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub skipped: Vec<Skipped>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>, PipelineError> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ManifestRecord = serde_json::from_str(&line).map_err(|e| PipelineError::Manifest {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if !rec.execution_time_ms.is_finite() {
            return Err(PipelineError::Manifest {
                path: path.to_path_buf(),
                line: i + 1,
                message: "execution time is not finite".into(),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_manifest(path: &Path, records: &[ManifestRecord]) -> Result<(), PipelineError> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).expect("manifest record serializes");
        buf.push(b'\n');
    }
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&buf).map_err(io_err(path))
}

/// Parses every file named in a manifest. Files that fail to parse, and
/// records with non-positive or below-`min_ms` times, are skipped and
/// reported rather than aborting the load. `jobs = 0` uses all cores.
pub fn load_dataset(manifest: &Path, jobs: usize, min_ms: Option<f64>) -> Result<Dataset, PipelineError> {
    let records = read_manifest(manifest)?;
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
    let results: Vec<Result<Sample, Skipped>> = pool.install(|| {
        records
            .par_iter()
            .map(|rec| {
                let skip = |reason: String| Skipped { source_path: rec.source_path.clone(), reason };
                if rec.execution_time_ms <= 0.0 {
                    return Err(skip("non-positive execution time".into()));
                }
                if let Some(min) = min_ms {
                    if rec.execution_time_ms < min {
                        return Err(skip(format!("execution time below {min} ms")));
                    }
                }
                let path: PathBuf = base.join(&rec.source_path);
                let ast = parse_file(&path).map_err(|e| skip(e.to_string()))?;
                let mut graph = build_fa_ast(&ast);
                graph.source_path = rec.source_path.clone();
                graph.label_ms = Some(rec.execution_time_ms);
                Ok(Sample { graph, project: rec.project.clone(), execution_time_ms: rec.execution_time_ms })
            })
            .collect()
    });
    let mut ds = Dataset::default();
    for r in results {
        match r {
            Ok(s) => ds.samples.push(s),
            Err(s) => {
                log::warn!("skipping {}: {}", s.source_path, s.reason);
                ds.skipped.push(s);
            }
        }
    }
    Ok(ds)
}

/// Seeded uniform shuffle of `0..n`, cut into `floor(train_frac * n)` training
/// indices and the rest.
pub fn split_indices(n: usize, train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), PipelineError> {
    if n < 5 {
        return Err(PipelineError::TooSmall(n));
    }
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(PipelineError::InvalidConfig("train_frac must lie strictly between 0 and 1".into()));
    }
    // The epsilon keeps products such as 0.7 * 10 from flooring to 6.
    let n_train = (train_frac * n as f64 + 1e-9).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(PipelineError::TooSmall(n));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, "split")));
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

pub fn split<T: Clone>(items: &[T], train_frac: f64, seed: u64) -> Result<(Vec<T>, Vec<T>), PipelineError> {
    let (a, b) = split_indices(items.len(), train_frac, seed)?;
    Ok((a.iter().map(|&i| items[i].clone()).collect(), b.iter().map(|&i| items[i].clone()).collect()))
}
