//! Generated Java test classes whose labels follow a known linear rule in
//! loop, statement and call counts.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::{write_manifest, ManifestRecord};
use super::{derive_seed, PipelineError};

pub const SYNTH_LOOP_MS: f64 = 50.0;
pub const SYNTH_STATEMENT_MS: f64 = 5.0;
pub const SYNTH_CALL_MS: f64 = 10.0;
pub const SYNTH_NOISE_SD_MS: f64 = 2.0;
pub const SYNTH_PROJECTS: [&str; 2] = ["alpha", "beta"];
pub const SYNTH_MIN_FILES: usize = 20;

/// Construct counts behind a label. `statements` counts statement nodes
/// other than blocks (a for-loop header declaration included); `calls`
/// counts method calls; `loops` counts for and while loops.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthCounts {
    pub loops: usize,
    pub statements: usize,
    pub calls: usize,
}

impl SynthCounts {
    pub fn label_ms(&self) -> f64 {
        SYNTH_LOOP_MS * self.loops as f64 + SYNTH_STATEMENT_MS * self.statements as f64 + SYNTH_CALL_MS * self.calls as f64
    }

    fn add(&mut self, loops: usize, statements: usize, calls: usize) {
        self.loops += loops;
        self.statements += statements;
        self.calls += calls;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthFile {
    pub source_path: String,
    pub project: String,
    pub counts: SynthCounts,
    pub noise_ms: f64,
    pub execution_time_ms: f64,
    #[serde(skip)]
    pub source: String,
}

/// Everything needed to re-derive the labels; written as `synth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub seed: u64,
    pub loop_ms: f64,
    pub statement_ms: f64,
    pub call_ms: f64,
    pub noise_sd_ms: f64,
    pub files: Vec<SynthFile>,
}

fn helper(project: &str) -> &'static str {
    if project == SYNTH_PROJECTS[0] {
        "step"
    } else {
        "advance"
    }
}

/// Statements appear in a fixed order: assignments, calls, at most one loop,
/// at most one if. Every construct sits within three hops of the method body.
fn test_class(rng: &mut ChaCha8Rng, project: &str, class: &str) -> (String, SynthCounts) {
    let f = helper(project);
    let mut counts = SynthCounts::default();
    let mut stmts: Vec<String> = Vec::new();
    for _ in 0..rng.random_range(0..=2) {
        stmts.push("acc = acc + 1;".to_string());
        counts.add(0, 1, 0);
    }
    for _ in 0..rng.random_range(0..=2) {
        stmts.push(format!("{f}(acc);"));
        counts.add(0, 1, 1);
    }
    if rng.random_bool(0.5) {
        match rng.random_range(0..3) {
            0 => {
                stmts.push("while (acc < 10) acc = acc + 1;".to_string());
                counts.add(1, 2, 0);
            }
            1 => {
                stmts.push(format!("for (int i = 0; i < 3; i++) {f}(i);"));
                counts.add(1, 3, 1);
            }
            _ => {
                stmts.push("for (int i = 0; i < 3; i++) acc = acc + i;".to_string());
                counts.add(1, 3, 0);
            }
        }
    }
    if rng.random_bool(0.5) {
        stmts.push(format!("if (acc > 5) {f}(acc);"));
        counts.add(0, 2, 1);
    }

    // header declaration, footer assertion call
    counts.add(0, 2, 1);
    let mut src = String::new();
    writeln!(src, "package synth.{project};\n").unwrap();
    writeln!(src, "import static org.junit.Assert.assertTrue;").unwrap();
    writeln!(src, "import org.junit.Test;\n").unwrap();
    writeln!(src, "public class {class} {{").unwrap();
    writeln!(src, "    @Test").unwrap();
    writeln!(src, "    public void scenario() {{").unwrap();
    writeln!(src, "        int acc = 0;").unwrap();
    for s in &stmts {
        writeln!(src, "        {s}").unwrap();
    }
    writeln!(src, "        assertTrue(acc >= 0);").unwrap();
    writeln!(src, "    }}").unwrap();
    writeln!(src, "}}").unwrap();
    (src, counts)
}

/// Generates `n_files` test classes, alternating between the two projects.
pub fn generate_synth(n_files: usize, seed: u64) -> Result<SynthManifest, PipelineError> {
    if n_files < SYNTH_MIN_FILES {
        return Err(PipelineError::InvalidConfig(format!("synth needs at least {SYNTH_MIN_FILES} files, got {n_files}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "synth"));
    let noise = Normal::new(0.0, SYNTH_NOISE_SD_MS).expect("valid sd");
    let files = (0..n_files)
        .map(|i| {
            let project = SYNTH_PROJECTS[i % SYNTH_PROJECTS.len()];
            let class = format!("Scenario{i:04}Test");
            let (source, counts) = test_class(&mut rng, project, &class);
            let noise_ms = noise.sample(&mut rng);
            SynthFile {
                source_path: format!("{project}/src/test/java/synth/{project}/{class}.java"),
                project: project.to_string(),
                counts,
                noise_ms,
                execution_time_ms: counts.label_ms() + noise_ms,
                source,
            }
        })
        .collect();
    Ok(SynthManifest {
        seed,
        loop_ms: SYNTH_LOOP_MS,
        statement_ms: SYNTH_STATEMENT_MS,
        call_ms: SYNTH_CALL_MS,
        noise_sd_ms: SYNTH_NOISE_SD_MS,
        files,
    })
}

/// Writes sources, `manifest.jsonl` and `synth.json` under `dir`.
pub fn write_synth_corpus(dir: &Path, n_files: usize, seed: u64) -> Result<SynthManifest, PipelineError> {
    let synth = generate_synth(n_files, seed)?;
    for f in &synth.files {
        let path = dir.join(&f.source_path);
        let io = |source| PipelineError::Io { path: path.clone(), source };
        std::fs::create_dir_all(path.parent().expect("nested path")).map_err(io)?;
        std::fs::write(&path, &f.source).map_err(io)?;
    }
    let records: Vec<ManifestRecord> = synth
        .files
        .iter()
        .map(|f| ManifestRecord {
            source_path: f.source_path.clone(),
            project: f.project.clone(),
            execution_time_ms: f.execution_time_ms,
        })
        .collect();
    write_manifest(&dir.join("manifest.jsonl"), &records)?;
    let path = dir.join("synth.json");
    let json = serde_json::to_string_pretty(&synth).expect("synth manifest serializes");
    std::fs::write(&path, json).map_err(|source| PipelineError::Io { path, source })?;
    Ok(synth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::java::{parse_source, NodeKind};

    #[test]
    fn files_parse_and_counts_match_the_tree() {
        let synth = generate_synth(60, 3).unwrap();
        for f in &synth.files {
            let ast = parse_source(&f.source, &f.source_path).unwrap();
            let loops = ast.count_kind(NodeKind::ForStmt) + ast.count_kind(NodeKind::WhileStmt);
            let statements = ast.nodes.iter().filter(|n| n.kind.is_statement() && n.kind != NodeKind::Block).count();
            let calls = ast.count_kind(NodeKind::MethodCall);
            assert_eq!(SynthCounts { loops, statements, calls }, f.counts, "{}", f.source_path);
            assert!((f.execution_time_ms - f.counts.label_ms() - f.noise_ms).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_tiny_corpora() {
        assert!(generate_synth(19, 0).is_err());
    }

    #[test]
    fn seeded() {
        assert_eq!(generate_synth(20, 5).unwrap(), generate_synth(20, 5).unwrap());
        assert_ne!(generate_synth(20, 5).unwrap(), generate_synth(20, 6).unwrap());
    }
}
