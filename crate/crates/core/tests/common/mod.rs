#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub mod nets;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// All committed Java fixtures, sorted by file name.
pub fn java_fixtures() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture_dir().join("java"))
        .expect("fixture dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "java"))
        .collect();
    files.sort();
    files
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join("java").join(name)).expect("fixture")
}

pub struct SheetRow {
    pub class_name: String,
    /// Empty for classes without a source file.
    pub source_path: String,
    pub runs: Vec<Option<f64>>,
    pub mean_s: f64,
}

/// The hand-computed sheet: one row per class, one column per run.
pub fn surefire_sheet() -> Vec<SheetRow> {
    let text = std::fs::read_to_string(fixture_dir().join("surefire/h2/expected.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 7, "{line}");
            SheetRow {
                class_name: cells[0].to_string(),
                source_path: cells[1].to_string(),
                runs: cells[2..6].iter().map(|c| (!c.is_empty()).then(|| c.parse().unwrap())).collect(),
                mean_s: cells[6].parse().unwrap(),
            }
        })
        .collect()
}
