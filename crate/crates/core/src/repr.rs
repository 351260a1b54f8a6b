//! Numeric model inputs: node-kind and token vocabularies, label
//! normalization and graph encoding.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::faast::FaAstGraph;
use crate::java::NodeKind;

pub const UNK: u32 = 0;
pub const UNK_TOKEN: &str = "<unk>";
pub const DEFAULT_VALUE_CAP: usize = 20_000;
/// Smallest label range used as a divisor.
pub const MIN_RANGE_MS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReprError {
    #[error("cannot build from an empty corpus")]
    EmptyCorpus,
    #[error("{0}: training encoding needs an execution time")]
    MissingLabel(String),
    #[error("{path}: label {label_ms} ms lies outside the normalization range")]
    LabelOutOfRange { path: String, label_ms: f64 },
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    kinds: Vec<NodeKind>,
    values: Vec<String>,
}

/// Index of node kinds and token values. Value id 0 is the unknown token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyFile", into = "VocabularyFile")]
pub struct Vocabulary {
    kinds: Vec<NodeKind>,
    values: Vec<String>,
    kind_index: HashMap<NodeKind, u32>,
    value_index: HashMap<String, u32>,
}

impl TryFrom<VocabularyFile> for Vocabulary {
    type Error = ReprError;

    fn try_from(f: VocabularyFile) -> Result<Self, ReprError> {
        if f.values.first().map(String::as_str) != Some(UNK_TOKEN) {
            return Err(ReprError::InvalidVocabulary(format!("value 0 must be {UNK_TOKEN}")));
        }
        let v = Vocabulary::from_parts(f.kinds, f.values);
        if v.kind_index.len() != v.kinds.len() || v.value_index.len() != v.values.len() {
            return Err(ReprError::InvalidVocabulary("duplicate entries".into()));
        }
        Ok(v)
    }
}

impl From<Vocabulary> for VocabularyFile {
    fn from(v: Vocabulary) -> Self {
        VocabularyFile { kinds: v.kinds, values: v.values }
    }
}

impl Vocabulary {
    fn from_parts(kinds: Vec<NodeKind>, values: Vec<String>) -> Self {
        let kind_index = kinds.iter().enumerate().map(|(i, &k)| (k, i as u32)).collect();
        let value_index = values.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect();
        Vocabulary { kinds, values, kind_index, value_index }
    }

    /// Builds the vocabulary from training graphs. Every node kind is indexed,
    /// seen or not; values keep the `cap` most frequent tokens (ties broken
    /// lexicographically), stored in sorted order after the unknown token.
    pub fn build<'a, I>(graphs: I, cap: usize) -> Result<Self, ReprError>
    where
        I: IntoIterator<Item = &'a FaAstGraph>,
    {
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        let mut any = false;
        for g in graphs {
            any = true;
            for v in g.node_values.iter().flatten() {
                if v != UNK_TOKEN {
                    *freq.entry(v).or_insert(0) += 1;
                }
            }
        }
        if !any {
            return Err(ReprError::EmptyCorpus);
        }
        let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
        if ranked.len() > cap {
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            ranked.truncate(cap);
            ranked.sort_by(|a, b| a.0.cmp(b.0));
        }
        let mut kinds = NodeKind::ALL.to_vec();
        kinds.sort_by_key(|k| k.name());
        let values = std::iter::once(UNK_TOKEN.to_string()).chain(ranked.into_iter().map(|(v, _)| v.to_string())).collect();
        Ok(Vocabulary::from_parts(kinds, values))
    }

    pub fn num_kinds(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    pub fn kind_id(&self, kind: NodeKind) -> Option<u32> {
        self.kind_index.get(&kind).copied()
    }

    /// Id of a token value; absent or unseen values map to [`UNK`].
    pub fn value_id(&self, value: Option<&str>) -> u32 {
        value.and_then(|v| self.value_index.get(v).copied()).unwrap_or(UNK)
    }

    pub fn contains_value(&self, value: &str) -> bool {
        self.value_index.contains_key(value) && value != UNK_TOKEN
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }
}

/// Min-max scaling of execution times into [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min_ms: f64,
    pub max_ms: f64,
}

impl Normalizer {
    pub fn fit<I: IntoIterator<Item = f64>>(labels: I) -> Result<Self, ReprError> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in labels {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if lo > hi {
            return Err(ReprError::EmptyCorpus);
        }
        if hi - lo < MIN_RANGE_MS {
            log::warn!("all training labels are {lo} ms; normalized targets collapse to 0");
        }
        Ok(Normalizer { min_ms: lo, max_ms: hi })
    }

    fn range(&self) -> f64 {
        (self.max_ms - self.min_ms).max(MIN_RANGE_MS)
    }

    pub fn normalize(&self, ms: f64) -> f64 {
        (ms - self.min_ms) / self.range()
    }

    pub fn denormalize(&self, t: f64) -> f64 {
        self.min_ms + t * self.range()
    }
}

/// A graph as integer arrays, ready for batching.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedGraph {
    pub node_kind_ids: Vec<u32>,
    pub node_value_ids: Vec<u32>,
    pub edge_index: Vec<(u32, u32)>,
    pub edge_kind_ids: Vec<u8>,
    pub target: Option<f64>,
}

impl EncodedGraph {
    pub fn num_nodes(&self) -> usize {
        self.node_kind_ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_index.len()
    }
}

/// Encodes a graph. With a normalizer the graph must carry a label, which
/// becomes the target; without one the target is left empty.
pub fn encode(g: &FaAstGraph, vocab: &Vocabulary, norm: Option<&Normalizer>) -> Result<EncodedGraph, ReprError> {
    let target = match norm {
        None => None,
        Some(norm) => {
            let label = g.label_ms.ok_or_else(|| ReprError::MissingLabel(g.source_path.clone()))?;
            let t = norm.normalize(label);
            if !(0.0..=1.0).contains(&t) {
                return Err(ReprError::LabelOutOfRange { path: g.source_path.clone(), label_ms: label });
            }
            Some(t)
        }
    };
    Ok(EncodedGraph {
        node_kind_ids: g
            .node_kinds
            .iter()
            .map(|&k| vocab.kind_id(k).ok_or_else(|| ReprError::InvalidVocabulary(format!("node kind {k} is not indexed"))))
            .collect::<Result<_, _>>()?,
        node_value_ids: g.node_values.iter().map(|v| vocab.value_id(v.as_deref())).collect(),
        edge_index: g.edges.iter().map(|e| (e.src, e.dst)).collect(),
        edge_kind_ids: g.edges.iter().map(|e| e.kind.tag()).collect(),
        target,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::faast::build_fa_ast;
    use crate::java::parse_source;

    fn graph(src: &str, label: Option<f64>) -> FaAstGraph {
        let mut g = build_fa_ast(&parse_source(src, "T.java").unwrap());
        g.label_ms = label;
        g
    }

    #[test]
    fn two_values_give_three_entries() {
        let mut g = graph("class A {}", None);
        g.node_values = vec![None, Some("a".into()), Some("b".into())];
        g.node_kinds = vec![NodeKind::CompilationUnit, NodeKind::Name, NodeKind::Name];
        g.num_nodes = 3;
        let v = Vocabulary::build([&g], DEFAULT_VALUE_CAP).unwrap();
        assert_eq!(v.values(), ["<unk>", "a", "b"]);
        assert_eq!(v.num_kinds(), NodeKind::ALL.len());
    }

    #[test]
    fn empty_corpus() {
        assert_eq!(Vocabulary::build(std::iter::empty(), 10), Err(ReprError::EmptyCorpus));
        assert_eq!(Normalizer::fit(std::iter::empty()), Err(ReprError::EmptyCorpus));
    }

    #[test]
    fn cap_keeps_most_frequent() {
        let g = graph("class A { void t() { x(); x(); x(); y(); y(); z(); } }", None);
        let v = Vocabulary::build([&g], 3).unwrap();
        assert_eq!(v.values(), ["<unk>", "A", "x", "y"]);
        assert_eq!(v.value_id(Some("z")), UNK);
        assert_eq!(v.value_id(None), UNK);
    }

    #[test]
    fn targets_are_min_max_scaled() {
        let n = Normalizer::fit([100.0, 300.0, 500.0]).unwrap();
        let ts: Vec<f64> = [100.0, 300.0, 500.0].iter().map(|&x| n.normalize(x)).collect();
        assert_eq!(ts, [0.0, 0.5, 1.0]);
    }

    #[test]
    fn degenerate_range_gives_zero_targets() {
        let n = Normalizer::fit([42.0, 42.0]).unwrap();
        assert_eq!(n.normalize(42.0), 0.0);
        assert_eq!(n.denormalize(0.0), 42.0);
    }

    #[test]
    fn encode_modes() {
        let labelled = graph("class A { int x; }", Some(300.0));
        let v = Vocabulary::build([&labelled], 100).unwrap();
        let norm = Normalizer::fit([100.0, 300.0]).unwrap();
        let e = encode(&labelled, &v, Some(&norm)).unwrap();
        assert_eq!(e.target, Some(1.0));
        assert_eq!(e.node_value_ids[0], UNK);
        assert_eq!(e.num_edges(), labelled.edges.len());
        assert_eq!(encode(&labelled, &v, None).unwrap().target, None);
        let unlabelled = graph("class A { int x; }", None);
        assert!(matches!(encode(&unlabelled, &v, Some(&norm)), Err(ReprError::MissingLabel(_))));
        let outside = graph("class A { int x; }", Some(900.0));
        assert!(matches!(encode(&outside, &v, Some(&norm)), Err(ReprError::LabelOutOfRange { .. })));
    }

    #[test]
    fn vocabulary_json_round_trip() {
        let v = Vocabulary::build([&graph("class A { int x = 1; }", None)], 100).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<Vocabulary>(r#"{"kinds":[],"values":["a"]}"#).is_err());
    }

    proptest! {
        #[test]
        fn normalization_round_trip(lo in 0.0f64..1e4, span in 1e-3f64..1e5, frac in 0.0f64..=1.0) {
            let n = Normalizer::fit([lo, lo + span]).unwrap();
            let x = lo + frac * span;
            let back = n.denormalize(n.normalize(x));
            prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1.0));
        }

        #[test]
        fn out_of_vocabulary_tokens_are_indistinguishable(a in "[a-z]{3,8}", b in "[a-z]{3,8}") {
            let train = graph("class A { void t() { known(); } }", None);
            let v = Vocabulary::build([&train], 100).unwrap();
            let ga = graph(&format!("class A {{ void t() {{ q{a}(); }} }}"), None);
            let gb = graph(&format!("class A {{ void t() {{ q{b}(); }} }}"), None);
            prop_assert_eq!(encode(&ga, &v, None).unwrap(), encode(&gb, &v, None).unwrap());
        }

        #[test]
        fn in_vocabulary_tokens_are_distinguished(a in "[a-z]{3,8}", b in "[a-z]{3,8}") {
            prop_assume!(a != b);
            let ga = graph(&format!("class A {{ void t() {{ q{a}(); }} }}"), None);
            let gb = graph(&format!("class A {{ void t() {{ q{b}(); }} }}"), None);
            let v = Vocabulary::build([&ga, &gb], 100).unwrap();
            prop_assert_ne!(encode(&ga, &v, None).unwrap(), encode(&gb, &v, None).unwrap());
        }
    }
}
