//! On-disk graph formats: JSON (one object per file) and a packed
//! little-endian binary variant. Both start with a format version.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::java::NodeKind;

use super::graph::{Edge, EdgeKind, FaAstGraph};

pub const GRAPH_FORMAT_VERSION: u32 = 1;
pub const BINARY_MAGIC: &[u8; 4] = b"FAAG";

#[derive(Debug, Error)]
pub enum GraphIoError {
    #[error("graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported graph format version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed graph file: {0}")]
    Malformed(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    format_version: u32,
    num_nodes: usize,
    kinds: Vec<NodeKind>,
    values: Vec<Option<String>>,
    edges: Vec<[u32; 3]>,
    source_path: String,
    label_ms: Option<f64>,
}

pub fn to_json(g: &FaAstGraph) -> String {
    let doc = GraphJson {
        format_version: GRAPH_FORMAT_VERSION,
        num_nodes: g.num_nodes,
        kinds: g.node_kinds.clone(),
        values: g.node_values.clone(),
        edges: g.edges.iter().map(|e| [e.src, e.dst, e.kind.tag() as u32]).collect(),
        source_path: g.source_path.clone(),
        label_ms: g.label_ms,
    };
    serde_json::to_string(&doc).expect("graph serialization cannot fail")
}

pub fn from_json(text: &str) -> Result<FaAstGraph, GraphIoError> {
    let doc: GraphJson = serde_json::from_str(text)?;
    if doc.format_version != GRAPH_FORMAT_VERSION {
        return Err(GraphIoError::UnsupportedVersion(doc.format_version));
    }
    if doc.kinds.len() != doc.num_nodes || doc.values.len() != doc.num_nodes {
        return Err(GraphIoError::Malformed("node array lengths differ from num_nodes".into()));
    }
    let edges = doc
        .edges
        .iter()
        .map(|&[s, d, k]| {
            let kind = EdgeKind::from_tag(k).ok_or_else(|| GraphIoError::Malformed(format!("edge kind tag {k}")))?;
            check_endpoint(s, doc.num_nodes)?;
            check_endpoint(d, doc.num_nodes)?;
            Ok(Edge { src: s, dst: d, kind })
        })
        .collect::<Result<_, GraphIoError>>()?;
    Ok(FaAstGraph {
        num_nodes: doc.num_nodes,
        node_kinds: doc.kinds,
        node_values: doc.values,
        edges,
        source_path: doc.source_path,
        label_ms: doc.label_ms,
    })
}

fn check_endpoint(v: u32, n: usize) -> Result<(), GraphIoError> {
    if (v as usize) < n {
        Ok(())
    } else {
        Err(GraphIoError::Malformed(format!("edge endpoint {v} >= {n}")))
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

/// Packed layout:
///
/// ```text
/// "FAAG" u8:version
/// str:source_path  u8:has_label f64:label_ms
/// u32:n_kinds  str*        -- kind name table
/// u32:n_values str*        -- value string table
/// u32:num_nodes  u16*num_nodes (kind index)  u32*num_nodes (value index + 1, 0 = none)
/// u32:num_edges  (u32 src, u32 dst, u32 kind)*num_edges
/// ```
/// where `str` is a u32 byte length followed by UTF-8 bytes.
pub fn to_binary(g: &FaAstGraph) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(BINARY_MAGIC);
    out.push(GRAPH_FORMAT_VERSION as u8);
    put_str(&mut out, &g.source_path);
    out.push(u8::from(g.label_ms.is_some()));
    out.extend_from_slice(&g.label_ms.unwrap_or(0.0).to_le_bytes());

    let kinds: BTreeMap<NodeKind, u16> = {
        let mut set: Vec<NodeKind> = g.node_kinds.clone();
        set.sort();
        set.dedup();
        set.into_iter().enumerate().map(|(i, k)| (k, i as u16)).collect()
    };
    put_u32(&mut out, kinds.len() as u32);
    for k in kinds.keys() {
        put_str(&mut out, k.name());
    }

    let values: BTreeMap<&str, u32> = {
        let mut set: Vec<&str> = g.node_values.iter().flatten().map(String::as_str).collect();
        set.sort_unstable();
        set.dedup();
        set.into_iter().enumerate().map(|(i, v)| (v, i as u32)).collect()
    };
    put_u32(&mut out, values.len() as u32);
    for v in values.keys() {
        put_str(&mut out, v);
    }

    put_u32(&mut out, g.num_nodes as u32);
    for k in &g.node_kinds {
        out.extend_from_slice(&kinds[k].to_le_bytes());
    }
    for v in &g.node_values {
        put_u32(&mut out, v.as_deref().map_or(0, |s| values[s] + 1));
    }

    put_u32(&mut out, g.edges.len() as u32);
    for e in &g.edges {
        put_u32(&mut out, e.src);
        put_u32(&mut out, e.dst);
        put_u32(&mut out, e.kind.tag() as u32);
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], GraphIoError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(GraphIoError::Malformed(format!("truncated at byte {}", self.pos))),
        }
    }

    fn u8(&mut self) -> Result<u8, GraphIoError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, GraphIoError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, GraphIoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, GraphIoError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String, GraphIoError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| GraphIoError::Malformed("string is not UTF-8".into()))
    }

    fn count(&mut self, item_size: usize) -> Result<usize, GraphIoError> {
        let n = self.u32()? as usize;
        // Reject counts that cannot fit in the remaining bytes before allocating.
        if n.saturating_mul(item_size) > self.buf.len() - self.pos {
            return Err(GraphIoError::Malformed(format!("count {n} exceeds file size")));
        }
        Ok(n)
    }
}

pub fn from_binary(buf: &[u8]) -> Result<FaAstGraph, GraphIoError> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != BINARY_MAGIC {
        return Err(GraphIoError::Malformed("bad magic".into()));
    }
    let version = r.u8()? as u32;
    if version != GRAPH_FORMAT_VERSION {
        return Err(GraphIoError::UnsupportedVersion(version));
    }
    let source_path = r.string()?;
    let has_label = r.u8()? != 0;
    let label = r.f64()?;

    let n_kinds = r.count(4)?;
    let mut kind_table = Vec::with_capacity(n_kinds);
    for _ in 0..n_kinds {
        let name = r.string()?;
        kind_table.push(NodeKind::from_name(&name).ok_or_else(|| GraphIoError::Malformed(format!("unknown node kind {name}")))?);
    }
    let n_values = r.count(4)?;
    let mut value_table = Vec::with_capacity(n_values);
    for _ in 0..n_values {
        value_table.push(r.string()?);
    }

    let num_nodes = r.count(6)?;
    let mut node_kinds = Vec::with_capacity(num_nodes);
    for _ in 0..num_nodes {
        let idx = r.u16()? as usize;
        node_kinds.push(*kind_table.get(idx).ok_or_else(|| GraphIoError::Malformed(format!("kind index {idx}")))?);
    }
    let mut node_values = Vec::with_capacity(num_nodes);
    for _ in 0..num_nodes {
        let idx = r.u32()? as usize;
        node_values.push(match idx {
            0 => None,
            i => Some(value_table.get(i - 1).cloned().ok_or_else(|| GraphIoError::Malformed(format!("value index {i}")))?),
        });
    }

    let num_edges = r.count(12)?;
    let mut edges = Vec::with_capacity(num_edges);
    for _ in 0..num_edges {
        let (s, d, k) = (r.u32()?, r.u32()?, r.u32()?);
        check_endpoint(s, num_nodes)?;
        check_endpoint(d, num_nodes)?;
        let kind = EdgeKind::from_tag(k).ok_or_else(|| GraphIoError::Malformed(format!("edge kind tag {k}")))?;
        edges.push(Edge { src: s, dst: d, kind });
    }
    if r.pos != buf.len() {
        return Err(GraphIoError::Malformed("trailing bytes".into()));
    }

    Ok(FaAstGraph {
        num_nodes,
        node_kinds,
        node_values,
        edges,
        source_path,
        label_ms: has_label.then_some(label),
    })
}

/// Reads a graph file, choosing the format from its leading bytes.
pub fn read_graph(path: &Path) -> Result<FaAstGraph, GraphIoError> {
    let bytes = std::fs::read(path).map_err(|source| GraphIoError::Io { path: path.display().to_string(), source })?;
    if bytes.starts_with(BINARY_MAGIC) {
        from_binary(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| GraphIoError::Malformed("not UTF-8 JSON".into()))?;
        from_json(text)
    }
}
