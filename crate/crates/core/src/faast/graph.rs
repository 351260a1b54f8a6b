use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::java::NodeKind;

/// Edge kinds of a flow-augmented AST. The discriminant is the serialized tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum EdgeKind {
    AstChild = 0,
    AstParent = 1,
    NextToken = 2,
    NextSibling = 3,
    NextUse = 4,
    IfFlow = 5,
    ElseFlow = 6,
    WhileFlow = 7,
    ForFlow = 8,
    NextStatement = 9,
}

impl EdgeKind {
    pub const COUNT: usize = 10;

    pub const ALL: [EdgeKind; EdgeKind::COUNT] = [
        EdgeKind::AstChild,
        EdgeKind::AstParent,
        EdgeKind::NextToken,
        EdgeKind::NextSibling,
        EdgeKind::NextUse,
        EdgeKind::IfFlow,
        EdgeKind::ElseFlow,
        EdgeKind::WhileFlow,
        EdgeKind::ForFlow,
        EdgeKind::NextStatement,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u32) -> Option<EdgeKind> {
        EdgeKind::ALL.get(tag as usize).copied()
    }

    pub fn is_control_flow(self) -> bool {
        matches!(self, EdgeKind::IfFlow | EdgeKind::ElseFlow | EdgeKind::WhileFlow | EdgeKind::ForFlow | EdgeKind::NextStatement)
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn new(src: usize, dst: usize, kind: EdgeKind) -> Self {
        Edge { src: src as u32, dst: dst as u32, kind }
    }

    fn sort_key(&self) -> (u8, u32, u32) {
        (self.kind.tag(), self.src, self.dst)
    }
}

/// A directed multigraph over AST nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FaAstGraph {
    pub num_nodes: usize,
    pub node_kinds: Vec<NodeKind>,
    pub node_values: Vec<Option<String>>,
    pub edges: Vec<Edge>,
    pub source_path: String,
    pub label_ms: Option<f64>,
}

impl FaAstGraph {
    pub(crate) fn sort_edges(&mut self) {
        self.edges.sort_by_key(Edge::sort_key);
    }

    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn edge_histogram(&self) -> BTreeMap<EdgeKind, usize> {
        let mut hist = BTreeMap::new();
        for e in &self.edges {
            *hist.entry(e.kind).or_insert(0) += 1;
        }
        hist
    }

    pub fn count_kind(&self, kind: NodeKind) -> usize {
        self.node_kinds.iter().filter(|&&k| k == kind).count()
    }

    pub fn has_edge(&self, src: usize, dst: usize, kind: EdgeKind) -> bool {
        self.edges.iter().any(|e| e.src as usize == src && e.dst as usize == dst && e.kind == kind)
    }

    /// Parent of every node according to the `AstChild` edges.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.num_nodes];
        for e in self.edges_of(EdgeKind::AstChild) {
            parent[e.dst as usize] = Some(e.src as usize);
        }
        parent
    }

    /// Ordered children of every node according to the `AstChild` edges.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.num_nodes];
        for e in self.edges_of(EdgeKind::AstChild) {
            children[e.src as usize].push(e.dst as usize);
        }
        for c in &mut children {
            c.sort_unstable();
        }
        children
    }
}
