//! Corpus statistics: node/vocabulary sizes per project and control-flow
//! node occurrences per project.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::java::NodeKind;

use super::graph::FaAstGraph;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ControlFlowCounts {
    pub if_stmt: usize,
    pub while_stmt: usize,
    pub for_stmt: usize,
    pub block: usize,
}

impl ControlFlowCounts {
    pub fn of(g: &FaAstGraph) -> Self {
        ControlFlowCounts {
            if_stmt: g.count_kind(NodeKind::IfStmt),
            while_stmt: g.count_kind(NodeKind::WhileStmt),
            for_stmt: g.count_kind(NodeKind::ForStmt),
            block: g.count_kind(NodeKind::Block),
        }
    }

    pub fn total(&self) -> usize {
        self.if_stmt + self.while_stmt + self.for_stmt + self.block
    }

    fn add(&mut self, o: &Self) {
        self.if_stmt += o.if_stmt;
        self.while_stmt += o.while_stmt;
        self.for_stmt += o.for_stmt;
        self.block += o.block;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ControlFlowStats {
    pub per_project: BTreeMap<String, ControlFlowCounts>,
    pub total: ControlFlowCounts,
}

/// Counts if/while/for/block nodes per project. Input pairs are `(project, graph)`.
pub fn control_flow_stats<'a, I>(graphs: I) -> ControlFlowStats
where
    I: IntoIterator<Item = (&'a str, &'a FaAstGraph)>,
{
    let mut stats = ControlFlowStats::default();
    for (project, g) in graphs {
        let c = ControlFlowCounts::of(g);
        stats.per_project.entry(project.to_string()).or_default().add(&c);
        stats.total.add(&c);
    }
    stats
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ProjectSize {
    pub files: usize,
    pub nodes: usize,
    pub vocabulary: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub per_project: BTreeMap<String, ProjectSize>,
    pub total: ProjectSize,
}

/// File, node and distinct-value counts per project. The total vocabulary is
/// the size of the union, not the sum.
pub fn corpus_stats<'a, I>(graphs: I) -> CorpusStats
where
    I: IntoIterator<Item = (&'a str, &'a FaAstGraph)>,
{
    let mut vocab: BTreeMap<String, BTreeSet<&'a str>> = BTreeMap::new();
    let mut all: BTreeSet<&'a str> = BTreeSet::new();
    let mut stats = CorpusStats::default();
    for (project, g) in graphs {
        let entry = stats.per_project.entry(project.to_string()).or_default();
        entry.files += 1;
        entry.nodes += g.num_nodes;
        stats.total.files += 1;
        stats.total.nodes += g.num_nodes;
        let set = vocab.entry(project.to_string()).or_default();
        for v in g.node_values.iter().flatten() {
            set.insert(v);
            all.insert(v);
        }
    }
    for (project, set) in vocab {
        stats.per_project.get_mut(&project).expect("project seen").vocabulary = set.len();
    }
    stats.total.vocabulary = all.len();
    stats
}

impl fmt::Display for ControlFlowStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20} {:>8} {:>8} {:>8} {:>8} {:>8}", "project", "If", "While", "For", "Block", "Total")?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, c: &ControlFlowCounts| {
            writeln!(f, "{:<20} {:>8} {:>8} {:>8} {:>8} {:>8}", name, c.if_stmt, c.while_stmt, c.for_stmt, c.block, c.total())
        };
        for (p, c) in &self.per_project {
            row(f, p, c)?;
        }
        row(f, "Total", &self.total)
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20} {:>8} {:>10} {:>10}", "project", "files", "nodes", "vocab")?;
        for (p, s) in &self.per_project {
            writeln!(f, "{:<20} {:>8} {:>10} {:>10}", p, s.files, s.nodes, s.vocabulary)?;
        }
        writeln!(f, "{:<20} {:>8} {:>10} {:>10}", "Total", self.total.files, self.total.nodes, self.total.vocabulary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faast::build_fa_ast;
    use crate::java::parse_source;

    fn graph(src: &str) -> FaAstGraph {
        build_fa_ast(&parse_source(src, "T.java").unwrap())
    }

    #[test]
    fn empty_corpus_is_zero() {
        let s = control_flow_stats(std::iter::empty());
        assert_eq!(s.total, ControlFlowCounts::default());
        assert!(s.per_project.is_empty());
        assert_eq!(corpus_stats(std::iter::empty()).total, ProjectSize::default());
    }

    #[test]
    fn totals_sum_projects() {
        let a = graph("class A { void t() { if (x) { y(); } } }");
        let b = graph("class B { void t() { while (x) { for (;;) { } } } }");
        let s = control_flow_stats([("p", &a), ("q", &b), ("q", &a)]);
        assert_eq!(s.per_project["p"], ControlFlowCounts { if_stmt: 1, while_stmt: 0, for_stmt: 0, block: 2 });
        assert_eq!(s.per_project["q"], ControlFlowCounts { if_stmt: 1, while_stmt: 1, for_stmt: 1, block: 5 });
        assert_eq!(s.total.total(), 3 + 8);
        assert!(s.to_string().lines().last().unwrap().starts_with("Total"));
    }

    #[test]
    fn vocabulary_total_is_a_union() {
        let a = graph("class A { int x; }");
        let b = graph("class B { int x; }");
        let s = corpus_stats([("p", &a), ("q", &b)]);
        assert_eq!(s.per_project["p"].vocabulary, 3);
        assert_eq!(s.total.vocabulary, 4);
        assert_eq!(s.total.files, 2);
        assert_eq!(s.total.nodes, a.num_nodes + b.num_nodes);
    }
}
