//! Structural checks on a built graph, using only the graph itself.

use std::collections::{BTreeSet, HashMap};

use crate::java::NodeKind;

use super::graph::{EdgeKind, FaAstGraph};

/// Returns every invariant violation found; empty means the graph is well formed.
pub fn check_invariants(g: &FaAstGraph) -> Vec<String> {
    let mut errs = Vec::new();
    let n = g.num_nodes;
    if g.node_kinds.len() != n || g.node_values.len() != n {
        errs.push(format!("node arrays have lengths {}/{} for {n} nodes", g.node_kinds.len(), g.node_values.len()));
        return errs;
    }
    if n == 0 {
        if !g.edges.is_empty() {
            errs.push("edges in an empty graph".into());
        }
        return errs;
    }
    for e in &g.edges {
        if e.src as usize >= n || e.dst as usize >= n {
            errs.push(format!("edge {e:?} out of range"));
            return errs;
        }
    }

    // Tree: every non-root node has exactly one AstChild in-edge, node 0 has none.
    let mut in_deg = vec![0usize; n];
    for e in g.edges_of(EdgeKind::AstChild) {
        in_deg[e.dst as usize] += 1;
    }
    if in_deg[0] != 0 {
        errs.push("root has a parent".into());
    }
    for (v, &d) in in_deg.iter().enumerate().skip(1) {
        if d != 1 {
            errs.push(format!("node {v} has {d} parents"));
        }
    }
    let children = g.children();
    let parents = g.parents();
    let child_count = g.edges_of(EdgeKind::AstChild).count();
    if child_count != n - 1 {
        errs.push(format!("{child_count} AstChild edges for {n} nodes"));
    }
    // Ids must be a pre-order numbering, which also proves connectivity.
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        if order.len() > n {
            break;
        }
        order.push(v);
        stack.extend(children[v].iter().rev());
    }
    if order != (0..n).collect::<Vec<_>>() {
        errs.push("node ids are not a pre-order traversal of the tree".into());
    }

    // AstParent mirrors AstChild.
    let child_set: BTreeSet<(u32, u32)> = g.edges_of(EdgeKind::AstChild).map(|e| (e.src, e.dst)).collect();
    let parent_set: BTreeSet<(u32, u32)> = g.edges_of(EdgeKind::AstParent).map(|e| (e.dst, e.src)).collect();
    if child_set != parent_set || g.edges_of(EdgeKind::AstParent).count() != child_count {
        errs.push("AstParent edges do not mirror AstChild edges".into());
    }

    // NextToken: a path over the terminals in order.
    let terminals: Vec<usize> = (0..n).filter(|&v| children[v].is_empty()).collect();
    let expected: BTreeSet<(u32, u32)> = terminals.windows(2).map(|w| (w[0] as u32, w[1] as u32)).collect();
    let got: Vec<(u32, u32)> = g.edges_of(EdgeKind::NextToken).map(|e| (e.src, e.dst)).collect();
    if got.len() != terminals.len().saturating_sub(1) || got.iter().copied().collect::<BTreeSet<_>>() != expected {
        errs.push(format!("NextToken edges ({}) are not the terminal path ({} terminals)", got.len(), terminals.len()));
    }

    // NextSibling: consecutive children only, c - 1 per parent.
    let expected: BTreeSet<(u32, u32)> = children
        .iter()
        .flat_map(|c| c.windows(2).map(|w| (w[0] as u32, w[1] as u32)))
        .collect();
    let got: Vec<(u32, u32)> = g.edges_of(EdgeKind::NextSibling).map(|e| (e.src, e.dst)).collect();
    if got.len() != expected.len() || got.iter().copied().collect::<BTreeSet<_>>() != expected {
        errs.push("NextSibling edges do not link consecutive children".into());
    }

    // NextStatement: consecutive children of blocks only.
    let expected: BTreeSet<(u32, u32)> = (0..n)
        .filter(|&v| g.node_kinds[v] == NodeKind::Block)
        .flat_map(|v| children[v].windows(2).map(|w| (w[0] as u32, w[1] as u32)).collect::<Vec<_>>())
        .collect();
    let got: Vec<(u32, u32)> = g.edges_of(EdgeKind::NextStatement).map(|e| (e.src, e.dst)).collect();
    if got.len() != expected.len() || got.iter().copied().collect::<BTreeSet<_>>() != expected {
        errs.push("NextStatement edges do not link consecutive block statements".into());
    }

    // Per-construct flow edges. The owner of a flow edge is the statement the
    // source belongs to: the head node's parent, or the for statement itself
    // for `for(;;)`.
    let owner = |src: usize, kind: EdgeKind| -> Option<usize> {
        if kind == EdgeKind::ForFlow && g.node_kinds[src] == NodeKind::ForStmt {
            Some(src)
        } else {
            parents[src]
        }
    };
    let mut per_owner: HashMap<(usize, EdgeKind), Vec<(usize, usize)>> = HashMap::new();
    for e in &g.edges {
        if matches!(e.kind, EdgeKind::IfFlow | EdgeKind::ElseFlow | EdgeKind::WhileFlow | EdgeKind::ForFlow) {
            let (s, d) = (e.src as usize, e.dst as usize);
            match owner(s, e.kind) {
                Some(o) => {
                    if parents[d] != Some(o) {
                        errs.push(format!("{} edge {s}->{d} does not end inside its statement", e.kind));
                    }
                    per_owner.entry((o, e.kind)).or_default().push((s, d));
                }
                None => errs.push(format!("{} edge from the root", e.kind)),
            }
        }
    }
    let expected_owner = |kind: EdgeKind| match kind {
        EdgeKind::IfFlow | EdgeKind::ElseFlow => NodeKind::IfStmt,
        EdgeKind::WhileFlow => NodeKind::WhileStmt,
        _ => NodeKind::ForStmt,
    };
    for (&(o, kind), list) in &per_owner {
        if g.node_kinds[o] != expected_owner(kind) {
            errs.push(format!("{kind} edge owned by a {}", g.node_kinds[o]));
        }
        if list.len() > 1 {
            errs.push(format!("{} has {} {kind} edges", o, list.len()));
        }
    }
    let next_use: BTreeSet<(u32, u32)> = g.edges_of(EdgeKind::NextUse).map(|e| (e.src, e.dst)).collect();
    for v in 0..n {
        let count = |k| per_owner.get(&(v, k)).map_or(0, Vec::len);
        match g.node_kinds[v] {
            NodeKind::IfStmt => {
                if count(EdgeKind::IfFlow) != 1 {
                    errs.push(format!("if statement {v} has {} IfFlow edges", count(EdgeKind::IfFlow)));
                }
            }
            NodeKind::WhileStmt | NodeKind::ForStmt => {
                let kind = if g.node_kinds[v] == NodeKind::WhileStmt { EdgeKind::WhileFlow } else { EdgeKind::ForFlow };
                match per_owner.get(&(v, kind)).map(Vec::as_slice) {
                    Some([(s, d)]) => {
                        if !next_use.contains(&(*d as u32, *s as u32)) {
                            errs.push(format!("loop {v} lacks the NextUse back-edge"));
                        }
                    }
                    _ => errs.push(format!("loop {v} has {} {kind} edges", count(kind))),
                }
            }
            _ => {}
        }
    }

    errs
}
