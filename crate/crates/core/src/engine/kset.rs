//! Brute-force k-set neighborhoods of small undirected graphs, used to check
//! that the k = 1 case is plain node adjacency.

use super::EngineError;

pub const MAX_KSET_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSetNeighborhoods {
    pub k: usize,
    /// All k-element node sets in lexicographic order, each sorted.
    pub sets: Vec<Vec<usize>>,
    /// For each set, indices of the sets sharing exactly k - 1 nodes.
    pub global: Vec<Vec<usize>>,
    /// The subset of `global` where the two differing nodes are adjacent.
    pub local: Vec<Vec<usize>>,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Edges are read as undirected. `k` must be 1, 2 or 3 and `n` at most 12.
pub fn kset_neighborhoods(n: usize, edges: &[(usize, usize)], k: usize) -> Result<KSetNeighborhoods, EngineError> {
    if n > MAX_KSET_NODES {
        return Err(EngineError::TooLarge(format!("{n} nodes (limit {MAX_KSET_NODES})")));
    }
    if !(1..=3).contains(&k) {
        return Err(EngineError::TooLarge(format!("k = {k} (supported: 1, 2, 3)")));
    }
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(EngineError::ShapeMismatch(format!("edge {u}-{v} with {n} nodes")));
        }
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let sets = combinations(n, k);
    let mut global = vec![Vec::new(); sets.len()];
    let mut local = vec![Vec::new(); sets.len()];
    for (i, s) in sets.iter().enumerate() {
        for (j, t) in sets.iter().enumerate() {
            let shared = s.iter().filter(|v| t.contains(v)).count();
            if shared != k - 1 {
                continue;
            }
            global[i].push(j);
            let u = *s.iter().find(|v| !t.contains(v)).expect("one node only in s");
            let w = *t.iter().find(|v| !s.contains(v)).expect("one node only in t");
            if adj[u][w] {
                local[i].push(j);
            }
        }
    }
    Ok(KSetNeighborhoods { k, sets, global, local })
}
