//! Brute-force reference implementations shared by the property and
//! acceptance suites. Everything here enumerates paths or subsets directly
//! and shares no code with the library's counting routines.

#![allow(dead_code)]

use std::collections::BTreeSet;

use flowfilter::{CGraph, GraphBuilder, NodeId};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of directed paths `from → to` whose interior nodes all satisfy
/// `interior_ok`. The empty path counts when `from == to`.
pub fn count_paths(
    g: &CGraph,
    from: NodeId,
    to: NodeId,
    interior_ok: &dyn Fn(NodeId) -> bool,
) -> u64 {
    fn walk(
        g: &CGraph,
        u: NodeId,
        to: NodeId,
        ok: &dyn Fn(NodeId) -> bool,
        on_path: &mut Vec<bool>,
    ) -> u64 {
        if u == to {
            return 1;
        }
        let mut total = 0;
        for &w in g.out_neighbors(u) {
            if on_path[w.index()] || (w != to && !ok(w)) {
                continue;
            }
            on_path[w.index()] = true;
            total += walk(g, w, to, ok, on_path);
            on_path[w.index()] = false;
        }
        total
    }
    let mut on_path = vec![false; g.node_count()];
    on_path[from.index()] = true;
    walk(g, from, to, interior_ok, &mut on_path)
}

/// Copies received by `v` with `filters` in place: one per path that starts
/// at a source, or at a filter holding at least one copy, and otherwise
/// passes only through plain relays.
pub fn received(g: &CGraph, filters: &BTreeSet<NodeId>, v: NodeId) -> u64 {
    let relay = |w: NodeId| !filters.contains(&w) && !g.is_source(w);
    let fed = |f: NodeId| {
        g.sources()
            .iter()
            .any(|&s| count_paths(g, s, f, &|_| true) > 0)
    };
    g.nodes()
        .filter(|&e| e != v && (g.is_source(e) || (filters.contains(&e) && fed(e))))
        .map(|e| count_paths(g, e, v, &relay))
        .sum()
}

/// Φ: receipts summed over non-source nodes.
pub fn phi(g: &CGraph, filters: &BTreeSet<NodeId>) -> u64 {
    g.nodes()
        .filter(|&v| !g.is_source(v))
        .map(|v| received(g, filters, v))
        .sum()
}

pub fn objective(g: &CGraph, filters: &BTreeSet<NodeId>) -> u64 {
    phi(g, &BTreeSet::new()) - phi(g, filters)
}

/// Best F over all subsets of at most `k` non-source nodes.
pub fn best_value(g: &CGraph, k: usize) -> u64 {
    let eligible = g.eligible();
    let mut best = 0;
    for mask in 0u32..(1 << eligible.len()) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let set: BTreeSet<NodeId> = eligible
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        best = best.max(objective(g, &set));
    }
    best
}

pub fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

/// Depth-first cycle check.
pub fn has_cycle(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
    }
    fn visit(u: usize, adj: &[Vec<usize>], state: &mut [u8]) -> bool {
        state[u] = 1;
        for &v in &adj[u] {
            if state[v] == 1 || (state[v] == 0 && visit(v, adj, state)) {
                return true;
            }
        }
        state[u] = 2;
        false
    }
    let mut state = vec![0u8; n];
    (0..n).any(|u| state[u] == 0 && visit(u, &adj, &mut state))
}

/// Arbitrary digraph on `n` nodes `g0..`, no self-loops, each ordered pair
/// an edge with probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> CGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new();
    let ids: Vec<NodeId> = (0..n).map(|i| b.node(&format!("g{i}"))).collect();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < p {
                b.add_edge_ids(ids[u], ids[v]).unwrap();
            }
        }
    }
    b.build()
}

/// Random subset of the non-source nodes.
pub fn random_subset(g: &CGraph, rng: &mut ChaCha8Rng, p: f64) -> BTreeSet<NodeId> {
    g.eligible()
        .into_iter()
        .filter(|_| rng.random::<f64>() < p)
        .collect()
}
