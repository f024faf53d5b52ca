//! Maximal connected acyclic subgraph of an arbitrary digraph.
//!
//! A DFS from the root yields a spanning tree `T` of the reachable nodes and
//! discovery times `σ`. Every tree edge is kept. A non-tree edge `(u, v)` is
//! kept when it cannot close a cycle, which depends only on where `u` and
//! `v` sit in `T`:
//!
//! * `v` in the DFS subtree of `u` (a descendant edge) is always safe;
//! * otherwise the edge is safe iff `u` and `v` lie in different branches
//!   below their deepest common junction `w` and `σ(v) < σ(w_u) ≤ σ(u)`,
//!   where `w_u` is the child of `w` on the tree path to `u`.
//!
//! Junctions are nodes with at least two tree children; each node's
//! signature lists the `(junction, branch entry)` pairs on its root path, so
//! the deepest common junction falls out of a merged scan of two
//! signatures.
//!
//! The accepted edges are exactly the DFS tree, descendant and cross edges,
//! i.e. everything except back edges. All of them point from a later to an
//! earlier DFS finish time, so their union is acyclic no matter in which
//! order edges are examined, and each rejected back edge closes a cycle with
//! the tree path, so the result is maximal.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{topological_order, CGraph, NodeId};

/// DFS bookkeeping for one root. Discovery times start at 1.
#[derive(Clone, Debug)]
pub struct DfsAnnotation {
    pub root: NodeId,
    pub discovery: Vec<Option<usize>>,
    pub tree_parent: Vec<Option<NodeId>>,
    pub tree_children: Vec<Vec<NodeId>>,
    /// Root-to-leaf `(junction, branch entry)` pairs above each node.
    pub signature: Vec<Vec<(NodeId, NodeId)>>,
    /// `[σ(v), max σ in the subtree of v]`.
    pub interval: Vec<Option<(usize, usize)>>,
}

impl DfsAnnotation {
    pub fn visited(&self, v: NodeId) -> bool {
        self.discovery[v.index()].is_some()
    }

    pub fn is_junction(&self, v: NodeId) -> bool {
        self.tree_children[v.index()].len() > 1
    }

    fn sigma(&self, v: NodeId) -> usize {
        self.discovery[v.index()].expect("visited")
    }

    /// `v` lies strictly below `u` in the DFS tree.
    pub fn is_descendant(&self, v: NodeId, u: NodeId) -> bool {
        let (enter, exit) = self.interval[u.index()].expect("visited");
        let sv = self.sigma(v);
        enter < sv && sv <= exit
    }

    /// The signature test: `u` and `v` hang off different branches of
    /// their deepest common junction, with `v`'s branch discovered first.
    pub fn crosses_branches(&self, u: NodeId, v: NodeId) -> bool {
        let (su, sv) = (&self.signature[u.index()], &self.signature[v.index()]);
        let mut deepest = None;
        for (a, b) in su.iter().zip(sv) {
            if a.0 != b.0 {
                break;
            }
            deepest = Some(a.1);
            if a.1 != b.1 {
                break;
            }
        }
        match deepest {
            Some(w_u) => {
                let s_wu = self.sigma(w_u);
                self.sigma(v) < s_wu && s_wu <= self.sigma(u)
            }
            None => false,
        }
    }

    /// Whether edge `(u, v)` of the input survives extraction.
    pub fn keeps_edge(&self, u: NodeId, v: NodeId) -> bool {
        if !self.visited(u) {
            return false;
        }
        self.tree_parent[v.index()] == Some(u)
            || self.is_descendant(v, u)
            || self.crosses_branches(u, v)
    }
}

/// Iterative DFS from `root`, children in ascending index order.
pub fn annotate(g: &CGraph, root: NodeId) -> DfsAnnotation {
    let n = g.node_count();
    let mut discovery = vec![None; n];
    let mut tree_parent = vec![None; n];
    let mut tree_children = vec![Vec::new(); n];
    let mut interval = vec![None; n];
    let mut clock = 1;
    discovery[root.index()] = Some(clock);
    let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        let children = g.out_neighbors(u);
        if let Some(&v) = children.get(*next) {
            *next += 1;
            if discovery[v.index()].is_none() {
                clock += 1;
                discovery[v.index()] = Some(clock);
                tree_parent[v.index()] = Some(u);
                tree_children[u.index()].push(v);
                stack.push((v, 0));
            }
        } else {
            stack.pop();
            interval[u.index()] = Some((discovery[u.index()].unwrap(), clock));
        }
    }

    // Parents are discovered before children.
    let mut by_time: Vec<NodeId> = g
        .nodes()
        .filter(|v| discovery[v.index()].is_some())
        .collect();
    by_time.sort_by_key(|v| discovery[v.index()]);
    let mut signature: Vec<Vec<(NodeId, NodeId)>> = vec![Vec::new(); n];
    for &v in &by_time {
        if let Some(p) = tree_parent[v.index()] {
            let mut sig = signature[p.index()].clone();
            if tree_children[p.index()].len() > 1 {
                sig.push((p, v));
            }
            signature[v.index()] = sig;
        }
    }

    DfsAnnotation {
        root,
        discovery,
        tree_parent,
        tree_children,
        signature,
        interval,
    }
}

/// Nodes reachable from `root` with every edge that cannot close a cycle.
/// The result has `root` as its single source.
pub fn extract_dag(g: &CGraph, root: NodeId) -> Result<CGraph> {
    if root.index() >= g.node_count() {
        return Err(Error::RootNotFound(root.to_string()));
    }
    let ann = annotate(g, root);
    let keep: Vec<bool> = g.nodes().map(|v| ann.visited(v)).collect();
    let edges = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| ann.keeps_edge(u, v));
    let dag = g.restrict(&keep, edges, &[root]);
    assert!(
        topological_order(&dag).is_ok(),
        "extracted subgraph must be acyclic"
    );
    Ok(dag)
}

pub fn extract_dag_from(g: &CGraph, root_label: &str) -> Result<CGraph> {
    let root = g
        .id(root_label)
        .ok_or_else(|| Error::RootNotFound(root_label.to_string()))?;
    extract_dag(g, root)
}

/// Size of the extraction from `root` without materializing it.
fn extraction_size(g: &CGraph, root: NodeId) -> (usize, usize) {
    let ann = annotate(g, root);
    let nodes = g.nodes().filter(|&v| ann.visited(v)).count();
    let edges = g
        .edges()
        .iter()
        .filter(|&&(u, v)| ann.keeps_edge(u, v))
        .count();
    (nodes, edges)
}

/// Run the extraction from every node and keep the largest result: most
/// nodes, then most edges, then smallest root index.
pub fn best_dag(g: &CGraph) -> Result<(CGraph, NodeId)> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let sizes: Vec<(usize, usize)> = g
        .nodes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&r| extraction_size(g, r))
        .collect();
    let root = g
        .nodes()
        .max_by(|a, b| sizes[a.index()].cmp(&sizes[b.index()]).then(b.cmp(a)))
        .expect("nonempty");
    Ok((extract_dag(g, root)?, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{fixtures, parse_edge_list};

    fn edge_labels(g: &CGraph) -> Vec<(String, String)> {
        g.edges()
            .iter()
            .map(|&(u, v)| (g.label(u).to_string(), g.label(v).to_string()))
            .collect()
    }

    fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
        list.iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn drops_back_edge() {
        let g = parse_edge_list("s a\na b\nb c\nc a\n", Some("s")).unwrap();
        let dag = extract_dag_from(&g, "s").unwrap();
        assert_eq!(
            edge_labels(&dag),
            pairs(&[("s", "a"), ("a", "b"), ("b", "c")])
        );
    }

    #[test]
    fn keeps_cross_edge() {
        let g = parse_edge_list("s a\ns b\nb a\n", Some("s")).unwrap();
        let ann = annotate(&g, g.id("s").unwrap());
        let id = |l| g.id(l).unwrap();
        assert_eq!(ann.discovery[id("a").index()], Some(2));
        assert_eq!(ann.discovery[id("b").index()], Some(3));
        assert!(ann.is_junction(id("s")));
        assert_eq!(ann.signature[id("b").index()], vec![(id("s"), id("b"))]);
        assert!(ann.crosses_branches(id("b"), id("a")));
        let dag = extract_dag_from(&g, "s").unwrap();
        assert_eq!(dag.edge_count(), 3);
    }

    #[test]
    fn keeps_descendant_edge() {
        // s→a→b→c plus the shortcut a→c.
        let g = parse_edge_list("s a\na b\nb c\na c\n", Some("s")).unwrap();
        let dag = extract_dag_from(&g, "s").unwrap();
        assert_eq!(dag.edge_count(), 4);
        let ann = annotate(&g, g.id("s").unwrap());
        assert!(!ann.crosses_branches(g.id("a").unwrap(), g.id("c").unwrap()));
    }

    #[test]
    fn dag_input_is_identity() {
        let g = fixtures::converge();
        let dag = extract_dag_from(&g, "s").unwrap();
        assert_eq!(dag, g);
    }

    #[test]
    fn unreachable_nodes_dropped() {
        let g = parse_edge_list("s a\nq a\nq r\na b\n", None).unwrap();
        let dag = extract_dag_from(&g, "s").unwrap();
        assert_eq!(dag.labels(), ["s", "a", "b"]);
        assert_eq!(dag.sources(), &[dag.id("s").unwrap()]);
    }

    #[test]
    fn missing_root() {
        let g = fixtures::converge();
        assert_eq!(
            extract_dag_from(&g, "nope"),
            Err(Error::RootNotFound("nope".into()))
        );
        assert!(matches!(
            extract_dag(&g, NodeId::new(99)),
            Err(Error::RootNotFound(_))
        ));
    }

    #[test]
    fn best_dag_two_cycle() {
        let g = parse_edge_list("a b\nb a\n", None).unwrap();
        let (dag, root) = best_dag(&g).unwrap();
        assert_eq!(g.label(root), "a");
        assert_eq!(dag.node_count(), 2);
        assert_eq!(edge_labels(&dag), pairs(&[("a", "b")]));
    }

    #[test]
    fn best_dag_of_dag_is_whole_graph() {
        let g = fixtures::hub_star();
        let (dag, root) = best_dag(&g).unwrap();
        assert_eq!(g.label(root), "s");
        assert_eq!(dag, g);
    }
}
