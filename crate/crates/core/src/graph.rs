//! Directed communication graphs: construction, edge-list I/O, ordering and
//! reachability.
//!
//! An edge `(u, v)` means `u` relays items to `v`. Nodes carry an external
//! string label and a dense internal index assigned in order of first
//! appearance.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label given to the node introduced by [`add_super_source`].
pub const SUPER_SOURCE_LABEL: &str = "__super__";

/// Dense node index, `0..n`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(index: usize) -> Self {
        NodeId(u32::try_from(index).expect("node index exceeds u32"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Immutable directed graph with designated source nodes.
#[derive(Clone, Debug)]
pub struct CGraph {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    sources: Vec<NodeId>,
    is_source: Vec<bool>,
}

impl PartialEq for CGraph {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.edges == other.edges && self.sources == other.sources
    }
}

impl Eq for CGraph {}

impl CGraph {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.labels.len()).map(NodeId::new)
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn resolve(&self, label: &str) -> Result<NodeId> {
        self.id(label)
            .ok_or_else(|| Error::UnknownNode(label.to_string()))
    }

    /// Out-neighbors in ascending index order.
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v.index()]
    }

    /// In-neighbors in ascending index order.
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v.index()]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_adj[v.index()].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v.index()].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj[u.index()].binary_search(&v).is_ok()
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn is_source(&self, v: NodeId) -> bool {
        self.is_source[v.index()]
    }

    /// The unique source, or an error when there are zero or several.
    pub fn single_source(&self) -> Result<NodeId> {
        match self.sources.as_slice() {
            [s] => Ok(*s),
            [] => Err(Error::NoSource),
            many => Err(Error::MultipleSources(many.len())),
        }
    }

    /// Nodes that may host a filter: everything except the sources.
    pub fn eligible(&self) -> Vec<NodeId> {
        self.nodes().filter(|&v| !self.is_source(v)).collect()
    }

    /// Same nodes and edges, different source set.
    pub fn with_sources(&self, sources: &[NodeId]) -> Result<CGraph> {
        for &s in sources {
            if s.index() >= self.node_count() {
                return Err(Error::UnknownNode(s.to_string()));
            }
        }
        let mut g = self.clone();
        let mut srcs = sources.to_vec();
        srcs.sort_unstable();
        srcs.dedup();
        g.is_source = vec![false; g.node_count()];
        for &s in &srcs {
            g.is_source[s.index()] = true;
        }
        g.sources = srcs;
        Ok(g)
    }

    /// Serialize to the tab-separated edge-list format. A node is written
    /// as a single-label line when its first edge would otherwise introduce
    /// it out of index order, so parsing the output rebuilds the same node
    /// numbering, and isolated nodes survive.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let mut seen = vec![false; self.node_count()];
        // every node below `next` has been introduced
        let mut next = 0;
        let declare_through =
            |out: &mut String, seen: &mut Vec<bool>, next: &mut usize, last: usize| {
                while *next <= last {
                    if !seen[*next] {
                        seen[*next] = true;
                        out.push_str(&self.labels[*next]);
                        out.push('\n');
                    }
                    *next += 1;
                }
            };
        for &(u, v) in &self.edges {
            let fresh: Vec<usize> = [u.index(), v.index()]
                .into_iter()
                .filter(|&i| !seen[i])
                .collect();
            if let Some(&first) = fresh.iter().min() {
                if first > next {
                    declare_through(&mut out, &mut seen, &mut next, first - 1);
                }
            }
            let in_order = fresh.iter().enumerate().all(|(j, &i)| i == next + j);
            if in_order {
                for &i in &fresh {
                    seen[i] = true;
                }
                next += fresh.len();
            } else if let Some(&last) = fresh.iter().max() {
                declare_through(&mut out, &mut seen, &mut next, last);
            }
            while next < seen.len() && seen[next] {
                next += 1;
            }
            out.push_str(self.label(u));
            out.push('\t');
            out.push_str(self.label(v));
            out.push('\n');
        }
        declare_through(
            &mut out,
            &mut seen,
            &mut next,
            self.node_count().saturating_sub(1),
        );
        out
    }

    /// Build a graph over the nodes selected by `keep`, renumbered in
    /// ascending original index, with the given edges (which must lie
    /// inside the selection).
    pub(crate) fn restrict(
        &self,
        keep: &[bool],
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        sources: &[NodeId],
    ) -> CGraph {
        let mut b = GraphBuilder::new();
        let mut remap = vec![None; self.node_count()];
        for v in self.nodes() {
            if keep[v.index()] {
                remap[v.index()] = Some(b.node(self.label(v)));
            }
        }
        for (u, v) in edges {
            let (u, v) = (remap[u.index()].unwrap(), remap[v.index()].unwrap());
            b.add_edge_ids(u, v)
                .expect("restricted edges come from a valid graph");
        }
        let srcs: Vec<NodeId> = sources.iter().map(|s| remap[s.index()].unwrap()).collect();
        b.build_with_sources(srcs)
    }
}

/// Incremental constructor for [`CGraph`].
#[derive(Default, Debug)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    seen: HashSet<(NodeId, NodeId)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id of `label`, inserting it if new.
    pub fn node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = NodeId::new(self.labels.len());
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn add_edge(&mut self, from: &str, to: &str) -> Result<()> {
        let (u, v) = (self.node(from), self.node(to));
        self.push_edge(u, v, 0)
    }

    pub fn add_edge_ids(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.push_edge(u, v, 0)
    }

    fn push_edge(&mut self, u: NodeId, v: NodeId, line: usize) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop {
                line,
                node: self.labels[u.index()].clone(),
            });
        }
        if !self.seen.insert((u, v)) {
            return Err(Error::DuplicateEdge {
                line,
                from: self.labels[u.index()].clone(),
                to: self.labels[v.index()].clone(),
            });
        }
        self.edges.push((u, v));
        Ok(())
    }

    /// Finish with the in-degree-0 nodes as sources.
    pub fn build(self) -> CGraph {
        let mut indeg = vec![0usize; self.labels.len()];
        for &(_, v) in &self.edges {
            indeg[v.index()] += 1;
        }
        let sources = (0..self.labels.len())
            .filter(|&i| indeg[i] == 0)
            .map(NodeId::new)
            .collect();
        self.build_with_sources(sources)
    }

    pub fn build_with_sources(self, mut sources: Vec<NodeId>) -> CGraph {
        let n = self.labels.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            out_adj[u.index()].push(v);
            in_adj[v.index()].push(u);
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
        }
        sources.sort_unstable();
        sources.dedup();
        let mut is_source = vec![false; n];
        for &s in &sources {
            is_source[s.index()] = true;
        }
        CGraph {
            labels: self.labels,
            index: self.index,
            edges: self.edges,
            out_adj,
            in_adj,
            sources,
            is_source,
        }
    }
}

/// Parse the edge-list format: one `u<TAB>v` per line meaning `u` relays to
/// `v`, `#` starts a comment, and a line with a single label declares an
/// isolated node. Lines without a tab are split on whitespace.
///
/// With `source_hint` the named node is the only source; otherwise every
/// in-degree-0 node is a source.
pub fn parse_edge_list(text: &str, source_hint: Option<&str>) -> Result<CGraph> {
    let mut b = GraphBuilder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = if content.contains('\t') {
            content
                .split('\t')
                .map(str::trim)
                .filter(|f| !f.is_empty())
                .collect()
        } else {
            content.split_whitespace().collect()
        };
        match fields.as_slice() {
            [v] => {
                b.node(v);
            }
            [u, v] => {
                let (u, v) = (b.node(u), b.node(v));
                b.push_edge(u, v, line)?;
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 1 or 2 fields, found {}", fields.len()),
                })
            }
        }
    }
    if b.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    match source_hint {
        Some(label) => {
            let s = *b
                .index
                .get(label)
                .ok_or_else(|| Error::UnknownNode(label.to_string()))?;
            Ok(b.build_with_sources(vec![s]))
        }
        None => Ok(b.build()),
    }
}

/// A permutation of the nodes in which every edge points forward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopoOrder {
    order: Vec<NodeId>,
    position: Vec<usize>,
}

impl TopoOrder {
    pub fn as_slice(&self) -> &[NodeId] {
        &self.order
    }

    pub fn position(&self, v: NodeId) -> usize {
        self.position[v.index()]
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = NodeId> + '_ {
        self.order.iter().copied()
    }
}

/// Kahn's algorithm, always taking the smallest ready index.
pub fn topological_order(g: &CGraph) -> Result<TopoOrder> {
    let n = g.node_count();
    let mut indeg: Vec<usize> = g.nodes().map(|v| g.in_degree(v)).collect();
    let mut ready: BinaryHeap<Reverse<NodeId>> = g
        .nodes()
        .filter(|v| indeg[v.index()] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in g.out_neighbors(u) {
            indeg[v.index()] -= 1;
            if indeg[v.index()] == 0 {
                ready.push(Reverse(v));
            }
        }
    }
    if order.len() < n {
        return Err(Error::CycleDetected {
            cycle: find_cycle(g, &indeg),
        });
    }
    let mut position = vec![0; n];
    for (i, v) in order.iter().enumerate() {
        position[v.index()] = i;
    }
    Ok(TopoOrder { order, position })
}

pub fn is_acyclic(g: &CGraph) -> bool {
    topological_order(g).is_ok()
}

/// Walk predecessors among the nodes Kahn could not remove; every such node
/// has a remaining predecessor, so the walk must revisit a node.
fn find_cycle(g: &CGraph, remaining_indeg: &[usize]) -> Vec<String> {
    let stuck = |v: NodeId| remaining_indeg[v.index()] > 0;
    let start = g
        .nodes()
        .find(|&v| stuck(v))
        .expect("cycle implies a stuck node");
    let mut seen_at = HashMap::new();
    let mut walk = Vec::new();
    let mut cur = start;
    while !seen_at.contains_key(&cur) {
        seen_at.insert(cur, walk.len());
        walk.push(cur);
        cur = *g
            .in_neighbors(cur)
            .iter()
            .find(|&&p| stuck(p))
            .expect("stuck node has a stuck predecessor");
    }
    let mut cycle: Vec<NodeId> = walk[seen_at[&cur]..].to_vec();
    cycle.reverse();
    cycle.push(cycle[0]);
    cycle.into_iter().map(|v| g.label(v).to_string()).collect()
}

/// Reduce several sources to one by adding a node that feeds all of them.
/// Returns the graph unchanged when it already has exactly one source.
pub fn add_super_source(g: &CGraph) -> Result<CGraph> {
    match g.sources().len() {
        0 => Err(Error::NoSource),
        1 => Ok(g.clone()),
        _ => {
            let mut label = SUPER_SOURCE_LABEL.to_string();
            while g.id(&label).is_some() {
                label.push('_');
            }
            let mut b = GraphBuilder::new();
            for v in g.nodes() {
                b.node(g.label(v));
            }
            for &(u, v) in g.edges() {
                b.add_edge_ids(u, v)?;
            }
            let root = b.node(&label);
            for &s in g.sources() {
                b.add_edge_ids(root, s)?;
            }
            Ok(b.build_with_sources(vec![root]))
        }
    }
}

pub(crate) fn reachable_mask(g: &CGraph, start: NodeId) -> Vec<bool> {
    let mut seen = vec![false; g.node_count()];
    let mut stack = vec![start];
    seen[start.index()] = true;
    while let Some(u) = stack.pop() {
        for &v in g.out_neighbors(u) {
            if !seen[v.index()] {
                seen[v.index()] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Nodes reachable from `v` by directed paths, `v` included.
pub fn reachable_from(g: &CGraph, v: NodeId) -> BTreeSet<NodeId> {
    reachable_mask(g, v)
        .into_iter()
        .enumerate()
        .filter(|&(_, r)| r)
        .map(|(i, _)| NodeId::new(i))
        .collect()
}

/// Small graphs used in tests, docs and the CLI's self-checks.
pub mod fixtures {
    use super::{parse_edge_list, CGraph};

    /// `w` receives 1 + 2 + 1 copies; `z2` is the only useful filter.
    pub const CONVERGE: &str = "s\tx\ns\ty\nx\tz1\nx\tz2\ny\tz2\ny\tz3\nz1\tw\nz2\tw\nz3\tw\n";

    /// Degree product favours `B`, but only a filter at `A` helps.
    pub const HUB_STAR: &str =
        "s\tu1\ns\tu2\ns\tu3\nu1\tA\nu2\tA\nu3\tA\nA\tt\ns\tB\nB\tb1\nB\tb2\nB\tb3\nB\tb4\n";

    pub const DIAMOND: &str = "s\ta\ns\tb\na\tc\nb\tc\nc\td\n";

    pub const TREE1: &str = "s\tr\ns\ta\nr\ta\nr\tb\na\tc\n";

    /// A merge followed by a chain of relays.
    pub const MERGER_PATH: &str = "s\ta\ns\tb\na\tm1\nb\tm1\nm1\tm2\nm2\tm3\nm3\tt\n";

    fn load(text: &str) -> CGraph {
        parse_edge_list(text, Some("s")).expect("fixture parses")
    }

    pub fn converge() -> CGraph {
        load(CONVERGE)
    }

    pub fn hub_star() -> CGraph {
        load(HUB_STAR)
    }

    pub fn diamond() -> CGraph {
        load(DIAMOND)
    }

    pub fn tree1() -> CGraph {
        load(TREE1)
    }

    pub fn merger_path() -> CGraph {
        load(MERGER_PATH)
    }

    /// `s -> n1 -> ... -> n{len}`.
    pub fn chain(len: usize) -> CGraph {
        let mut text = String::new();
        let mut prev = "s".to_string();
        for i in 1..=len {
            let cur = format!("n{i}");
            text.push_str(&format!("{prev}\t{cur}\n"));
            prev = cur;
        }
        load(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(g: &CGraph, labels: &[&str]) -> Vec<NodeId> {
        labels.iter().map(|l| g.id(l).unwrap()).collect()
    }

    #[test]
    fn parse_fan_out() {
        let g = parse_edge_list("s\tx\ns\ty", Some("s")).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.sources(), ids(&g, &["s"]).as_slice());
    }

    #[test]
    fn parse_converge() {
        let g = fixtures::converge();
        assert_eq!(g.node_count(), 7);
        assert_eq!(g.edge_count(), 9);
        assert_eq!(g.in_degree(g.id("w").unwrap()), 3);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_edge_list("a\ta", None),
            Err(Error::SelfLoop { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("a\tb\n# c\na\tb\n", None),
            Err(Error::DuplicateEdge { line: 3, .. })
        ));
        assert_eq!(
            parse_edge_list("# nothing\n\n", None),
            Err(Error::EmptyGraph)
        );
        assert_eq!(
            parse_edge_list("a\tb", Some("q")),
            Err(Error::UnknownNode("q".into()))
        );
        assert!(matches!(
            parse_edge_list("a\tb\tc", None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn parse_without_hint_uses_roots() {
        let g = parse_edge_list("r1 a\nr2 a # trailing\n", None).unwrap();
        assert_eq!(g.sources(), ids(&g, &["r1", "r2"]).as_slice());
    }

    #[test]
    fn isolated_nodes_round_trip() {
        let text = "lonely\ns\tx\n";
        let g = parse_edge_list(text, None).unwrap();
        assert_eq!(g.to_edge_list(), text);
    }

    #[test]
    fn topo_chain() {
        let g = fixtures::chain(3);
        let order: Vec<&str> = topological_order(&g)
            .unwrap()
            .iter()
            .map(|v| g.label(v))
            .collect();
        assert_eq!(order, ["s", "n1", "n2", "n3"]);
    }

    #[test]
    fn topo_converge_respects_edges() {
        let g = fixtures::converge();
        let t = topological_order(&g).unwrap();
        assert_eq!(g.label(t.as_slice()[0]), "s");
        assert_eq!(g.label(*t.as_slice().last().unwrap()), "w");
        for &(u, v) in g.edges() {
            assert!(t.position(u) < t.position(v));
        }
    }

    #[test]
    fn topo_reports_cycle() {
        let g = parse_edge_list("a\tb\nb\tc\nc\ta\n", None).unwrap();
        match topological_order(&g) {
            Err(Error::CycleDetected { cycle }) => {
                assert_eq!(cycle.len(), 4);
                assert_eq!(cycle.first(), cycle.last());
                for w in cycle.windows(2) {
                    assert!(g.has_edge(g.id(&w[0]).unwrap(), g.id(&w[1]).unwrap()));
                }
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn cycle_behind_acyclic_prefix() {
        let g = parse_edge_list("s\ta\na\tb\nb\tc\nc\tb\n", None).unwrap();
        let Err(Error::CycleDetected { cycle }) = topological_order(&g) else {
            panic!()
        };
        let mut nodes = cycle[..cycle.len() - 1].to_vec();
        nodes.sort();
        assert_eq!(nodes, ["b", "c"]);
    }

    #[test]
    fn super_source() {
        let g = parse_edge_list("r1\ta\nr2\ta\n", None).unwrap();
        let h = add_super_source(&g).unwrap();
        let s = h.single_source().unwrap();
        assert_eq!(h.label(s), SUPER_SOURCE_LABEL);
        assert_eq!(h.out_neighbors(s), ids(&h, &["r1", "r2"]).as_slice());
        assert_eq!(h.in_degree(s), 0);

        let converge = fixtures::converge();
        assert_eq!(add_super_source(&converge).unwrap(), converge);

        let cyc = parse_edge_list("a\tb\nb\ta\n", None).unwrap();
        assert_eq!(add_super_source(&cyc), Err(Error::NoSource));
    }

    #[test]
    fn super_source_label_collision() {
        let g = parse_edge_list("__super__\ta\nr\ta\n", None).unwrap();
        let h = add_super_source(&g).unwrap();
        assert_eq!(h.label(h.single_source().unwrap()), "__super___");
    }

    #[test]
    fn reachability() {
        let g = fixtures::converge();
        assert_eq!(reachable_from(&g, g.id("s").unwrap()).len(), 7);
        let w = g.id("w").unwrap();
        assert_eq!(reachable_from(&g, w), BTreeSet::from([w]));
        let c = fixtures::chain(3);
        let got: Vec<&str> = reachable_from(&c, c.id("n2").unwrap())
            .into_iter()
            .map(|v| c.label(v))
            .collect();
        assert_eq!(got, ["n2", "n3"]);
    }
}
