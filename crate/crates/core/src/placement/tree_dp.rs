//! Exact filter placement on c-trees.
//!
//! A c-tree is a graph that becomes a forest once its source is removed,
//! with every tree edge pointing away from the forest roots and every root
//! fed directly by the source. Other nodes may also hold a direct source
//! edge.
//!
//! The tree is binarized: a node with children `c1..cr` (r > 2) keeps `c1`
//! and gets a dummy right child whose children are `c2..cr`, repeated until
//! every node has at most two children. Dummies relay what they receive,
//! receive nothing themselves for accounting purposes, and are never
//! filters.
//!
//! The subtree cost of a node depends on the number of copies arriving
//! from its tree parent, so the table is indexed by that inflow as well as
//! by the filter budget: `best[v][c][i]` is the minimum number of receipts
//! inside the subtree of `v` when `c` copies enter `v` and at most `i`
//! filters are placed there. Inflow only grows by one per source-fed
//! ancestor, which bounds the table.

use num_bigint::BigUint;

use super::{Algorithm, FilterSet};
use crate::error::{Error, Result};
use crate::graph::{topological_order, CGraph, NodeId};

/// A graph certified to be a c-tree rooted at its single source.
#[derive(Clone, Debug)]
pub struct CTree {
    graph: CGraph,
    source: NodeId,
    tree_parent: Vec<Option<NodeId>>,
    has_source_edge: Vec<bool>,
}

impl CTree {
    pub fn certify(g: &CGraph) -> Result<CTree> {
        let source = g.single_source()?;
        if g.in_degree(source) > 0 {
            return Err(Error::NotACTree(format!(
                "source `{}` has incoming edges",
                g.label(source)
            )));
        }
        let n = g.node_count();
        let mut tree_parent = vec![None; n];
        let mut has_source_edge = vec![false; n];
        for v in g.nodes() {
            if v == source {
                continue;
            }
            let mut parents = g.in_neighbors(v).iter().filter(|&&p| p != source);
            tree_parent[v.index()] = parents.next().copied();
            if parents.next().is_some() {
                return Err(Error::NotACTree(format!(
                    "`{}` has more than one parent besides the source",
                    g.label(v)
                )));
            }
            has_source_edge[v.index()] = g.has_edge(source, v);
            if tree_parent[v.index()].is_none() && !has_source_edge[v.index()] {
                return Err(Error::NotACTree(format!(
                    "root `{}` is not fed by the source",
                    g.label(v)
                )));
            }
        }
        // In-degree at most one outside the source: any cycle is directed.
        topological_order(g).map_err(|e| match e {
            Error::CycleDetected { cycle } => {
                Error::NotACTree(format!("cycle {}", cycle.join(" -> ")))
            }
            other => other,
        })?;
        Ok(CTree {
            graph: g.clone(),
            source,
            tree_parent,
            has_source_edge,
        })
    }

    pub fn graph(&self) -> &CGraph {
        &self.graph
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn tree_parent(&self, v: NodeId) -> Option<NodeId> {
        self.tree_parent[v.index()]
    }

    pub fn has_source_edge(&self, v: NodeId) -> bool {
        self.has_source_edge[v.index()]
    }

    fn tree_children(&self) -> (Vec<NodeId>, Vec<Vec<NodeId>>) {
        let mut roots = Vec::new();
        let mut children = vec![Vec::new(); self.graph.node_count()];
        for v in self.graph.nodes() {
            if v == self.source {
                continue;
            }
            match self.tree_parent[v.index()] {
                Some(p) => children[p.index()].push(v),
                None => roots.push(v),
            }
        }
        (roots, children)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Slot {
    Real(NodeId),
    Dummy,
}

#[derive(Debug)]
struct BinNode {
    slot: Slot,
    children: Vec<usize>,
    /// Largest possible inflow from the tree parent.
    max_inflow: usize,
    /// 1 when the node has a direct source edge.
    source_feed: usize,
}

#[derive(Copy, Clone, Debug, Default)]
struct Cell {
    cost: u64,
    filter: bool,
    split: u32,
}

/// Binarized forest under a virtual dummy root at index 0. Parents always
/// precede their children.
fn binarize(t: &CTree) -> Vec<BinNode> {
    let (roots, children) = t.tree_children();
    let mut nodes = vec![BinNode {
        slot: Slot::Dummy,
        children: Vec::new(),
        max_inflow: 0,
        source_feed: 0,
    }];
    // (arena parent, pending children of the parent)
    let mut stack: Vec<(usize, Vec<NodeId>)> = vec![(0, roots)];
    while let Some((parent, pending)) = stack.pop() {
        let out = nodes[parent].max_inflow + nodes[parent].source_feed;
        let attach = |nodes: &mut Vec<BinNode>, slot: Slot| -> usize {
            let source_feed = match slot {
                Slot::Real(v) => usize::from(t.has_source_edge(v)),
                Slot::Dummy => 0,
            };
            let id = nodes.len();
            nodes.push(BinNode {
                slot,
                children: Vec::new(),
                max_inflow: out,
                source_feed,
            });
            nodes[parent].children.push(id);
            id
        };
        let (head, rest) = if pending.len() > 2 {
            (&pending[..1], Some(pending[1..].to_vec()))
        } else {
            (&pending[..], None)
        };
        for &c in head {
            let id = attach(&mut nodes, Slot::Real(c));
            stack.push((id, children[c.index()].clone()));
        }
        if let Some(rest) = rest {
            let id = attach(&mut nodes, Slot::Dummy);
            stack.push((id, rest));
        }
    }
    nodes
}

/// Result of the tree program: the chosen filters and their objective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDpOutcome {
    pub filters: FilterSet,
    /// Φ(∅, V) − Φ(A, V) for the chosen set.
    pub value: BigUint,
    pub baseline: BigUint,
}

/// Optimal placement of at most `k` filters on a c-tree.
pub fn tree_dp(t: &CTree, k: usize) -> TreeDpOutcome {
    let nodes = binarize(t);
    let budget = k.min(t.graph.node_count());
    let width = budget + 1;

    // tables[a][c * width + i]
    let mut tables: Vec<Vec<Cell>> = vec![Vec::new(); nodes.len()];
    for a in (0..nodes.len()).rev() {
        let node = &nodes[a];
        let mut table = vec![Cell::default(); (node.max_inflow + 1) * width];
        for c in 0..=node.max_inflow {
            let received = c + node.source_feed;
            let own = match node.slot {
                Slot::Real(_) => received as u64,
                Slot::Dummy => 0,
            };
            for i in 0..=budget {
                let (cost, split) = combine(&nodes, &tables, a, received, i, width);
                let mut cell = Cell {
                    cost: cost + own,
                    filter: false,
                    split,
                };
                if matches!(node.slot, Slot::Real(_)) && i > 0 {
                    let (cost, split) = combine(&nodes, &tables, a, received.min(1), i - 1, width);
                    if cost + own < cell.cost {
                        cell = Cell {
                            cost: cost + own,
                            filter: true,
                            split,
                        };
                    }
                }
                table[c * width + i] = cell;
            }
        }
        tables[a] = table;
    }

    // Walk the decisions back down from the virtual root.
    let mut members = Vec::new();
    let mut stack = vec![(0usize, 0usize, budget)];
    while let Some((a, c, i)) = stack.pop() {
        let cell = tables[a][c * width + i];
        let node = &nodes[a];
        let received = c + node.source_feed;
        let (out, rest) = if cell.filter {
            if let Slot::Real(v) = node.slot {
                members.push(v);
            }
            (received.min(1), i - 1)
        } else {
            (received, i)
        };
        match node.children.as_slice() {
            [] => {}
            [only] => stack.push((*only, out, rest)),
            [l, r] => {
                let j = cell.split as usize;
                stack.push((*l, out, j));
                stack.push((*r, out, rest - j));
            }
            _ => unreachable!("binarized"),
        }
    }
    members.sort_unstable();

    let baseline = tables[0][0].cost;
    let best = tables[0][budget].cost;
    TreeDpOutcome {
        filters: FilterSet::new(members, Algorithm::TreeDp, k),
        value: BigUint::from(baseline - best),
        baseline: BigUint::from(baseline),
    }
}

/// Best split of `budget` filters among the children of `a`, each receiving
/// `inflow` copies. Returns (cost, filters given to the left child).
fn combine(
    nodes: &[BinNode],
    tables: &[Vec<Cell>],
    a: usize,
    inflow: usize,
    budget: usize,
    width: usize,
) -> (u64, u32) {
    let at = |child: usize, i: usize| tables[child][inflow * width + i].cost;
    match nodes[a].children.as_slice() {
        [] => (0, 0),
        [only] => (at(*only, budget), 0),
        [l, r] => (0..=budget)
            .map(|j| (at(*l, j) + at(*r, budget - j), j as u32))
            .min_by_key(|&(cost, j)| (cost, j))
            .expect("nonempty range"),
        _ => unreachable!("binarized"),
    }
}
