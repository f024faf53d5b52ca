//! Exact deterministic propagation of a single item.
//!
//! Every source emits one copy. A plain node relays every copy it receives
//! to each out-neighbor; a filter relays at most one. Counts grow with the
//! number of paths, so they are kept as arbitrary-precision integers.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::graph::{topological_order, CGraph, NodeId, TopoOrder};

pub type Count = BigUint;

/// Per-node receive and forward counts from one propagation run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    pub received: Vec<Count>,
    pub forwarded: Vec<Count>,
}

impl CountTable {
    pub fn received(&self, v: NodeId) -> &Count {
        &self.received[v.index()]
    }

    pub fn forwarded(&self, v: NodeId) -> &Count {
        &self.forwarded[v.index()]
    }
}

pub fn filter_mask(g: &CGraph, filters: &[NodeId]) -> Vec<bool> {
    let mut mask = vec![false; g.node_count()];
    for &f in filters {
        mask[f.index()] = true;
    }
    mask
}

/// Reusable evaluator for many filter sets on one acyclic graph.
#[derive(Clone, Debug)]
pub struct Propagator<'g> {
    graph: &'g CGraph,
    order: TopoOrder,
    baseline: Count,
}

impl<'g> Propagator<'g> {
    pub fn new(graph: &'g CGraph) -> Result<Self> {
        let order = topological_order(graph)?;
        let mut p = Propagator {
            graph,
            order,
            baseline: Count::zero(),
        };
        p.baseline = p.phi_masked(&vec![false; graph.node_count()]);
        Ok(p)
    }

    pub fn graph(&self) -> &'g CGraph {
        self.graph
    }

    pub fn order(&self) -> &TopoOrder {
        &self.order
    }

    pub fn simulate_masked(&self, is_filter: &[bool]) -> CountTable {
        let g = self.graph;
        let n = g.node_count();
        let mut received = vec![Count::zero(); n];
        let mut forwarded = vec![Count::zero(); n];
        for v in self.order.iter() {
            let i = v.index();
            let mut r = Count::zero();
            for &p in g.in_neighbors(v) {
                r += &forwarded[p.index()];
            }
            forwarded[i] = if g.is_source(v) {
                Count::one()
            } else if is_filter[i] {
                if r.is_zero() {
                    Count::zero()
                } else {
                    Count::one()
                }
            } else {
                r.clone()
            };
            received[i] = r;
        }
        CountTable {
            received,
            forwarded,
        }
    }

    pub fn simulate(&self, filters: &[NodeId]) -> CountTable {
        self.simulate_masked(&filter_mask(self.graph, filters))
    }

    pub fn phi_masked(&self, is_filter: &[bool]) -> Count {
        let t = self.simulate_masked(is_filter);
        self.graph
            .nodes()
            .filter(|&v| !self.graph.is_source(v))
            .fold(Count::zero(), |acc, v| acc + &t.received[v.index()])
    }

    pub fn phi(&self, filters: &[NodeId]) -> Count {
        self.phi_masked(&filter_mask(self.graph, filters))
    }

    /// Φ(∅, V).
    pub fn baseline(&self) -> &Count {
        &self.baseline
    }

    pub fn objective_masked(&self, is_filter: &[bool]) -> Count {
        // Filters never increase receipts, so the difference is nonnegative.
        &self.baseline - self.phi_masked(is_filter)
    }

    pub fn objective(&self, filters: &[NodeId]) -> Count {
        self.objective_masked(&filter_mask(self.graph, filters))
    }
}

/// Receive/forward counts under `filters`. Fails on cyclic graphs, where
/// counts would be unbounded.
pub fn simulate(g: &CGraph, filters: &[NodeId]) -> Result<CountTable> {
    Ok(Propagator::new(g)?.simulate(filters))
}

/// Total receipts over all non-source nodes, Φ(A, V).
pub fn phi_total(g: &CGraph, filters: &[NodeId]) -> Result<Count> {
    Ok(Propagator::new(g)?.phi(filters))
}

/// Redundancy removed by `filters`: Φ(∅, V) − Φ(A, V).
pub fn objective_f(g: &CGraph, filters: &[NodeId]) -> Result<Count> {
    Ok(Propagator::new(g)?.objective(filters))
}
