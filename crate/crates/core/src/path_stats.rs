//! Prefix / suffix path statistics and node impact under a filter set.
//!
//! * `prefix(v)`: copies of the item reaching `v` (source→`v` paths, with
//!   every filter collapsing its inflow to one copy).
//! * `plist_v[x]`: number of `x`→`v` paths whose interior avoids filters.
//!   Every list holds `v` itself with count 1; a filter or source passes only
//!   `{v: 1}` downstream.
//! * `suffix(v)`: nonempty filter-cut paths starting at `v`, i.e. the
//!   receipts caused downstream by each copy `v` forwards.
//!
//! The impact `(prefix(v) − 1) · suffix(v)` is exactly the marginal gain of
//! turning `v` into a filter.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{topological_order, CGraph, NodeId, TopoOrder};
use crate::propagation::{filter_mask, Count};

/// Sparse ancestor map, sorted by ancestor id.
pub type PathList = Vec<(NodeId, Count)>;

#[derive(Clone, Debug)]
pub struct PathStats {
    pub prefix: Vec<Count>,
    pub suffix: Vec<Count>,
    pub plist: Vec<PathList>,
    pub filters: Vec<NodeId>,
    is_filter: Vec<bool>,
    is_source: Vec<bool>,
}

impl PathStats {
    pub fn prefix(&self, v: NodeId) -> &Count {
        &self.prefix[v.index()]
    }

    pub fn suffix(&self, v: NodeId) -> &Count {
        &self.suffix[v.index()]
    }

    pub fn plist(&self, v: NodeId) -> &[(NodeId, Count)] {
        &self.plist[v.index()]
    }

    /// `plist_v[x]`, zero when `x` is not a (filter-free) ancestor.
    pub fn paths(&self, x: NodeId, v: NodeId) -> Count {
        let list = &self.plist[v.index()];
        match list.binary_search_by_key(&x, |e| e.0) {
            Ok(i) => list[i].1.clone(),
            Err(_) => Count::zero(),
        }
    }

    pub fn is_filter(&self, v: NodeId) -> bool {
        self.is_filter[v.index()]
    }

    /// Marginal gain of adding `v`; `None` when `v` is already a filter.
    pub fn impact(&self, v: NodeId) -> Option<Count> {
        if self.is_filter(v) {
            return None;
        }
        Some(impact_value(
            &self.prefix[v.index()],
            &self.suffix[v.index()],
            self.is_source[v.index()],
        ))
    }

    /// Impact of every node, zero for filters and sources.
    pub fn impacts(&self) -> Vec<Count> {
        (0..self.prefix.len())
            .map(|i| self.impact(NodeId::new(i)).unwrap_or_else(Count::zero))
            .collect()
    }
}

fn impact_value(prefix: &Count, suffix: &Count, is_source: bool) -> Count {
    if is_source || prefix.is_zero() {
        Count::zero()
    } else {
        (prefix - 1u32) * suffix
    }
}

/// Copies `p` hands to each child.
fn forwarded_prefix(prefix: &Count, is_filter: bool) -> Count {
    if is_filter && !prefix.is_zero() {
        Count::one()
    } else {
        prefix.clone()
    }
}

/// Prefix counts alone, one pass in topological order.
pub(crate) fn prefix_pass(g: &CGraph, order: &TopoOrder, is_filter: &[bool]) -> Vec<Count> {
    let mut prefix = vec![Count::zero(); g.node_count()];
    let mut fwd = vec![Count::zero(); g.node_count()];
    for v in order.iter() {
        let i = v.index();
        if g.is_source(v) {
            prefix[i] = Count::one();
            fwd[i] = Count::one();
            continue;
        }
        let mut acc = Count::zero();
        for &p in g.in_neighbors(v) {
            acc += &fwd[p.index()];
        }
        fwd[i] = forwarded_prefix(&acc, is_filter[i]);
        prefix[i] = acc;
    }
    prefix
}

pub(crate) fn stats_with_order(g: &CGraph, order: &TopoOrder, is_filter: &[bool]) -> PathStats {
    let n = g.node_count();
    let is_source: Vec<bool> = g.nodes().map(|v| g.is_source(v)).collect();
    let prefix = prefix_pass(g, order, is_filter);
    let mut suffix = vec![Count::zero(); n];
    let mut plist: Vec<PathList> = vec![Vec::new(); n];

    // Dense scratch accumulator reused across nodes.
    let mut scratch = vec![Count::zero(); n];
    let mut touched: Vec<NodeId> = Vec::new();
    let mut marked = vec![false; n];

    for v in order.iter() {
        let i = v.index();
        touched.clear();
        touched.push(v);
        marked[i] = true;
        scratch[i] = Count::one();
        for &p in g.in_neighbors(v) {
            let pi = p.index();
            if is_filter[pi] || is_source[pi] {
                if !marked[pi] {
                    marked[pi] = true;
                    touched.push(p);
                }
                scratch[pi] += 1u32;
            } else {
                for (x, c) in &plist[pi] {
                    let xi = x.index();
                    if !marked[xi] {
                        marked[xi] = true;
                        touched.push(*x);
                    }
                    scratch[xi] += c;
                }
            }
        }
        touched.sort_unstable();
        let mut list = Vec::with_capacity(touched.len());
        for &x in &touched {
            let xi = x.index();
            marked[xi] = false;
            let c = std::mem::take(&mut scratch[xi]);
            // Receipts at sources are not counted anywhere.
            if x != v && !is_source[i] {
                suffix[xi] += &c;
            }
            list.push((x, c));
        }
        plist[i] = list;
    }

    let filters = (0..n).filter(|&i| is_filter[i]).map(NodeId::new).collect();
    PathStats {
        prefix,
        suffix,
        plist,
        filters,
        is_filter: is_filter.to_vec(),
        is_source,
    }
}

/// Prefix, suffix and path lists under `filters`, in one topological pass.
pub fn compute_stats(g: &CGraph, filters: &[NodeId]) -> Result<PathStats> {
    let order = topological_order(g)?;
    Ok(stats_with_order(g, &order, &filter_mask(g, filters)))
}

/// Marginal gain F(A ∪ {v}) − F(A).
pub fn impact(g: &CGraph, filters: &[NodeId], v: NodeId) -> Result<Count> {
    if filters.contains(&v) {
        return Err(Error::AlreadyFilter(g.label(v).to_string()));
    }
    let stats = compute_stats(g, filters)?;
    Ok(stats.impact(v).expect("v is not a filter"))
}

/// Impact of every node under `filters`; filters and sources map to zero.
pub fn impact_table(g: &CGraph, filters: &[NodeId]) -> Result<Vec<Count>> {
    Ok(compute_stats(g, filters)?.impacts())
}
