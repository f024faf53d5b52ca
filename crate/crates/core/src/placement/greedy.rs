use num_traits::Zero;

use super::{top_k, Algorithm, FilterSet};
use crate::error::Result;
use crate::graph::{topological_order, CGraph, NodeId};
use crate::path_stats::{prefix_pass, stats_with_order};
use crate::propagation::Count;

/// Top `k` nodes by `d_in(v) · d_out(v)`.
pub fn greedy_1(g: &CGraph, k: usize) -> FilterSet {
    let scored = g
        .eligible()
        .into_iter()
        .map(|v| (v, g.in_degree(v) as u128 * g.out_degree(v) as u128))
        .collect();
    FilterSet::new(top_k(scored, k), Algorithm::Greedy1, k)
}

/// Repeatedly add the node with the largest impact under the filters chosen
/// so far. Stops early once no node has positive impact.
pub fn greedy_all(g: &CGraph, k: usize) -> Result<FilterSet> {
    let order = topological_order(g)?;
    let mut is_filter = vec![false; g.node_count()];
    let mut members = Vec::new();
    for _ in 0..k {
        let stats = stats_with_order(g, &order, &is_filter);
        let mut best: Option<(NodeId, Count)> = None;
        for v in g.nodes() {
            if g.is_source(v) || is_filter[v.index()] {
                continue;
            }
            let gain = stats.impact(v).expect("not a filter");
            if best.as_ref().is_none_or(|(_, b)| gain > *b) {
                best = Some((v, gain));
            }
        }
        match best {
            Some((v, gain)) if !gain.is_zero() => {
                is_filter[v.index()] = true;
                members.push(v);
            }
            _ => break,
        }
    }
    Ok(FilterSet::new(members, Algorithm::GreedyAll, k))
}

/// Top `k` nodes by impact with no filters placed; impacts are never
/// recomputed.
pub fn greedy_max(g: &CGraph, k: usize) -> Result<FilterSet> {
    let order = topological_order(g)?;
    let stats = stats_with_order(g, &order, &vec![false; g.node_count()]);
    let impacts = stats.impacts();
    let scored = g
        .eligible()
        .into_iter()
        .map(|v| (v, impacts[v.index()].clone()))
        .collect();
    Ok(FilterSet::new(top_k(scored, k), Algorithm::GreedyMax, k))
}

/// Repeatedly add the node maximizing `prefix(v) · d_out(v)`, with prefixes
/// recomputed under the current filters. Runs all `k` rounds while
/// candidates remain.
pub fn greedy_l(g: &CGraph, k: usize) -> Result<FilterSet> {
    let order = topological_order(g)?;
    let mut is_filter = vec![false; g.node_count()];
    let mut members = Vec::new();
    for _ in 0..k {
        let prefix = prefix_pass(g, &order, &is_filter);
        let mut best: Option<(NodeId, Count)> = None;
        for v in g.nodes() {
            if g.is_source(v) || is_filter[v.index()] {
                continue;
            }
            let score = &prefix[v.index()] * g.out_degree(v);
            if best.as_ref().is_none_or(|(_, b)| score > *b) {
                best = Some((v, score));
            }
        }
        let Some((v, _)) = best else { break };
        is_filter[v.index()] = true;
        members.push(v);
    }
    Ok(FilterSet::new(members, Algorithm::GreedyL, k))
}

/// The smallest set reaching F(V): every non-source node with more than
/// one parent and at least one child.
pub fn optimal_unbounded(g: &CGraph) -> FilterSet {
    let members: Vec<NodeId> = g
        .nodes()
        .filter(|&v| !g.is_source(v) && g.in_degree(v) > 1 && g.out_degree(v) > 0)
        .collect();
    let k = members.len();
    FilterSet::new(members, Algorithm::OptimalUnbounded, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{fixtures, parse_edge_list};
    use crate::propagation::{objective_f, Propagator};

    fn labels(g: &CGraph, fs: &FilterSet) -> Vec<String> {
        fs.labels(g).into_iter().map(String::from).collect()
    }

    #[test]
    fn greedy_1_examples() {
        let g2 = fixtures::hub_star();
        assert_eq!(labels(&g2, &greedy_1(&g2, 1)), ["B"]);
        let g1 = fixtures::converge();
        assert_eq!(labels(&g1, &greedy_1(&g1, 1)), ["x"]);
        assert!(greedy_1(&g1, 0).is_empty());
        assert_eq!(greedy_1(&g1, 100).len(), 6);
    }

    #[test]
    fn greedy_all_examples() {
        let g1 = fixtures::converge();
        let fs = greedy_all(&g1, 1).unwrap();
        assert_eq!(labels(&g1, &fs), ["z2"]);
        assert_eq!(objective_f(&g1, fs.nodes()).unwrap(), Count::from(1u32));

        let g2 = fixtures::hub_star();
        let fs = greedy_all(&g2, 1).unwrap();
        assert_eq!(labels(&g2, &fs), ["A"]);
        assert_eq!(objective_f(&g2, fs.nodes()).unwrap(), Count::from(2u32));

        let d = fixtures::diamond();
        let fs = greedy_all(&d, 2).unwrap();
        assert_eq!(labels(&d, &fs), ["c"]);
        assert_eq!(fs.k_requested, 2);
    }

    #[test]
    fn greedy_max_examples() {
        let g1 = fixtures::converge();
        assert_eq!(labels(&g1, &greedy_max(&g1, 1).unwrap()), ["z2"]);
        let g2 = fixtures::hub_star();
        assert_eq!(labels(&g2, &greedy_max(&g2, 1).unwrap()), ["A"]);
    }

    #[test]
    fn greedy_max_wastes_second_filter_on_merger_path() {
        let g = fixtures::merger_path();
        let fs = greedy_max(&g, 2).unwrap();
        assert_eq!(labels(&g, &fs), ["m1", "m2"]);
        let p = Propagator::new(&g).unwrap();
        let m1 = g.id("m1").unwrap();
        assert_eq!(p.objective(fs.nodes()), p.objective(&[m1]));
        assert_eq!(p.objective(&[m1]), Count::from(3u32));
    }

    #[test]
    fn greedy_l_examples() {
        let g1 = fixtures::converge();
        assert_eq!(labels(&g1, &greedy_l(&g1, 1).unwrap()), ["x"]);
        let g2 = fixtures::hub_star();
        assert_eq!(labels(&g2, &greedy_l(&g2, 1).unwrap()), ["B"]);
        // Keeps going after gains vanish, until candidates run out.
        assert_eq!(greedy_l(&g1, 50).unwrap().len(), 6);
    }

    #[test]
    fn greedy_l_recomputes_prefix() {
        // Initially I'(m) = I'(r) = 6 and I'(z) = 4. Filtering m drops
        // prefix(r) from 6 to 3, so z must come second.
        let text = "s a\ns b\na m\nb m\nm p\nm q\nm u\np r\nq r\nu r\nr t\n\
                    s c\ns d\nc z\nd z\nz y1\nz y2\n";
        let g = parse_edge_list(text, Some("s")).unwrap();
        let fs = greedy_l(&g, 2).unwrap();
        assert_eq!(labels(&g, &fs), ["m", "z"]);
    }

    #[test]
    fn optimal_unbounded_examples() {
        let g1 = fixtures::converge();
        assert_eq!(labels(&g1, &optimal_unbounded(&g1)), ["z2"]);
        let g2 = fixtures::hub_star();
        assert_eq!(labels(&g2, &optimal_unbounded(&g2)), ["A"]);
        assert!(optimal_unbounded(&fixtures::chain(4)).is_empty());
    }

    #[test]
    fn cyclic_input_rejected() {
        let g = parse_edge_list("s\ta\na\tb\nb\ta\n", Some("s")).unwrap();
        assert!(greedy_all(&g, 1).is_err());
        assert!(greedy_max(&g, 1).is_err());
        assert!(greedy_l(&g, 1).is_err());
    }
}
