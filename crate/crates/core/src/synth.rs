//! Random instance generators: the layered benchmark graph plus random DAGs
//! and c-trees for property tests.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CGraph, GraphBuilder, NodeId};
use crate::placement::CTree;

pub const SOURCE_LABEL: &str = "s";

/// Layered random graph: `levels · expected_width` nodes, each dropped into
/// a uniformly random level; an edge from level `i` to level `j > i` exists
/// with probability `min(1, x / y^(j−i))`. A source feeds every level-1
/// node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredConfig {
    pub levels: usize,
    pub expected_width: usize,
    pub x: f64,
    pub y: f64,
    pub seed: u64,
}

impl LayeredConfig {
    pub fn new(levels: usize, expected_width: usize, x: f64, y: f64, seed: u64) -> Self {
        LayeredConfig {
            levels,
            expected_width,
            x,
            y,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::InvalidConfig("levels must be at least 2".into()));
        }
        if self.expected_width == 0 {
            return Err(Error::InvalidConfig("width must be positive".into()));
        }
        if !(self.x > 0.0 && self.x.is_finite() && self.y > 0.0 && self.y.is_finite()) {
            return Err(Error::InvalidConfig(
                "x and y must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.levels * self.expected_width
    }

    /// Edge probability between levels `gap` apart.
    pub fn edge_prob(&self, gap: usize) -> f64 {
        (self.x / self.y.powi(gap as i32)).clamp(0.0, 1.0)
    }

    /// Exact mean and variance of the generated edge count (source edges
    /// included), from multinomial moments of the level sizes.
    pub fn edge_count_moments(&self) -> (f64, f64) {
        let big_n = self.node_count() as u32;
        let q = 1.0 / self.levels as f64;
        let levels = self.levels;

        // Level-size polynomial Q = n_0 + Σ_{i<j} p_{j−i} n_i n_j.
        let mut poly: Vec<(f64, Monomial)> = vec![(1.0, Monomial::single(0))];
        for i in 0..levels {
            for j in i + 1..levels {
                poly.push((self.edge_prob(j - i), Monomial::pair(i, j)));
            }
        }
        let expect = |m: &Monomial| multinomial_moment(big_n, q, m);

        let mean: f64 = poly.iter().map(|(c, m)| c * expect(m)).sum();
        let mut second = 0.0;
        for (ca, ma) in &poly {
            for (cb, mb) in &poly {
                second += ca * cb * expect(&ma.times(mb));
            }
        }
        // Bernoulli noise given the level sizes.
        let noise: f64 = (0..levels)
            .flat_map(|i| (i + 1..levels).map(move |j| (i, j)))
            .map(|(i, j)| {
                let p = self.edge_prob(j - i);
                p * (1.0 - p) * expect(&Monomial::pair(i, j))
            })
            .sum();
        (mean, second - mean * mean + noise)
    }
}

/// Product of level-size powers, level → exponent.
#[derive(Clone, Debug, Default)]
struct Monomial(BTreeMap<usize, u32>);

impl Monomial {
    fn single(i: usize) -> Self {
        Monomial(BTreeMap::from([(i, 1)]))
    }

    fn pair(i: usize, j: usize) -> Self {
        let mut m = Monomial::default();
        *m.0.entry(i).or_default() += 1;
        *m.0.entry(j).or_default() += 1;
        m
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut m = self.clone();
        for (&k, &e) in &other.0 {
            *m.0.entry(k).or_default() += e;
        }
        m
    }
}

fn stirling2(n: u32, k: u32) -> f64 {
    match (n, k) {
        (0, 0) => 1.0,
        (_, 0) | (0, _) => 0.0,
        _ if k > n => 0.0,
        _ => k as f64 * stirling2(n - 1, k) + stirling2(n - 1, k - 1),
    }
}

fn falling(n: u32, t: u32) -> f64 {
    (0..t).map(|i| n.saturating_sub(i) as f64).product()
}

/// `E[Π n_i^{e_i}]` for equiprobable multinomial counts, by expanding each
/// power into falling factorials: `E[Π n_i^{(t_i)}] = N^{(Σt)} q^{Σt}`.
fn multinomial_moment(big_n: u32, q: f64, m: &Monomial) -> f64 {
    let terms: Vec<u32> = m.0.values().copied().collect();
    let mut total = 0.0;
    let mut idx = vec![1u32; terms.len()];
    loop {
        let coeff: f64 = terms
            .iter()
            .zip(&idx)
            .map(|(&e, &t)| stirling2(e, t))
            .product();
        let t: u32 = idx.iter().sum();
        total += coeff * falling(big_n, t) * q.powi(t as i32);
        // odometer over 1..=e_i
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return total;
            }
            if idx[pos] < terms[pos] {
                idx[pos] += 1;
                break;
            }
            idx[pos] = 1;
            pos += 1;
        }
    }
}

/// Sample a layered graph. Node `v{i}` sits on level `levels[i]` (1-based).
pub fn layered_graph_with_levels(cfg: &LayeredConfig) -> Result<(CGraph, Vec<usize>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.node_count();
    let levels: Vec<usize> = (0..n).map(|_| rng.random_range(1..=cfg.levels)).collect();
    let probs: Vec<f64> = (0..cfg.levels).map(|gap| cfg.edge_prob(gap)).collect();

    let mut b = GraphBuilder::new();
    let source = b.node(SOURCE_LABEL);
    let ids: Vec<NodeId> = (0..n).map(|i| b.node(&format!("v{i}"))).collect();
    for (i, &lv) in levels.iter().enumerate() {
        if lv == 1 {
            b.add_edge_ids(source, ids[i])?;
        }
    }
    for (i, &li) in levels.iter().enumerate() {
        for (j, &lj) in levels.iter().enumerate() {
            if lj > li && rng.random::<f64>() < probs[lj - li] {
                b.add_edge_ids(ids[i], ids[j])?;
            }
        }
    }
    Ok((b.build_with_sources(vec![source]), levels))
}

pub fn layered_graph(cfg: &LayeredConfig) -> Result<CGraph> {
    Ok(layered_graph_with_levels(cfg)?.0)
}

/// Random DAG on `n` nodes: a random permutation fixes the order, each
/// forward pair is an edge with probability `edge_prob`, and a source `s`
/// feeds every node left without parents.
pub fn random_dag(n: usize, edge_prob: f64, seed: u64) -> CGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = edge_prob.clamp(0.0, 1.0);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);

    let mut b = GraphBuilder::new();
    let source = b.node(SOURCE_LABEL);
    let ids: Vec<NodeId> = (0..n).map(|i| b.node(&format!("v{i}"))).collect();
    let mut has_parent = vec![false; n];
    let mut edges = Vec::new();
    for a in 0..n {
        for c in a + 1..n {
            if rng.random::<f64>() < p {
                edges.push((perm[a], perm[c]));
                has_parent[perm[c]] = true;
            }
        }
    }
    for i in 0..n {
        if !has_parent[i] {
            b.add_edge_ids(source, ids[i]).expect("fresh edge");
        }
    }
    for (u, v) in edges {
        b.add_edge_ids(ids[u], ids[v]).expect("fresh edge");
    }
    b.build_with_sources(vec![source])
}

/// Uniform random recursive tree on `n` nodes under a source; the root is
/// always source-fed and every other node gets a direct source edge with
/// probability `source_edge_prob`.
pub fn random_ctree(n: usize, source_edge_prob: f64, seed: u64) -> CTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = source_edge_prob.clamp(0.0, 1.0);
    let mut b = GraphBuilder::new();
    let source = b.node(SOURCE_LABEL);
    let ids: Vec<NodeId> = (0..n).map(|i| b.node(&format!("t{i}"))).collect();
    for i in 0..n {
        if i == 0 || rng.random::<f64>() < q {
            b.add_edge_ids(source, ids[i]).expect("fresh edge");
        }
        if i > 0 {
            let parent = rng.random_range(0..i);
            b.add_edge_ids(ids[parent], ids[i]).expect("fresh edge");
        }
    }
    let g = b.build_with_sources(vec![source]);
    CTree::certify(&g).expect("generator builds c-trees")
}
