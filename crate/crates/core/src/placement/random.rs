use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Algorithm, FilterSet};
use crate::graph::{CGraph, NodeId};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RandomVariant {
    /// `k` distinct nodes, uniformly.
    RandK,
    /// Each node independently with probability `k / n`.
    RandI,
    /// Each node independently with probability `w(v) · k / n`, clamped.
    RandW,
}

impl fmt::Display for RandomVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RandomVariant::RandK => "rand-k",
            RandomVariant::RandI => "rand-i",
            RandomVariant::RandW => "rand-w",
        })
    }
}

/// `w(v) = Σ_{u child of v} 1 / d_in(u)`.
pub fn rand_w_weight(g: &CGraph, v: NodeId) -> f64 {
    g.out_neighbors(v)
        .iter()
        .map(|&u| 1.0 / g.in_degree(u) as f64)
        .sum()
}

/// Randomized baselines over the non-source nodes; `n` is their count.
/// Results depend only on the graph, `k`, the variant and `seed`.
pub fn randomized_baseline(g: &CGraph, k: usize, variant: RandomVariant, seed: u64) -> FilterSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible = g.eligible();
    let n = eligible.len();
    let members: Vec<NodeId> = match variant {
        RandomVariant::RandK => {
            let mut picked: Vec<NodeId> = sample(&mut rng, n, k.min(n))
                .into_iter()
                .map(|i| eligible[i])
                .collect();
            picked.sort_unstable();
            picked
        }
        RandomVariant::RandI => {
            let p = if n == 0 {
                0.0
            } else {
                (k as f64 / n as f64).min(1.0)
            };
            eligible
                .iter()
                .copied()
                .filter(|_| rng.random::<f64>() < p)
                .collect()
        }
        RandomVariant::RandW => {
            let scale = if n == 0 { 0.0 } else { k as f64 / n as f64 };
            eligible
                .iter()
                .copied()
                .filter(|&v| {
                    let p = (rand_w_weight(g, v) * scale).clamp(0.0, 1.0);
                    rng.random::<f64>() < p
                })
                .collect()
        }
    };
    let algorithm = match variant {
        RandomVariant::RandK => Algorithm::RandK,
        RandomVariant::RandI => Algorithm::RandI,
        RandomVariant::RandW => Algorithm::RandW,
    };
    FilterSet {
        members,
        algorithm,
        k_requested: k,
        seed: Some(seed),
    }
}
