//! Filter selection algorithms.

mod greedy;
mod random;
mod tree_dp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CGraph, NodeId};

pub use greedy::{greedy_1, greedy_all, greedy_l, greedy_max, optimal_unbounded};
pub use random::{rand_w_weight, randomized_baseline, RandomVariant};
pub use tree_dp::{tree_dp, CTree, TreeDpOutcome};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    #[serde(rename = "greedy-1")]
    Greedy1,
    GreedyAll,
    GreedyMax,
    #[serde(rename = "greedy-l")]
    GreedyL,
    TreeDp,
    OptimalUnbounded,
    RandK,
    RandI,
    RandW,
    Oracle,
    /// Filters supplied by the caller.
    Given,
}

impl Algorithm {
    pub const ALL: [Algorithm; 11] = [
        Algorithm::Greedy1,
        Algorithm::GreedyAll,
        Algorithm::GreedyMax,
        Algorithm::GreedyL,
        Algorithm::TreeDp,
        Algorithm::OptimalUnbounded,
        Algorithm::RandK,
        Algorithm::RandI,
        Algorithm::RandW,
        Algorithm::Oracle,
        Algorithm::Given,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy1 => "greedy-1",
            Algorithm::GreedyAll => "greedy-all",
            Algorithm::GreedyMax => "greedy-max",
            Algorithm::GreedyL => "greedy-l",
            Algorithm::TreeDp => "tree-dp",
            Algorithm::OptimalUnbounded => "optimal-unbounded",
            Algorithm::RandK => "rand-k",
            Algorithm::RandI => "rand-i",
            Algorithm::RandW => "rand-w",
            Algorithm::Oracle => "oracle",
            Algorithm::Given => "given",
        }
    }

    pub fn is_randomized(self) -> bool {
        self.random_variant().is_some()
    }

    pub fn random_variant(self) -> Option<RandomVariant> {
        match self {
            Algorithm::RandK => Some(RandomVariant::RandK),
            Algorithm::RandI => Some(RandomVariant::RandI),
            Algorithm::RandW => Some(RandomVariant::RandW),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm `{s}`")))
    }
}

/// Chosen filter nodes, in selection order, plus how they were chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSet {
    pub members: Vec<NodeId>,
    pub algorithm: Algorithm,
    pub k_requested: usize,
    pub seed: Option<u64>,
}

impl FilterSet {
    pub fn new(members: Vec<NodeId>, algorithm: Algorithm, k_requested: usize) -> Self {
        FilterSet {
            members,
            algorithm,
            k_requested,
            seed: None,
        }
    }

    /// Caller-supplied filters, resolved by label. Duplicates are collapsed.
    pub fn from_labels<S: AsRef<str>>(g: &CGraph, labels: &[S]) -> Result<Self> {
        let mut members: Vec<NodeId> = Vec::with_capacity(labels.len());
        for l in labels {
            let v = g.resolve(l.as_ref())?;
            if !members.contains(&v) {
                members.push(v);
            }
        }
        let k = members.len();
        Ok(FilterSet::new(members, Algorithm::Given, k))
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.contains(&v)
    }

    /// Members in ascending index order.
    pub fn sorted(&self) -> Vec<NodeId> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m
    }

    pub fn labels<'g>(&self, g: &'g CGraph) -> Vec<&'g str> {
        self.members.iter().map(|&v| g.label(v)).collect()
    }
}

/// Run any selection algorithm by name. `seed` is used only by the
/// randomized baselines; `Oracle` uses the default subset budget.
pub fn place(g: &CGraph, algorithm: Algorithm, k: usize, seed: u64) -> Result<FilterSet> {
    match algorithm {
        Algorithm::Greedy1 => Ok(greedy_1(g, k)),
        Algorithm::GreedyAll => greedy_all(g, k),
        Algorithm::GreedyMax => greedy_max(g, k),
        Algorithm::GreedyL => greedy_l(g, k),
        Algorithm::TreeDp => Ok(tree_dp(&CTree::certify(g)?, k).filters),
        Algorithm::OptimalUnbounded => Ok(optimal_unbounded(g)),
        Algorithm::RandK | Algorithm::RandI | Algorithm::RandW => {
            let variant = algorithm.random_variant().expect("randomized");
            Ok(randomized_baseline(g, k, variant, seed))
        }
        Algorithm::Oracle => {
            let out = crate::eval::oracle(g, k, crate::eval::DEFAULT_ORACLE_BUDGET)?;
            Ok(out.filters)
        }
        Algorithm::Given => Err(Error::InvalidConfig(
            "`given` is not a selection algorithm".into(),
        )),
    }
}

/// Sort candidates by descending score, ties by ascending index, keep `k`.
pub(crate) fn top_k<S: Ord>(mut scored: Vec<(NodeId, S)>, k: usize) -> Vec<NodeId> {
    scored.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().take(k).map(|(v, _)| v).collect()
}
