//! Filter placement for redundant message propagation in directed graphs.
//!
//! Every node of a communication graph relays each item it receives to all
//! of its out-neighbors, so items reaching a node along several paths arrive
//! several times. A filter node forwards at most one copy. This crate counts
//! the resulting multiplicity exactly and chooses filter sets of size `k`
//! that remove as much of it as possible.

pub mod cli;
pub mod dag_extract;
pub mod error;
pub mod eval;
pub mod graph;
pub mod path_stats;
pub mod placement;
pub mod propagation;
pub mod synth;

pub use dag_extract::{best_dag, extract_dag, extract_dag_from};
pub use error::{Error, Result};
pub use eval::{filter_ratio, fr_curve, oracle, CurveOptions, FrCurve, Ratio};
pub use graph::{
    add_super_source, parse_edge_list, topological_order, CGraph, GraphBuilder, NodeId,
};
pub use path_stats::{compute_stats, impact, PathStats};
pub use placement::{place, Algorithm, CTree, FilterSet};
pub use propagation::{objective_f, phi_total, Count, Propagator};
pub use synth::{layered_graph, random_ctree, random_dag, LayeredConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
