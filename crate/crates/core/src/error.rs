use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate edge {from} -> {to}")]
    DuplicateEdge {
        line: usize,
        from: String,
        to: String,
    },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: String },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("graph contains a cycle: {}", .cycle.join(" -> "))]
    CycleDetected { cycle: Vec<String> },

    #[error("every node has an incoming edge and no source was named")]
    NoSource,

    #[error("expected a single source, found {0}; add a super-source first")]
    MultipleSources(usize),

    #[error("node `{0}` is already a filter")]
    AlreadyFilter(String),

    #[error("not a c-tree: {0}")]
    NotACTree(String),

    #[error("exhaustive search needs {subsets} subsets, budget is {budget}")]
    BudgetExceeded { subsets: u128, budget: u128 },

    #[error("root node `{0}` not found")]
    RootNotFound(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
