use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node id {id} out of range for graph with {n} nodes")]
    NodeOutOfRange { id: u64, n: usize },
    #[error("self-loop ({0}, {0}) is not allowed")]
    SelfLoop(NodeId),
    #[error("pair ({0}, {1}) is already an arc of the graph")]
    AlreadyArc(NodeId, NodeId),
    #[error("pair ({0}, {1}) appears more than once")]
    DuplicatePair(NodeId, NodeId),
    #[error("pair ({0}, {1}) is not an admissible non-edge")]
    NotNonEdge(NodeId, NodeId),
    #[error("weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("edge addition has {len} edges but budget is {budget}")]
    BudgetExceeded { len: usize, budget: usize },
    #[error("community {0} is empty")]
    EmptyCommunity(usize),
    #[error("{what}: {size} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("instance is not deterministic (some weight is strictly between 0 and 1)")]
    NotDeterministic,
    #[error("rr index fingerprint {index:#x} does not match graph fingerprint {graph:#x}")]
    FingerprintMismatch { index: u64, graph: u64 },
    #[error("edge ({0}, {1}) was already applied to the rr index")]
    EdgeAlreadyApplied(NodeId, NodeId),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by a size cap rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self.root(), Error::CapExceeded { .. })
    }

    /// The underlying error, without line context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn at_line(self, line: usize) -> Error {
        Error::AtLine {
            line,
            source: Box::new(self),
        }
    }
}
