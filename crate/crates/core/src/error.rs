use thiserror::Error;

use crate::graph::Edge;

/// Errors raised by the rigidity library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate arc ({0}, {1})")]
    DuplicateArc(usize, usize),

    #[error("edge {0} is both simple and double")]
    OverlappingEdgeSets(Edge),

    #[error("vertex count mismatch: {left} vs {right}")]
    VertexCountMismatch { left: usize, right: usize },

    #[error("agents {0} and {1} share the same spatial position")]
    CoincidentPositions(usize, usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("expected dimension {expected}, found {found}")]
    WrongDimension { expected: String, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("framework does not match the expected pattern: {0}")]
    PatternMismatch(String),

    #[error("seed edge set is dependent")]
    DependentSeed,

    #[error("edge pool reaches rank {achieved}, {required} required")]
    InsufficientRank { achieved: usize, required: usize },

    #[error("edge {0} already belongs to the basis")]
    EdgeInBasis(Edge),

    #[error("edge {0} is not in the basis")]
    EdgeNotInBasis(Edge),

    #[error("basis is not minimally rigid: rank {rank} with {edges} edges, {required} required")]
    NotMinimallyRigid {
        rank: usize,
        edges: usize,
        required: usize,
    },

    #[error("edge {wz} does not generate {uv}")]
    NotInCircuit { uv: Edge, wz: Edge },

    #[error("root finder failed: {0}")]
    RootFinding(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(
        "decomposition verdict ({decomposition}) disagrees with numeric rank {rank} / {required}"
    )]
    VerdictMismatch {
        decomposition: bool,
        rank: usize,
        required: usize,
        trace: Box<crate::decompose::DecompositionTrace>,
    },

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
