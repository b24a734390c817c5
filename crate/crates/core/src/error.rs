use thiserror::Error;

use crate::instance::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("pruning set {set:?} must have {expected} distinct markings drawn from the graph")]
    BadPruning { set: Vec<usize>, expected: usize },

    #[error("bipartite graph is unbalanced ({left} left vs {right} right vertices)")]
    Unbalanced { left: usize, right: usize },

    #[error("transversal level must be at least 1")]
    ZeroLevel,

    #[error("instance has no constraints")]
    NoConstraints,

    #[error("{0} is not a prime below 2^31")]
    InvalidPrime(u64),

    #[error("matrix is {rows}x{cols}, not square")]
    NonSquare { rows: usize, cols: usize },

    #[error("need at least {r} points in P^{}, got {count}", .r - 1)]
    TooFewPoints { r: usize, count: usize },

    #[error("no linearly general configuration of {count} points in P^{} found over F_{p}", .r - 1)]
    SamplingFailed { r: usize, count: usize, p: u64 },

    #[error("minor vanishes on a configuration assumed to be general")]
    DegenerateMinor,

    #[error("empty neighbourhood for marking {0}")]
    EmptyNeighbourhood(usize),

    #[error("polynomial ring supports at most {max} variables, {requested} requested")]
    TooManyVariables { requested: usize, max: usize },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("instance admits no reduction step (no marking common to every constraint, or r = 2)")]
    NotReducible,

    #[error("inconclusive count: {0}")]
    Inconclusive(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
