use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("removing lines {lines:?} disconnects the network")]
    IslandedNetwork { lines: Vec<usize> },

    #[error("reduced susceptance matrix is singular")]
    SingularMatrix,

    #[error("total contingency probability {total} exceeds 1")]
    ProbabilityMassExceeded { total: f64 },

    #[error("invalid contingency: {0}")]
    InvalidContingency(String),

    #[error("risk parameter alpha must lie in [0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("simplex did not terminate within {0} iterations")]
    CyclingDetected(usize),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("{0} problem is infeasible")]
    Infeasible(String),

    #[error("{0} problem is unbounded")]
    Unbounded(String),

    #[error("solution carries no {0} multipliers")]
    MissingDuals(&'static str),

    #[error("pricing guarantee violated: {0}")]
    TheoremViolation(String),

    #[error("LP cannot be decomposed: {0}")]
    NotDecomposable(String),

    #[error("subproblem for scenario {0} is unbounded")]
    SubproblemUnbounded(usize),

    #[error("Benders decomposition hit the iteration limit ({iterations})")]
    IterationLimit {
        iterations: usize,
        trace: Box<crate::benders::BendersTrace>,
    },

    #[error("objective mismatch between methods: {0}")]
    ObjectiveMismatch(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    #[error("unsupported case schema version {0}")]
    UnsupportedSchemaVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
