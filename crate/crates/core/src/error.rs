use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("halfspace has a zero normal vector")]
    ZeroNormal,

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("polyhedron is unbounded in coordinate {coord}")]
    Unbounded { coord: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("witness {0} is not a strict interior point")]
    BadWitness(String),

    #[error("polytope is not full dimensional")]
    NotFullDimensional,

    #[error("no lattice point z with z + (1/2,...,1/2) inside the inflated polytope")]
    EmptyCenters,

    #[error("base graph H is disconnected; use the complete strategy or a Markov basis that connects the centers")]
    DisconnectedBase,

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("no expander with lambda <= {target} after {attempts} attempts (best lambda {best})")]
    ExpanderNotFound {
        target: f64,
        attempts: usize,
        best: f64,
    },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("no relevant vertex reached after {blocks} blocks of {steps} steps")]
    BlocksExhausted { blocks: usize, steps: u64 },

    #[error("design matrix has a zero-dimensional integer kernel")]
    ZeroKernel,

    #[error("A x = b has no rational solution")]
    NoRationalSolution,

    #[error("A x = b has rational but no integer solutions")]
    NoIntegerSolution,

    #[error("vector is not in the integer lattice spanned by the kernel basis")]
    NotInLattice,

    #[error("move is not in the kernel of the design matrix")]
    MoveNotInKernel,

    #[error("table has a negative entry at cell {cell}")]
    NegativeEntry { cell: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line tool: 1 for usage and input
    /// problems, 2 for infeasible or degenerate instances, 3 for spectral
    /// certification failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Json(_) => 1,
            Error::ExpanderNotFound { .. }
            | Error::Certification(_)
            | Error::BlocksExhausted { .. } => 3,
            _ => 2,
        }
    }
}
