use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ballot: unknown candidate {0:?}")]
    UnknownCandidate(String),

    #[error("invalid ballot: candidate index {index} out of range for {candidates} candidates")]
    CandidateOutOfRange { index: usize, candidates: usize },

    #[error("candidate {0:?} listed more than once")]
    DuplicateCandidate(String),

    #[error("length mismatch for {field}: expected {expected}, found {found}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid election: {0}")]
    InvalidElection(String),

    #[error("winners_lex requires a lexicographic tie-break rule")]
    NotLexicographic,

    #[error("utility for candidate #{0} is not a finite number")]
    NonFiniteUtility(usize),

    #[error(
        "take-x-best needs {min} <= X <= {max} (X must be at least 1 and, in strict mode, \
         fewer than the number of positive-utility candidates); got X = {x}"
    )]
    XOutOfRange { x: usize, min: usize, max: usize },

    #[error("threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),

    #[error("invalid probability {0:?}: expected a decimal in [0, 1]")]
    InvalidProbability(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unknown scenario {0:?}")]
    ScenarioNotFound(String),

    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
