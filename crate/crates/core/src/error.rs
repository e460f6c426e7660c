use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("line {line}: inadmissible equation, left-hand side `{lhs}` is not an ordinary functional term")]
    InadmissibleEquation { line: usize, lhs: String },

    #[error("line {line}: summands of a sum head must share one time term")]
    MixedSumTime { line: usize },

    #[error("line {line}: rule is not range-restricted, variable {var} does not occur in a positive body atom")]
    NotRangeRestricted { line: usize, var: String },

    #[error("query: {0}")]
    Query(String),

    #[error("sort error: {0}")]
    Sort(String),

    #[error("division by zero in `{0}`")]
    DivisionByZero(String),

    #[error("line {line}: not time-constrained: `{rule}` ({reason})")]
    NotTimeConstrained {
        line: usize,
        rule: String,
        reason: String,
    },

    #[error("not SBTP: negation cycle through {{{0}}}")]
    NegationCycle(String),

    #[error("unknown predicate {0}")]
    UnknownPredicate(String),

    #[error("floundering: interpreted atom `{0}` is not ground when evaluated")]
    Flounder(String),

    #[error("positive cycle in the ground program through `{0}`")]
    GroundCycle(String),

    #[error("invalid head probabilities in `{rule}`: {reason}")]
    HeadProbability { rule: String, reason: String },

    #[error("empty distribution list in `{0}`")]
    EmptyDistribution(String),

    #[error("atom `{0}` is both a probabilistic fact and defined otherwise")]
    FactConflict(String),

    #[error("oracle enumeration guard exceeded: {0} relevant probabilistic facts (limit {1})")]
    OracleGuard(usize, usize),

    #[error("admissibility violation: model contains `{0}` and `{1}`")]
    Admissibility(String, String),

    #[error("query literal `{0}` is not ground")]
    NonGroundQuery(String),

    #[error("evidence has probability zero")]
    EvidenceZero,

    #[error("{0}")]
    Io(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    /// True for errors caused by broken engine invariants rather than input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}
