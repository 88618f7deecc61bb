use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("clause {clause} (line {line}) has {len} literals; at most 3 are allowed")]
    ClauseTooLong {
        clause: usize,
        line: usize,
        len: usize,
    },

    #[error("clause {clause} (line {line}) is a tautology: contains x{var} and its negation")]
    Tautology {
        clause: usize,
        line: usize,
        var: u32,
    },

    #[error("line {line}: variable {var} outside 1..={n}")]
    VariableOutOfRange { line: usize, var: u32, n: u32 },

    #[error("invalid clause: {0}")]
    InvalidClause(String),

    #[error("formula has no clauses")]
    NoClauses,

    #[error("cannot transition out of terminal state {0}")]
    TerminalState(String),

    #[error("stage {h} outside 1..={max}")]
    StageOutOfRange { h: usize, max: usize },

    #[error("{what}: n = {n} exceeds the exhaustive cap {cap}")]
    CapExceeded {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
