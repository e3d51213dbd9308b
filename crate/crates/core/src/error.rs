use thiserror::Error;

use crate::structure::Elem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("tuple arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("element {elem} out-of-range for sort `{sort}`")]
    OutOfRange { elem: Elem, sort: String },
    #[error("syntax error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("free variable not declared: `{0}`")]
    UndeclaredVariable(String),
    #[error("missing assignment for variable `{0}`")]
    MissingAssignment(String),
    #[error("set of {size} tuples exceeds level cap {cap}")]
    LevelCap { size: usize, cap: usize },
    #[error("tuple {0:?} is not in P_1")]
    NotInP1(Vec<Elem>),
    #[error("base set is not complete: {0}")]
    NotComplete(String),
    #[error("tuple set is not contained in P_{0}")]
    NotInLevel(usize),
    #[error("search region is empty")]
    EmptyRegion,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource budget exceeded: {0}")]
    ResourceBudget(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    /// True for errors caused by exhausting a configured search or memory budget.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceBudget(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
