use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{value} lies outside {range}")]
    OutOfRange { value: String, range: &'static str },

    #[error("an all-9 period has no canonical form; write the terminating expansion instead")]
    NinesTail,

    #[error("{0} is not a decimal digit")]
    InvalidDigit(u8),

    #[error("period must contain at least one digit")]
    EmptyPeriod,

    #[error("interval ({lo}, {hi}) is empty")]
    EmptyInterval { lo: String, hi: String },

    #[error("malformed fraction {0:?}")]
    ParseFraction(String),

    #[error("malformed digit expansion {0:?}")]
    ParseDigits(String),

    #[error("invalid reorder spec: {0}")]
    Reorder(String),

    #[error("invalid enumeration spec: {0}")]
    EnumerationSpec(String),

    #[error("duplicate enumeration element {0}")]
    DuplicateElement(String),

    #[error("integer overflow in the backing integer type")]
    Overflow,

    #[error("rows {first} and {second} agree on the 64-digit probe")]
    DuplicateRows { first: usize, second: usize },

    #[error("row source exhausted before row {0}")]
    RowsExhausted(usize),

    #[error("window {requested} exceeds table window {available}")]
    Window { requested: usize, available: usize },

    #[error("invalid antidiagonal rule: {0}")]
    AntidiagonalRule(String),

    #[error("replay diverges from the recorded table at row {0}")]
    ReplayMismatch(usize),

    #[error("{0}")]
    Domain(String),
}
