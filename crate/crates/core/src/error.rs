use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("table has no identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(String),
    #[error("multiplication is not associative on ({0}, {1}, {2})")]
    NonAssociative(String, String, String),
    #[error("power group of order {order} exceeds the limit {limit}")]
    PowerTooLarge { order: u128, limit: u128 },
    #[error("map is not a homomorphism: witness pair ({0}, {1})")]
    NotHomomorphism(String, String),
    #[error("pattern shapes or groups do not match")]
    ShapeMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("alphabet is not a power group")]
    NotPowerAlphabet,
    #[error("forbidden pattern does not fit the target domain")]
    DomainTooSmall,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("local rule is not a group homomorphism: witness pair {0} / {1}")]
    NotGroupHom(String, String),
    #[error("image leaves the shift: forbidden pattern {0} appears")]
    NotEndomorphism(String),
    #[error("local rule is incomplete: {0}")]
    IncompleteRule(String),
    #[error("operation requires a one-dimensional shift")]
    NotOneDimensional,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("empty automaton")]
    EmptyAutomaton,
    #[error("configuration is not in the shift")]
    ConfigNotInShift,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded(_) | Error::PowerTooLarge { .. })
    }
}
