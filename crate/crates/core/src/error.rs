use thiserror::Error;

pub type Result<T> = std::result::Result<T, GptError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GptError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cone is not pointed (contains a line)")]
    NotPointed,

    #[error("cone is not generating (rays span a proper subspace)")]
    NotGenerating,

    #[error("degenerate constraint system: {0}")]
    Degenerate(String),

    #[error("order unit is not strictly positive on ray {0}")]
    UnitNotStrictlyPositive(usize),

    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),

    #[error("observable does not distinguish the given states: {0}")]
    ObservableMismatch(String),

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("vertex {0} is not an exposed point")]
    NotExposed(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("correction map is not a positive norm-contractive map: {0}")]
    CorrectionNotContractive(String),

    #[error("maps do not form a group: {0}")]
    NotAGroup(String),

    #[error("group does not act transitively on pure states")]
    NotTransitive,

    #[error("state operator is not a G-equivariant order isomorphism: {0}")]
    NotEquivariant(String),

    #[error("effects do not form an observable: {0}")]
    NotObservable(String),

    #[error("{0} is not available in exact mode")]
    NotRational(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),
}
