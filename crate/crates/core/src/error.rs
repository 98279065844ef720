use thiserror::Error;

/// Errors raised by constructors and maps in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid group table: {reason}")]
    InvalidTable {
        reason: String,
        triple: Option<(usize, usize, usize)>,
    },
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("subgroup is not normal: {member} conjugated by {by} leaves it")]
    NotNormal { member: usize, by: usize },
    #[error("invalid cross-section: {0}")]
    InvalidSection(String),
    #[error("invalid module data: {0}")]
    InvalidModule(String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("invalid flow module: {0}")]
    InvalidFlow(String),
    #[error("action of element {element} does not preserve Im(theta - 1)")]
    ActionNotDescending { element: usize },
    #[error("budget exceeded for {what}: need {needed}, limit {limit}")]
    BudgetExceeded {
        what: String,
        needed: u128,
        limit: u128,
    },
    #[error("cochain is not a cocycle, first failure at {tuple:?}")]
    NotACocycle { tuple: Vec<usize> },
    #[error("window cochain does not vanish on the flow part at {tuple:?}")]
    NotNormalizedOnFlow { tuple: Vec<i64> },
    #[error("invalid standard cochain: {0}")]
    InvalidStandard(String),
    #[error("invalid characteristic cocycle: {axiom} fails at {witness:?}")]
    InvalidCharacteristic {
        axiom: &'static str,
        witness: Vec<usize>,
    },
    #[error("perturbing cocycle is not a torus-valued 2-cocycle: {0}")]
    InvalidXi(String),
    #[error("flow part at {element} is not a theta-coboundary")]
    FlowPartNotCobounding { element: usize },
    #[error("cochain does not cobound the pulled-back cocycle at {tuple:?}")]
    NotCobounding { tuple: Vec<usize> },
    #[error("characteristic cocycle is not in Z(H~, L, M, A): {0}")]
    NotInZLM(String),
    #[error("fiber condition fails at ({q}, {r})")]
    FiberViolated { q: usize, r: usize },
    #[error("value at {tuple:?} is not in the torus")]
    TorusCoercionFailed { tuple: Vec<usize> },
    #[error("sections are not compatible: {0}")]
    SectionMismatch(String),
    #[error("obstructions live over different contexts: {0}")]
    ContextMismatch(String),
    #[error("k * w is not zero in H1 (k = {k}, w = {w})")]
    IncompatibleModulus { k: usize, w: usize },
    #[error("invalid obstruction: {0}")]
    InvalidObstruction(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("exactness violated: {0}")]
    ExactnessViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
