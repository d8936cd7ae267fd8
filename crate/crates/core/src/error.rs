use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SaliencyError {
    #[error("Q profile has no entries")]
    EmptyProfile,
    #[error("duplicate action `{0}` in Q profile")]
    DuplicateAction(String),
    #[error("non-finite Q value {value} for action `{action}`")]
    NonFiniteQ { action: String, value: f64 },
    #[error("action `{0}` is not present in the profile")]
    UnknownAction(String),
    #[error("original and perturbed profiles share no actions")]
    NoOverlap,
    #[error("no actions besides the selected one; remainder distribution is undefined")]
    DegenerateRemainder,
    #[error("distributions are defined over different actions")]
    SupportMismatch,
    #[error("KL divergence must be non-negative, got {0}")]
    NegativeDivergence(f64),
    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
}
