//! Specific and relevant feature attribution (SARFA) for black-box agents.
//!
//! The crate is purely numerical: it takes Q-value profiles of an agent at an
//! original state and at a perturbed state and turns them into a saliency
//! score for the perturbed feature. Domain crates decide what a feature is and
//! how to perturb it; agents are reached through [`QOracle`].

pub mod baselines;
pub mod combine;
mod error;
pub mod method;
pub mod oracle;
pub mod pool;
pub mod profile;
pub mod saliency;

pub use baselines::{
    baseline_greydanus, baseline_iyer, derive_policy_value, GreydanusMode, DEFAULT_TEMPERATURE,
};
pub use combine::{combine, Combiner};
pub use error::SaliencyError;
pub use method::{score_feature, Method};
pub use oracle::{FnOracle, QOracle};
pub use pool::{map_with_pool, Lease, SessionPool};
pub use profile::{ActionDistribution, PolicyValueProfile, QProfile};
pub use saliency::{
    kl_divergence, rem_distribution, restrict_to_common_actions, sarfa_score, sarfa_score_with,
    similarity, softmax_selected, FeatureStatus, Restricted, ScoreBreakdown,
};
