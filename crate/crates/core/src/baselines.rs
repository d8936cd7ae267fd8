//! Baselines from earlier perturbation-saliency work: the raw Q difference of
//! the explained action, and half squared differences of the policy vector or
//! of the state value.

use serde::{Deserialize, Serialize};

use crate::profile::{ActionDistribution, PolicyValueProfile, QProfile};
use crate::SaliencyError;

pub const DEFAULT_TEMPERATURE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreydanusMode {
    Policy,
    Value,
}

/// `Q(s, a) - Q(s', a)`; sign is preserved.
pub fn baseline_iyer(q_orig: &QProfile, q_pert: &QProfile, selected: &str) -> Result<f64, SaliencyError> {
    let before = q_orig
        .get(selected)
        .ok_or_else(|| SaliencyError::UnknownAction(selected.to_owned()))?;
    let after = q_pert
        .get(selected)
        .ok_or_else(|| SaliencyError::UnknownAction(selected.to_owned()))?;
    Ok(before - after)
}

pub fn baseline_greydanus(
    pv_orig: &PolicyValueProfile,
    pv_pert: &PolicyValueProfile,
    which: GreydanusMode,
) -> Result<f64, SaliencyError> {
    match which {
        GreydanusMode::Value => {
            let d = pv_orig.value - pv_pert.value;
            Ok(0.5 * d * d)
        }
        GreydanusMode::Policy => {
            let (a, b) = (&pv_orig.policy, &pv_pert.policy);
            if a.len() != b.len() {
                return Err(SaliencyError::SupportMismatch);
            }
            let mut sq = 0.0;
            for (action, p) in a.probs() {
                let p2 = b.prob(action).ok_or(SaliencyError::SupportMismatch)?;
                sq += (p - p2) * (p - p2);
            }
            Ok(0.5 * sq)
        }
    }
}

/// Policy as a tempered softmax over Q and value as the greedy maximum, for
/// agents that only expose Q values.
pub fn derive_policy_value(q: &QProfile, temperature: f64) -> Result<PolicyValueProfile, SaliencyError> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(SaliencyError::InvalidTemperature(temperature));
    }
    Ok(PolicyValueProfile {
        policy: ActionDistribution::softmax(q.entries(), temperature),
        value: q.max_q(),
    })
}
