use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::SaliencyError;

/// Expected return per legal action of an agent at one state.
///
/// Entries keep the order in which the agent reported them. Action ids are
/// unique, the profile is never empty and every value is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct QProfile {
    state_id: String,
    entries: Vec<(String, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    state_id: String,
    entries: Vec<(String, f64)>,
}

impl TryFrom<RawProfile> for QProfile {
    type Error = SaliencyError;

    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        QProfile::new(raw.state_id, raw.entries)
    }
}

impl From<QProfile> for RawProfile {
    fn from(p: QProfile) -> Self {
        RawProfile {
            state_id: p.state_id,
            entries: p.entries,
        }
    }
}

impl QProfile {
    pub fn new<S, A>(state_id: S, entries: impl IntoIterator<Item = (A, f64)>) -> Result<Self, SaliencyError>
    where
        S: Into<String>,
        A: Into<String>,
    {
        let entries: Vec<(String, f64)> = entries.into_iter().map(|(a, q)| (a.into(), q)).collect();
        if entries.is_empty() {
            return Err(SaliencyError::EmptyProfile);
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for (action, q) in &entries {
            if !q.is_finite() {
                return Err(SaliencyError::NonFiniteQ {
                    action: action.clone(),
                    value: *q,
                });
            }
            if !seen.insert(action.as_str()) {
                return Err(SaliencyError::DuplicateAction(action.clone()));
            }
        }
        Ok(QProfile {
            state_id: state_id.into(),
            entries,
        })
    }

    pub fn state_id(&self) -> &str {
        &self.state_id
    }

    pub fn with_state_id(mut self, state_id: impl Into<String>) -> Self {
        self.state_id = state_id.into();
        self
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false for a constructed profile; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, action: &str) -> Option<f64> {
        self.entries.iter().find(|(a, _)| a == action).map(|(_, q)| *q)
    }

    pub fn contains(&self, action: &str) -> bool {
        self.entries.iter().any(|(a, _)| a == action)
    }

    pub fn actions(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(a, _)| a.as_str())
    }

    pub fn max_q(&self) -> f64 {
        self.entries.iter().map(|(_, q)| *q).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Action with the highest Q value; the first reported wins ties.
    pub fn best_action(&self) -> &str {
        let mut best = &self.entries[0];
        for entry in &self.entries[1..] {
            if entry.1 > best.1 {
                best = entry;
            }
        }
        &best.0
    }

    /// Keeps only the entries accepted by `keep`, preserving order. Returns
    /// `None` when nothing survives.
    pub(crate) fn filtered(&self, mut keep: impl FnMut(&str) -> bool) -> Option<QProfile> {
        let entries: Vec<_> = self.entries.iter().filter(|(a, _)| keep(a)).cloned().collect();
        if entries.is_empty() {
            None
        } else {
            Some(QProfile {
                state_id: self.state_id.clone(),
                entries,
            })
        }
    }
}

/// Probability distribution over actions produced by a softmax; strictly
/// positive and normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDistribution {
    probs: Vec<(String, f64)>,
}

impl ActionDistribution {
    const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new<A: Into<String>>(probs: impl IntoIterator<Item = (A, f64)>) -> Result<Self, SaliencyError> {
        let probs: Vec<(String, f64)> = probs.into_iter().map(|(a, p)| (a.into(), p)).collect();
        if probs.is_empty() {
            return Err(SaliencyError::InvalidDistribution("empty support".into()));
        }
        let mut seen = HashSet::new();
        let mut total = 0.0;
        for (action, p) in &probs {
            if !(p.is_finite() && *p > 0.0 && *p <= 1.0) {
                return Err(SaliencyError::InvalidDistribution(format!(
                    "probability {p} for `{action}` outside (0, 1]"
                )));
            }
            if !seen.insert(action.as_str()) {
                return Err(SaliencyError::DuplicateAction(action.clone()));
            }
            total += p;
        }
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(SaliencyError::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(ActionDistribution { probs })
    }

    /// Softmax of `values / temperature` with max-subtraction.
    pub(crate) fn softmax(values: &[(String, f64)], temperature: f64) -> ActionDistribution {
        debug_assert!(!values.is_empty());
        let max = values.iter().map(|(_, q)| *q).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = values.iter().map(|(_, q)| ((q - max) / temperature).exp()).collect();
        let total: f64 = weights.iter().sum();
        let probs = values
            .iter()
            .zip(weights)
            .map(|((a, _), w)| (a.clone(), w / total))
            .collect();
        ActionDistribution { probs }
    }

    pub fn probs(&self) -> &[(String, f64)] {
        &self.probs
    }

    pub fn prob(&self, action: &str) -> Option<f64> {
        self.probs.iter().find(|(a, _)| a == action).map(|(_, p)| *p)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Policy and state value derived from a Q profile, as consumed by the
/// policy/value baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyValueProfile {
    pub policy: ActionDistribution,
    pub value: f64,
}
