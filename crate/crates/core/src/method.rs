use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{baseline_greydanus, baseline_iyer, derive_policy_value, GreydanusMode};
use crate::combine::Combiner;
use crate::profile::QProfile;
use crate::saliency::{restrict_to_common_actions, sarfa_score_with, FeatureStatus, ScoreBreakdown};
use crate::SaliencyError;

/// A saliency method applicable to a pair of Q profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Sarfa(Combiner),
    Iyer,
    GreydanusPolicy,
    GreydanusValue,
}

impl Method {
    /// SARFA, its combiner ablations and the three baselines.
    pub const ABLATION: [Method; 9] = [
        Method::Sarfa(Combiner::Harmonic),
        Method::Sarfa(Combiner::DpOnly),
        Method::Sarfa(Combiner::KOnly),
        Method::Sarfa(Combiner::ArithmeticMean),
        Method::Sarfa(Combiner::GeometricMean),
        Method::Sarfa(Combiner::Minimum),
        Method::Iyer,
        Method::GreydanusPolicy,
        Method::GreydanusValue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sarfa(Combiner::Harmonic) => "sarfa",
            Method::Sarfa(c) => c.name(),
            Method::Iyer => "iyer",
            Method::GreydanusPolicy => "greydanus_policy",
            Method::GreydanusValue => "greydanus_value",
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Method::Sarfa(Combiner::Harmonic)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sarfa" | "harmonic" => Ok(Method::Sarfa(Combiner::Harmonic)),
            "iyer" => Ok(Method::Iyer),
            "greydanus_policy" => Ok(Method::GreydanusPolicy),
            "greydanus_value" => Ok(Method::GreydanusValue),
            other => other
                .parse::<Combiner>()
                .map(Method::Sarfa)
                .map_err(|_| format!("unknown method `{other}`")),
        }
    }
}

impl TryFrom<String> for Method {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> Self {
        m.name().to_owned()
    }
}

/// Scores one perturbation with `method`. `temperature` only affects the
/// policy baseline. The returned `feature_id` is the perturbed profile's
/// state id.
pub fn score_feature(
    method: Method,
    q_orig: &QProfile,
    q_pert: &QProfile,
    selected: &str,
    temperature: f64,
) -> Result<ScoreBreakdown, SaliencyError> {
    if !q_orig.contains(selected) {
        return Err(SaliencyError::UnknownAction(selected.to_owned()));
    }
    let feature_id = q_pert.state_id();
    let scored = |score: f64| ScoreBreakdown {
        feature_id: feature_id.to_owned(),
        delta_p: None,
        kl: None,
        k_sim: None,
        score,
        status: FeatureStatus::Scored,
    };
    match method {
        Method::Sarfa(combiner) => sarfa_score_with(q_orig, q_pert, selected, combiner),
        Method::Iyer => {
            if !q_pert.contains(selected) {
                return Ok(ScoreBreakdown::skipped(feature_id, FeatureStatus::ActionRemoved));
            }
            Ok(scored(baseline_iyer(q_orig, q_pert, selected)?))
        }
        Method::GreydanusPolicy => {
            let restricted = match restrict_to_common_actions(q_orig, q_pert, selected) {
                Ok(r) => r,
                Err(SaliencyError::NoOverlap) => {
                    return Ok(ScoreBreakdown::skipped(feature_id, FeatureStatus::SkippedNoOverlap));
                }
                Err(e) => return Err(e),
            };
            let before = derive_policy_value(&restricted.original, temperature)?;
            let after = derive_policy_value(&restricted.perturbed, temperature)?;
            Ok(scored(baseline_greydanus(&before, &after, GreydanusMode::Policy)?))
        }
        Method::GreydanusValue => {
            let before = derive_policy_value(q_orig, temperature)?;
            let after = derive_policy_value(q_pert, temperature)?;
            Ok(scored(baseline_greydanus(&before, &after, GreydanusMode::Value)?))
        }
    }
}
