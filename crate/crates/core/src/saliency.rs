//! Specificity (change in the softmax probability of the explained action),
//! relevance (similarity of the distribution over the remaining actions) and
//! their combination into a per-feature saliency score.

use serde::{Deserialize, Serialize};

use crate::combine::{combine, Combiner};
use crate::profile::{ActionDistribution, QProfile};
use crate::SaliencyError;

/// Outcome category of scoring one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureStatus {
    Scored,
    /// The original and perturbed states share no actions.
    SkippedNoOverlap,
    /// The perturbation was rejected by the domain or the agent failed on it.
    SkippedInvalidPerturbation,
    /// The explained action is not available in the perturbed state.
    ActionRemoved,
    /// Only the explained action is common to both states; relevance is taken as 1.
    DegenerateRem,
}

impl FeatureStatus {
    pub fn is_skipped(self) -> bool {
        matches!(self, FeatureStatus::SkippedNoOverlap | FeatureStatus::SkippedInvalidPerturbation)
    }
}

/// Saliency of one feature together with the quantities it was derived from.
///
/// `delta_p`, `kl` and `k_sim` are only present for methods and statuses
/// where they were actually computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub feature_id: String,
    pub delta_p: Option<f64>,
    pub kl: Option<f64>,
    pub k_sim: Option<f64>,
    pub score: f64,
    pub status: FeatureStatus,
}

impl ScoreBreakdown {
    pub fn skipped(feature_id: impl Into<String>, status: FeatureStatus) -> Self {
        ScoreBreakdown {
            feature_id: feature_id.into(),
            delta_p: None,
            kl: None,
            k_sim: None,
            score: 0.0,
            status,
        }
    }

    pub fn with_feature(mut self, feature_id: impl Into<String>) -> Self {
        self.feature_id = feature_id.into();
        self
    }
}

/// Both profiles restricted to the actions they have in common, in the order
/// of the original profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Restricted {
    pub original: QProfile,
    pub perturbed: QProfile,
    /// Set when the selected action is absent from the perturbed profile.
    pub selected_removed: bool,
}

pub fn restrict_to_common_actions(
    q_orig: &QProfile,
    q_pert: &QProfile,
    selected: &str,
) -> Result<Restricted, SaliencyError> {
    let original = q_orig
        .filtered(|a| q_pert.contains(a))
        .ok_or(SaliencyError::NoOverlap)?;
    let entries: Vec<(String, f64)> = original
        .actions()
        .map(|a| (a.to_owned(), q_pert.get(a).expect("action is common")))
        .collect();
    let perturbed = QProfile::new(q_pert.state_id(), entries)?;
    Ok(Restricted {
        original,
        perturbed,
        selected_removed: !q_pert.contains(selected),
    })
}

/// Softmax probability of `selected` over every action in `q`.
pub fn softmax_selected(q: &QProfile, selected: &str) -> Result<f64, SaliencyError> {
    let q_sel = q
        .get(selected)
        .ok_or_else(|| SaliencyError::UnknownAction(selected.to_owned()))?;
    let max = q.max_q();
    let total: f64 = q.entries().iter().map(|(_, v)| (v - max).exp()).sum();
    Ok((q_sel - max).exp() / total)
}

/// Softmax over every action except `selected`.
pub fn rem_distribution(q: &QProfile, selected: &str) -> Result<ActionDistribution, SaliencyError> {
    if !q.contains(selected) {
        return Err(SaliencyError::UnknownAction(selected.to_owned()));
    }
    let rest: Vec<(String, f64)> = q.entries().iter().filter(|(a, _)| a != selected).cloned().collect();
    if rest.is_empty() {
        return Err(SaliencyError::DegenerateRemainder);
    }
    Ok(ActionDistribution::softmax(&rest, 1.0))
}

/// `D_KL(p_pert || p_orig)` in nats. Both distributions must cover the same
/// actions; order may differ.
pub fn kl_divergence(p_pert: &ActionDistribution, p_orig: &ActionDistribution) -> Result<f64, SaliencyError> {
    if p_pert.len() != p_orig.len() {
        return Err(SaliencyError::SupportMismatch);
    }
    let mut total = 0.0;
    for (action, p) in p_pert.probs() {
        let q = p_orig.prob(action).ok_or(SaliencyError::SupportMismatch)?;
        total += p * (p / q).ln();
    }
    // Rounding can leave a tiny negative sum for near-identical inputs.
    Ok(total.max(0.0))
}

/// Maps a divergence onto a similarity in (0, 1].
pub fn similarity(kl: f64) -> Result<f64, SaliencyError> {
    if kl.is_nan() || kl < 0.0 {
        return Err(SaliencyError::NegativeDivergence(kl));
    }
    Ok(1.0 / (1.0 + kl))
}

/// Saliency of the feature whose perturbation turned `q_orig` into `q_pert`,
/// for the action `selected`, combined with the harmonic mean.
pub fn sarfa_score(q_orig: &QProfile, q_pert: &QProfile, selected: &str) -> Result<ScoreBreakdown, SaliencyError> {
    sarfa_score_with(q_orig, q_pert, selected, Combiner::Harmonic)
}

/// Same as [`sarfa_score`] with a configurable way of combining the two terms.
///
/// A negative probability drop counts as zero. When the selected action is
/// missing from `q_pert` its perturbed probability is taken as zero and the
/// status is [`FeatureStatus::ActionRemoved`]; when it is the only common
/// action the similarity is taken as 1 and the status is
/// [`FeatureStatus::DegenerateRem`]. The returned `feature_id` is the
/// perturbed profile's state id.
pub fn sarfa_score_with(
    q_orig: &QProfile,
    q_pert: &QProfile,
    selected: &str,
    combiner: Combiner,
) -> Result<ScoreBreakdown, SaliencyError> {
    let q_selected = q_orig
        .get(selected)
        .ok_or_else(|| SaliencyError::UnknownAction(selected.to_owned()))?;
    let feature_id = q_pert.state_id().to_owned();

    let restricted = match restrict_to_common_actions(q_orig, q_pert, selected) {
        Ok(r) => r,
        Err(SaliencyError::NoOverlap) => {
            return Ok(ScoreBreakdown::skipped(feature_id, FeatureStatus::SkippedNoOverlap));
        }
        Err(e) => return Err(e),
    };

    if restricted.selected_removed {
        // The common actions are exactly the surviving alternatives.
        let mut with_selected = restricted.original.entries().to_vec();
        with_selected.push((selected.to_owned(), q_selected));
        let p_orig = softmax_selected(&QProfile::new(q_orig.state_id(), with_selected)?, selected)?;
        let rem_orig = ActionDistribution::softmax(restricted.original.entries(), 1.0);
        let rem_pert = ActionDistribution::softmax(restricted.perturbed.entries(), 1.0);
        let kl = kl_divergence(&rem_pert, &rem_orig)?;
        let k_sim = similarity(kl)?;
        return Ok(ScoreBreakdown {
            feature_id,
            delta_p: Some(p_orig),
            kl: Some(kl),
            k_sim: Some(k_sim),
            score: combine(p_orig, k_sim, combiner),
            status: FeatureStatus::ActionRemoved,
        });
    }

    let delta_p = softmax_selected(&restricted.original, selected)? - softmax_selected(&restricted.perturbed, selected)?;
    let clamped = delta_p.clamp(0.0, 1.0);

    if restricted.original.len() == 1 {
        return Ok(ScoreBreakdown {
            feature_id,
            delta_p: Some(delta_p),
            kl: None,
            k_sim: Some(1.0),
            score: combine(clamped, 1.0, combiner),
            status: FeatureStatus::DegenerateRem,
        });
    }

    let rem_orig = rem_distribution(&restricted.original, selected)?;
    let rem_pert = rem_distribution(&restricted.perturbed, selected)?;
    let kl = kl_divergence(&rem_pert, &rem_orig)?;
    let k_sim = similarity(kl)?;
    Ok(ScoreBreakdown {
        feature_id,
        delta_p: Some(delta_p),
        kl: Some(kl),
        k_sim: Some(k_sim),
        score: combine(clamped, k_sim, combiner),
        status: FeatureStatus::Scored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(entries: &[(&str, f64)]) -> QProfile {
        QProfile::new("s", entries.iter().map(|(a, v)| (*a, *v))).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn restriction_identical_sets() {
        let r = restrict_to_common_actions(&q(&[("a", 1.0), ("b", 0.0)]), &q(&[("a", 2.0), ("b", 1.0)]), "a").unwrap();
        assert_eq!(r.original, q(&[("a", 1.0), ("b", 0.0)]));
        assert_eq!(r.perturbed, q(&[("a", 2.0), ("b", 1.0)]));
        assert!(!r.selected_removed);
    }

    #[test]
    fn restriction_drops_missing_selected() {
        let r = restrict_to_common_actions(
            &q(&[("a", 1.0), ("b", 0.0), ("c", 5.0)]),
            &q(&[("a", 2.0), ("b", 1.0)]),
            "c",
        )
        .unwrap();
        assert_eq!(r.original, q(&[("a", 1.0), ("b", 0.0)]));
        assert_eq!(r.perturbed, q(&[("a", 2.0), ("b", 1.0)]));
        assert!(r.selected_removed);
    }

    #[test]
    fn restriction_follows_original_order() {
        let r = restrict_to_common_actions(&q(&[("a", 1.0), ("b", 0.0)]), &q(&[("b", 4.0), ("a", 3.0)]), "a").unwrap();
        assert_eq!(r.perturbed, q(&[("a", 3.0), ("b", 4.0)]));
    }

    #[test]
    fn restriction_disjoint_sets() {
        assert_eq!(
            restrict_to_common_actions(&q(&[("a", 1.0)]), &q(&[("b", 1.0)]), "a"),
            Err(SaliencyError::NoOverlap)
        );
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax_selected(&q(&[("s", 0.0), ("b", 0.0)]), "s").unwrap(), 0.5);
        assert!(close(softmax_selected(&q(&[("s", 1.0), ("b", 0.0)]), "s").unwrap(), 0.7310585786300049, 1e-12));
        for c in [-7.5, 0.0, 3.0, 700.0] {
            let p = softmax_selected(&q(&[("s", c), ("b", c), ("d", c)]), "s").unwrap();
            assert!(close(p, 1.0 / 3.0, 1e-12));
        }
        assert_eq!(
            softmax_selected(&q(&[("a", 0.0)]), "zz"),
            Err(SaliencyError::UnknownAction("zz".into()))
        );
    }

    #[test]
    fn softmax_survives_large_values() {
        let p = softmax_selected(&q(&[("s", 1000.0), ("b", -1000.0)]), "s").unwrap();
        assert!(p.is_finite() && p <= 1.0);
    }

    #[test]
    fn rem_examples() {
        let d = rem_distribution(&q(&[("s", 9.0), ("b", 2.0), ("c", 2.0)]), "s").unwrap();
        assert_eq!(d.prob("b"), Some(0.5));
        assert_eq!(d.prob("c"), Some(0.5));
        let d = rem_distribution(&q(&[("s", 0.0), ("b", 1.0), ("c", 0.0)]), "s").unwrap();
        assert!(close(d.prob("b").unwrap(), 0.7310585786300049, 1e-12));
        assert!(close(d.prob("c").unwrap(), 0.2689414213699951, 1e-12));
        assert!(d.prob("s").is_none());
        let d = rem_distribution(&q(&[("s", 5.0), ("b", 7.0)]), "s").unwrap();
        assert_eq!(d.prob("b"), Some(1.0));
        assert_eq!(
            rem_distribution(&q(&[("s", 5.0)]), "s"),
            Err(SaliencyError::DegenerateRemainder)
        );
    }

    #[test]
    fn kl_examples() {
        let half = ActionDistribution::new([("b", 0.5), ("c", 0.5)]).unwrap();
        assert_eq!(kl_divergence(&half, &half).unwrap(), 0.0);
        let skew = rem_distribution(&q(&[("s", 0.0), ("b", 1.0), ("c", 0.0)]), "s").unwrap();
        assert!(close(kl_divergence(&half, &skew).unwrap(), 0.12011450695827758, 1e-12));
        let one = ActionDistribution::new([("b", 1.0)]).unwrap();
        assert_eq!(kl_divergence(&one, &one).unwrap(), 0.0);
        let other = ActionDistribution::new([("x", 0.5), ("c", 0.5)]).unwrap();
        assert_eq!(kl_divergence(&half, &other), Err(SaliencyError::SupportMismatch));
        assert_eq!(kl_divergence(&half, &one), Err(SaliencyError::SupportMismatch));
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(similarity(0.0).unwrap(), 1.0);
        assert_eq!(similarity(1.0).unwrap(), 0.5);
        assert!(close(similarity(0.12011450695827758).unwrap(), 0.892765867942864, 1e-12));
        assert!(similarity(-0.1).is_err());
        assert!(similarity(f64::NAN).is_err());
    }

    #[test]
    fn identity_perturbation_scores_zero() {
        let orig = q(&[("s", 0.3), ("b", -1.0), ("c", 2.0)]);
        let s = sarfa_score(&orig, &orig, "s").unwrap();
        assert_eq!(s.delta_p, Some(0.0));
        assert_eq!(s.kl, Some(0.0));
        assert_eq!(s.k_sim, Some(1.0));
        assert_eq!(s.score, 0.0);
        assert_eq!(s.status, FeatureStatus::Scored);
    }

    #[test]
    fn two_action_fixture() {
        let s = sarfa_score(&q(&[("s", 1.0), ("b", 0.0)]), &q(&[("s", 0.0), ("b", 0.0)]), "s").unwrap();
        assert!(close(s.delta_p.unwrap(), 0.2310585786300049, 1e-12));
        assert_eq!(s.kl, Some(0.0));
        assert_eq!(s.k_sim, Some(1.0));
        assert!(close(s.score, 0.3753819398052376, 1e-12));
    }

    #[test]
    fn three_action_fixture() {
        let s = sarfa_score(
            &q(&[("s", 2.0), ("b", 1.0), ("c", 0.0)]),
            &q(&[("s", 2.0), ("b", 1.0), ("c", 1.0)]),
            "s",
        )
        .unwrap();
        assert!(close(s.delta_p.unwrap(), 0.08912407100899278, 1e-12));
        assert!(close(s.kl.unwrap(), 0.12011450695827758, 1e-12));
        assert!(close(s.k_sim.unwrap(), 0.892765867942864, 1e-12));
        assert!(close(s.score, 0.1620689355344258, 1e-12));
    }

    #[test]
    fn negative_delta_clamps_to_zero() {
        let s = sarfa_score(&q(&[("s", 0.0), ("b", 0.0)]), &q(&[("s", 1.0), ("b", 0.0)]), "s").unwrap();
        assert!(s.delta_p.unwrap() < 0.0);
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn removed_action_counts_as_zero_probability() {
        let orig = q(&[("s", 1.0), ("b", 0.0), ("c", 0.0)]);
        let pert = q(&[("b", 3.0), ("c", 3.0)]);
        let s = sarfa_score(&orig, &pert, "s").unwrap();
        assert_eq!(s.status, FeatureStatus::ActionRemoved);
        let p = softmax_selected(&orig, "s").unwrap();
        assert!(close(s.delta_p.unwrap(), p, 1e-15));
        assert_eq!(s.k_sim, Some(1.0));
        assert!(close(s.score, 2.0 * p / (1.0 + p), 1e-12));
    }

    #[test]
    fn removed_action_with_no_alternatives_is_skipped() {
        let s = sarfa_score(&q(&[("s", 1.0), ("b", 0.0)]), &q(&[("x", 3.0)]), "s").unwrap();
        assert_eq!(s.status, FeatureStatus::SkippedNoOverlap);
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn only_selected_in_common_is_degenerate() {
        let s = sarfa_score(&q(&[("s", 1.0), ("b", 0.0)]), &q(&[("s", 0.0), ("x", 3.0)]), "s").unwrap();
        assert_eq!(s.status, FeatureStatus::DegenerateRem);
        assert_eq!(s.k_sim, Some(1.0));
        assert_eq!(s.delta_p, Some(0.0));
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn unknown_selected_is_an_error() {
        assert_eq!(
            sarfa_score(&q(&[("a", 1.0)]), &q(&[("a", 1.0)]), "zz"),
            Err(SaliencyError::UnknownAction("zz".into()))
        );
    }

    #[test]
    fn feature_id_comes_from_perturbed_state() {
        let orig = q(&[("s", 1.0), ("b", 0.0)]);
        let pert = orig.clone().with_state_id("e4");
        assert_eq!(sarfa_score(&orig, &pert, "s").unwrap().feature_id, "e4");
    }
}
