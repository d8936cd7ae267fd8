use std::collections::BTreeMap;

use sarfa_chess::{SaliencyDatasetEntry, Square};
use serde::{Deserialize, Serialize};

use crate::run::MethodRun;
use crate::EvalError;

/// Scope of the min–max rescaling applied before the threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// One range over every score in the run.
    #[default]
    Global,
    PerPuzzle,
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "global" => Ok(Normalization::Global),
            "per_puzzle" => Ok(Normalization::PerPuzzle),
            other => Err(format!("unknown normalization `{other}` (expected global or per_puzzle)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    /// (false positive rate, true positive rate), from the highest threshold down.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

fn rescale<'a>(values: impl Iterator<Item = &'a f64> + Clone) -> impl Fn(f64) -> f64 {
    let lo = values.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = values.copied().fold(f64::NEG_INFINITY, f64::max);
    move |v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }
}

impl MethodRun {
    /// Scores rescaled to [0, 1]; a constant range maps to 0.
    pub fn normalized(&self, normalization: Normalization) -> Vec<BTreeMap<Square, f64>> {
        match normalization {
            Normalization::Global => {
                let f = rescale(self.puzzles.iter().flat_map(|p| p.scores.values()));
                self.puzzles.iter().map(|p| p.scores.iter().map(|(s, v)| (*s, f(*v))).collect()).collect()
            }
            Normalization::PerPuzzle => self
                .puzzles
                .iter()
                .map(|p| {
                    let f = rescale(p.scores.values());
                    p.scores.iter().map(|(s, v)| (*s, f(*v))).collect()
                })
                .collect(),
        }
    }
}

/// Threshold sweep over `(score, is_positive)` samples. Equal scores enter
/// together, so ties contribute a diagonal segment.
pub fn roc_curve(samples: &[(f64, bool)]) -> Result<RocReport, EvalError> {
    let n_pos = samples.iter().filter(|s| s.1).count();
    let n_neg = samples.len() - n_pos;
    if n_pos == 0 {
        return Err(EvalError::NoPositives);
    }
    if n_neg == 0 {
        return Err(EvalError::NoNegatives);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (p, n) = (n_pos as f64, n_neg as f64);
    let mut points = vec![(0.0, 0.0)];
    // Twice the area in units of one positive times one negative, kept in
    // integers so that perfect and chance rankings come out exact.
    let mut area2: u128 = 0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let (mut dtp, mut dfp) = (0usize, 0usize);
        let score = sorted[i].0;
        while i < sorted.len() && sorted[i].0.total_cmp(&score).is_eq() {
            if sorted[i].1 {
                dtp += 1;
            } else {
                dfp += 1;
            }
            i += 1;
        }
        area2 += dfp as u128 * (2 * tp + dtp) as u128;
        tp += dtp;
        fp += dfp;
        points.push((fp as f64 / n, tp as f64 / p));
    }
    let auc = area2 as f64 / (2.0 * p * n);
    Ok(RocReport { points, auc, n_pos, n_neg })
}

/// ROC of a run against the labels of `entries`. Positives are the labeled
/// salient squares; negatives every other non-king piece.
pub fn roc(run: &MethodRun, entries: &[SaliencyDatasetEntry], normalization: Normalization) -> Result<RocReport, EvalError> {
    let mut samples = Vec::new();
    for (puzzle, scores) in run.puzzles.iter().zip(run.normalized(normalization)) {
        let entry = entries
            .get(puzzle.index)
            .filter(|e| e.fen == puzzle.fen)
            .ok_or_else(|| EvalError::Mismatch(format!("puzzle {} has no matching entry", puzzle.index)))?;
        let candidates = entry
            .candidate_squares()
            .map_err(|message| EvalError::InvalidEntry { index: puzzle.index, message })?;
        for sq in candidates {
            samples.push((scores.get(&sq).copied().unwrap_or(0.0), entry.salient_squares.contains(&sq)));
        }
    }
    roc_curve(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_chance() {
        let perfect = roc_curve(&[(1.0, true), (1.0, true), (0.0, false), (0.0, false), (0.0, false)]).unwrap();
        assert_eq!(perfect.auc, 1.0);
        assert_eq!(perfect.points, [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        let chance = roc_curve(&[(0.3, true), (0.3, false), (0.3, false)]).unwrap();
        assert_eq!(chance.auc, 0.5);
        assert_eq!(chance.points, [(0.0, 0.0), (1.0, 1.0)]);
        let worst = roc_curve(&[(0.0, true), (1.0, false)]).unwrap();
        assert_eq!(worst.auc, 0.0);
    }

    #[test]
    fn hand_worked_example() {
        // Ranking: P N P N with one tie between the second P and first N.
        let r = roc_curve(&[(0.9, true), (0.5, true), (0.5, false), (0.1, false)]).unwrap();
        assert_eq!(r.points, [(0.0, 0.0), (0.0, 0.5), (0.5, 1.0), (1.0, 1.0)]);
        assert_eq!(r.auc, 0.875);
    }

    #[test]
    fn undefined_auc() {
        assert!(matches!(roc_curve(&[(1.0, false)]), Err(EvalError::NoPositives)));
        assert!(matches!(roc_curve(&[(1.0, true)]), Err(EvalError::NoNegatives)));
        assert!(matches!(roc_curve(&[]), Err(EvalError::NoPositives)));
    }
}
