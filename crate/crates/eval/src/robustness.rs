use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sarfa_chess::{enumerate_perturbations, Position, SaliencyDatasetEntry, Square};
use sarfa_core::{Method, QOracle, SessionPool};
use serde::{Deserialize, Serialize};

use crate::roc::{roc, Normalization};
use crate::run::{score_dataset, MethodRun, ScoreOptions};
use crate::EvalError;

/// Which pieces count as irrelevant when picking one to remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustnessMode {
    /// Any piece the human labels leave out.
    HumanNonsalient,
    /// Pieces the human labels leave out that also score below the threshold on the original run.
    SarfaNonsalient,
}

impl std::str::FromStr for RobustnessMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "human_nonsalient" => Ok(RobustnessMode::HumanNonsalient),
            "sarfa_nonsalient" => Ok(RobustnessMode::SarfaNonsalient),
            other => Err(format!("unknown robustness mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessOptions {
    pub seed: u64,
    pub mode: RobustnessMode,
    /// Raw SARFA score below which a piece counts as non-salient.
    pub sarfa_threshold: f64,
    pub normalization: Normalization,
    pub temperature: f64,
    /// Journals for the original and perturbed runs get `.before`/`.after` suffixes.
    pub journal: Option<PathBuf>,
}

impl RobustnessOptions {
    pub fn new(seed: u64, mode: RobustnessMode) -> Self {
        RobustnessOptions {
            seed,
            mode,
            sarfa_threshold: 0.1,
            normalization: Normalization::Global,
            temperature: sarfa_core::DEFAULT_TEMPERATURE,
            journal: None,
        }
    }

    fn score_options(&self, suffix: &str) -> ScoreOptions {
        ScoreOptions {
            temperature: self.temperature,
            journal: self.journal.as_ref().map(|p| {
                let mut name = p.clone().into_os_string();
                name.push(suffix);
                PathBuf::from(name)
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub index: usize,
    pub square: Square,
    pub piece: char,
    pub fen_after: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub mode: RobustnessMode,
    pub seed: u64,
    pub sarfa_threshold: f64,
    /// Over the whole original dataset.
    pub auc_before: f64,
    /// Over the perturbed puzzles only.
    pub auc_after: f64,
    pub n_puzzles: usize,
    pub n_perturbed: usize,
    /// Puzzles with no removable candidate piece.
    pub n_without_candidate: usize,
    pub n_failed_before: usize,
    pub n_failed_after: usize,
    pub removals: Vec<Removal>,
}

fn candidates(
    index: usize,
    entry: &SaliencyDatasetEntry,
    before: &MethodRun,
    options: &RobustnessOptions,
) -> Result<Vec<(Square, char, Position)>, EvalError> {
    let invalid = |message| EvalError::InvalidEntry { index, message };
    let pos = entry.position().map_err(invalid)?;
    let mv = entry.selected_move().map_err(invalid)?;
    let sarfa_scores = before.puzzles.iter().find(|p| p.index == index).map(|p| &p.scores);
    let mut out = Vec::new();
    for (pert, after) in enumerate_perturbations(&pos) {
        if entry.salient_squares.contains(&pert.square) || !after.is_legal(mv) {
            continue;
        }
        if options.mode == RobustnessMode::SarfaNonsalient {
            match sarfa_scores.and_then(|s| s.get(&pert.square)) {
                Some(score) if *score < options.sarfa_threshold => {}
                _ => continue,
            }
        }
        out.push((pert.square, pert.removed_piece.to_char(), after));
    }
    Ok(out)
}

/// Removes one randomly chosen irrelevant piece from every puzzle and
/// compares SARFA's AUC before and after. Returns the perturbed dataset too.
pub fn robustness<O>(
    entries: &[SaliencyDatasetEntry],
    pool: &SessionPool<O>,
    options: &RobustnessOptions,
) -> Result<(RobustnessReport, Vec<SaliencyDatasetEntry>), EvalError>
where
    O: QOracle<Position> + Send,
{
    let method = Method::default();
    let before = score_dataset(entries, pool, method, &options.score_options(".before"))?;
    let auc_before = roc(&before, entries, options.normalization)?.auc;

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut perturbed = Vec::new();
    let mut removals = Vec::new();
    let mut n_without_candidate = 0;
    for (index, entry) in entries.iter().enumerate() {
        let cands = candidates(index, entry, &before, options)?;
        if cands.is_empty() {
            n_without_candidate += 1;
            continue;
        }
        let (square, piece, after) = &cands[rng.random_range(0..cands.len())];
        let fen_after = after.to_fen();
        removals.push(Removal { index, square: *square, piece: *piece, fen_after: fen_after.clone() });
        perturbed.push(SaliencyDatasetEntry {
            fen: fen_after,
            best_move: entry.best_move.clone(),
            salient_squares: entry.salient_squares.clone(),
            expert_labels: None,
        });
    }

    let after = score_dataset(&perturbed, pool, method, &options.score_options(".after"))?;
    let auc_after = roc(&after, &perturbed, options.normalization)?.auc;
    let report = RobustnessReport {
        mode: options.mode,
        seed: options.seed,
        sarfa_threshold: options.sarfa_threshold,
        auc_before,
        auc_after,
        n_puzzles: entries.len(),
        n_perturbed: perturbed.len(),
        n_without_candidate,
        n_failed_before: before.failures.len(),
        n_failed_after: after.failures.len(),
        removals,
    };
    Ok((report, perturbed))
}
