//! Scoring labeled chess puzzles with saliency methods and measuring how well
//! the scores rank the human-labeled squares.

mod ablation;
mod error;
mod report;
mod robustness;
mod roc;
mod run;
mod synthetic;

pub use ablation::{ablation, AblationRow, AblationTable};
pub use error::EvalError;
pub use report::{ablation_csv, roc_points_csv};
pub use robustness::{robustness, Removal, RobustnessMode, RobustnessOptions, RobustnessReport};
pub use roc::{roc, roc_curve, Normalization, RocReport};
pub use run::{score_dataset, score_methods, MethodRun, PuzzleFailure, PuzzleScores, ScoreOptions};
pub use synthetic::{planted_dataset, ConstantOracle, PlantedOracle, SyntheticError};
