use sarfa_chess::{Position, SaliencyDatasetEntry};
use sarfa_core::{Combiner, Method, QOracle, SessionPool};
use serde::{Deserialize, Serialize};

use crate::roc::{roc, Normalization, RocReport};
use crate::run::{score_methods, MethodRun, ScoreOptions};
use crate::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub method: Method,
    pub auc: f64,
    pub n_puzzles: usize,
    pub n_skipped: usize,
}

impl AblationRow {
    /// Family name: `sarfa` for every combiner variant, else the baseline name.
    pub fn family(&self) -> &'static str {
        match self.method {
            Method::Sarfa(_) => "sarfa",
            m => m.name(),
        }
    }

    pub fn combiner(&self) -> Option<Combiner> {
        match self.method {
            Method::Sarfa(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    /// Highest AUC first; ties keep the canonical method order.
    pub rows: Vec<AblationRow>,
    #[serde(skip)]
    pub runs: Vec<(MethodRun, RocReport)>,
}

impl AblationTable {
    pub fn auc(&self, method: Method) -> Option<f64> {
        self.rows.iter().find(|r| r.method == method).map(|r| r.auc)
    }
}

/// Scores the dataset with SARFA, its combiner variants and the baselines,
/// all from one shared set of agent evaluations.
pub fn ablation<O>(
    entries: &[SaliencyDatasetEntry],
    pool: &SessionPool<O>,
    options: &ScoreOptions,
    normalization: Normalization,
) -> Result<AblationTable, EvalError>
where
    O: QOracle<Position> + Send,
{
    let runs = score_methods(entries, pool, &Method::ABLATION, options)?;
    let mut rows = Vec::with_capacity(runs.len());
    let mut with_roc = Vec::with_capacity(runs.len());
    for run in runs {
        let report = roc(&run, entries, normalization)?;
        rows.push(AblationRow {
            method: run.method,
            auc: report.auc,
            n_puzzles: run.puzzles.len(),
            n_skipped: run.failures.len(),
        });
        with_roc.push((run, report));
    }
    rows.sort_by(|a, b| b.auc.total_cmp(&a.auc));
    Ok(AblationTable { rows, runs: with_roc })
}
