use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::movegen::Move;
use crate::position::Position;
use crate::types::{PieceKind, Square};

/// One labeled puzzle: a position, the move to explain, and the squares
/// human experts consider salient for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaliencyDatasetEntry {
    pub fen: String,
    pub best_move: String,
    pub salient_squares: BTreeSet<Square>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expert_labels: Option<Vec<BTreeSet<Square>>>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

impl SaliencyDatasetEntry {
    pub fn position(&self) -> Result<Position, String> {
        Position::from_fen(&self.fen).map_err(|e| format!("bad FEN `{}`: {e}", self.fen))
    }

    pub fn selected_move(&self) -> Result<Move, String> {
        let pos = self.position()?;
        pos.parse_move(&self.best_move)
            .ok_or_else(|| format!("best_move `{}` is not legal in `{}`", self.best_move, self.fen))
    }

    /// Occupied squares without kings: the squares that can be labeled.
    pub fn candidate_squares(&self) -> Result<BTreeSet<Square>, String> {
        Ok(self
            .position()?
            .occupied()
            .filter(|(_, p)| p.kind != PieceKind::King)
            .map(|(sq, _)| sq)
            .collect())
    }

    pub fn validate(&self) -> Result<(), String> {
        let pos = self.position()?;
        self.selected_move()?;
        for sq in &self.salient_squares {
            if pos.piece_at(*sq).is_none() {
                return Err(format!("salient square {sq} is empty"));
            }
        }
        if let Some(labels) = &self.expert_labels {
            let labels: &[BTreeSet<Square>; 3] = labels
                .as_slice()
                .try_into()
                .map_err(|_| format!("expert_labels needs 3 label sets, found {}", labels.len()))?;
            if majority_vote(labels) != self.salient_squares {
                return Err("salient_squares is not the majority vote of expert_labels".into());
            }
        }
        Ok(())
    }
}

/// Squares chosen by at least two of the three label sets.
pub fn majority_vote(labels: &[BTreeSet<Square>; 3]) -> BTreeSet<Square> {
    let all: BTreeSet<Square> = labels.iter().flatten().copied().collect();
    all.into_iter()
        .filter(|sq| labels.iter().filter(|set| set.contains(sq)).count() >= 2)
        .collect()
}

/// Parses JSON Lines; blank lines and `#` comment lines are ignored. Line
/// numbers are 1-based.
pub fn parse_dataset(text: &str) -> Result<Vec<SaliencyDatasetEntry>, DatasetError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let invalid = |message: String| DatasetError::Invalid { line: i + 1, message };
        let entry: SaliencyDatasetEntry = serde_json::from_str(line).map_err(|e| invalid(e.to_string()))?;
        entry.validate().map_err(invalid)?;
        entries.push(entry);
    }
    Ok(entries)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<SaliencyDatasetEntry>, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset(&text)
}

pub fn write_dataset(entries: &[SaliencyDatasetEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("entries serialize"));
        out.push('\n');
    }
    out
}
