//! Chess state for board saliency: FEN, full legal move generation, piece
//! removal perturbations and the labeled saliency dataset.

mod dataset;
mod movegen;
mod perturb;
mod position;
mod saliency;
mod types;

pub use dataset::{load_dataset, majority_vote, parse_dataset, write_dataset, DatasetError, SaliencyDatasetEntry};
pub use movegen::Move;
pub use perturb::{enumerate_perturbations, PerturbError, SquarePerturbation};
pub use position::{CastlingRights, FenError, Position, PositionError};
pub use saliency::{
    compute_board_saliency, compute_board_saliency_pooled, BoardSaliency, BoardSaliencyError,
};
pub use types::{Color, Piece, PieceKind, Square};
