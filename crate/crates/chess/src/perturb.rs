use serde::Serialize;
use thiserror::Error;

use crate::position::{Position, PositionError};
use crate::types::{Piece, PieceKind, Square};

/// Removal of the piece on one square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SquarePerturbation {
    pub square: Square,
    pub removed_piece: Piece,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PerturbError {
    #[error("square {0} is empty")]
    Empty(Square),
    #[error("kings are never removed")]
    King,
    #[error("removal leaves an invalid position: {0}")]
    Invalid(#[from] PositionError),
}

impl Position {
    /// The position with the piece on `sq` removed. Castling rights tied to a
    /// removed rook are dropped, as is the en passant square when the removed
    /// piece is the pawn that just double-stepped.
    pub fn remove_piece(&self, sq: Square) -> Result<Position, PerturbError> {
        let piece = self.board[sq.index()].ok_or(PerturbError::Empty(sq))?;
        if piece.kind == PieceKind::King {
            return Err(PerturbError::King);
        }
        let mut next = self.clone();
        next.board[sq.index()] = None;
        if piece.kind == PieceKind::Rook {
            next.castling.clear_for_square(sq);
        }
        if let Some(ep) = self.en_passant {
            let forward = match self.side {
                crate::Color::White => -1,
                crate::Color::Black => 1,
            };
            if ep.offset(0, forward) == Some(sq) {
                next.en_passant = None;
            }
        }
        next.validate()?;
        Ok(next)
    }
}

/// Every valid single-piece removal, ordered a1 to h8.
pub fn enumerate_perturbations(pos: &Position) -> Vec<(SquarePerturbation, Position)> {
    pos.occupied()
        .filter_map(|(square, removed_piece)| {
            pos.remove_piece(square)
                .ok()
                .map(|p| (SquarePerturbation { square, removed_piece }, p))
        })
        .collect()
}
