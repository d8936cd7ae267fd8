use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::types::{Color, Piece, PieceKind, Square};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CastlingRights {
    pub white_king: bool,
    pub white_queen: bool,
    pub black_king: bool,
    pub black_queen: bool,
}

impl CastlingRights {
    pub fn none() -> Self {
        Self::default()
    }

    fn to_fen(self) -> String {
        let mut s = String::new();
        if self.white_king {
            s.push('K');
        }
        if self.white_queen {
            s.push('Q');
        }
        if self.black_king {
            s.push('k');
        }
        if self.black_queen {
            s.push('q');
        }
        if s.is_empty() {
            s.push('-');
        }
        s
    }

    /// Drops any right that depends on a rook or king standing on `sq`.
    pub(crate) fn clear_for_square(&mut self, sq: Square) {
        match sq.index() {
            0 => self.white_queen = false,
            7 => self.white_king = false,
            4 => {
                self.white_king = false;
                self.white_queen = false;
            }
            56 => self.black_queen = false,
            63 => self.black_king = false,
            60 => {
                self.black_king = false;
                self.black_queen = false;
            }
            _ => {}
        }
    }
}

/// A position that does not satisfy the invariants of a reachable chess
/// position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PositionError {
    #[error("{0:?} must have exactly one king, found {1}")]
    KingCount(Color, usize),
    #[error("pawn on back rank at {0}")]
    PawnOnBackRank(Square),
    #[error("side not to move is in check")]
    OpponentInCheck,
    #[error("castling right `{0}` without king and rook on their home squares")]
    InconsistentCastling(char),
    #[error("en passant square {0} is inconsistent with the position")]
    InvalidEnPassant(Square),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FenError {
    #[error("FEN needs 4 to 6 space-separated fields, found {0}")]
    FieldCount(usize),
    #[error("malformed piece placement: {0}")]
    Placement(String),
    #[error("malformed side to move `{0}`")]
    SideToMove(String),
    #[error("malformed castling field `{0}`")]
    Castling(String),
    #[error("malformed en passant field `{0}`")]
    EnPassant(String),
    #[error("malformed move counter `{0}`")]
    Counter(String),
    #[error(transparent)]
    Invalid(#[from] PositionError),
}

/// Full chess state. Constructed positions always satisfy [`Position::validate`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Position {
    pub(crate) board: [Option<Piece>; 64],
    pub(crate) side: Color,
    pub(crate) castling: CastlingRights,
    pub(crate) en_passant: Option<Square>,
    pub(crate) halfmove: u32,
    pub(crate) fullmove: u32,
}

impl Position {
    pub const START_FEN: &'static str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

    pub fn start() -> Position {
        Position::from_fen(Self::START_FEN).expect("start position is valid")
    }

    /// Accepts six-field FEN; missing move counters default to `0 1`.
    pub fn from_fen(text: &str) -> Result<Position, FenError> {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if !(4..=6).contains(&fields.len()) {
            return Err(FenError::FieldCount(fields.len()));
        }

        let mut board = [None; 64];
        let ranks: Vec<&str> = fields[0].split('/').collect();
        if ranks.len() != 8 {
            return Err(FenError::Placement(format!("expected 8 ranks, found {}", ranks.len())));
        }
        for (i, row) in ranks.iter().enumerate() {
            let rank = 7 - i as u8;
            let mut file = 0u8;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    if d == 0 || d > 8 {
                        return Err(FenError::Placement(format!("bad empty-run `{c}`")));
                    }
                    file += d as u8;
                } else {
                    let piece = Piece::from_char(c).ok_or_else(|| FenError::Placement(format!("unknown piece `{c}`")))?;
                    let sq = Square::new(file, rank)
                        .ok_or_else(|| FenError::Placement(format!("rank {} overflows", rank + 1)))?;
                    board[sq.index()] = Some(piece);
                    file += 1;
                }
                if file > 8 {
                    return Err(FenError::Placement(format!("rank {} overflows", rank + 1)));
                }
            }
            if file != 8 {
                return Err(FenError::Placement(format!("rank {} has {file} files", rank + 1)));
            }
        }

        let side = match fields[1] {
            "w" => Color::White,
            "b" => Color::Black,
            other => return Err(FenError::SideToMove(other.into())),
        };

        let mut castling = CastlingRights::none();
        if fields[2] != "-" {
            for c in fields[2].chars() {
                let flag = match c {
                    'K' => &mut castling.white_king,
                    'Q' => &mut castling.white_queen,
                    'k' => &mut castling.black_king,
                    'q' => &mut castling.black_queen,
                    _ => return Err(FenError::Castling(fields[2].into())),
                };
                if *flag {
                    return Err(FenError::Castling(fields[2].into()));
                }
                *flag = true;
            }
        }

        let en_passant = match fields[3] {
            "-" => None,
            s => Some(s.parse::<Square>().map_err(|_| FenError::EnPassant(s.into()))?),
        };

        let counter = |i: usize, default: u32| -> Result<u32, FenError> {
            match fields.get(i) {
                None => Ok(default),
                Some(s) => s.parse().map_err(|_| FenError::Counter((*s).into())),
            }
        };
        let halfmove = counter(4, 0)?;
        let fullmove = counter(5, 1)?;
        if fullmove == 0 {
            return Err(FenError::Counter("0".into()));
        }

        let pos = Position {
            board,
            side,
            castling,
            en_passant,
            halfmove,
            fullmove,
        };
        pos.validate()?;
        Ok(pos)
    }

    pub fn to_fen(&self) -> String {
        let mut placement = String::new();
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                match self.board[rank * 8 + file] {
                    None => empty += 1,
                    Some(p) => {
                        if empty > 0 {
                            placement.push_str(&empty.to_string());
                            empty = 0;
                        }
                        placement.push(p.to_char());
                    }
                }
            }
            if empty > 0 {
                placement.push_str(&empty.to_string());
            }
            if rank > 0 {
                placement.push('/');
            }
        }
        let side = match self.side {
            Color::White => "w",
            Color::Black => "b",
        };
        let ep = self.en_passant.map_or_else(|| "-".to_owned(), |s| s.to_string());
        format!(
            "{placement} {side} {} {ep} {} {}",
            self.castling.to_fen(),
            self.halfmove,
            self.fullmove
        )
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    pub fn side_to_move(&self) -> Color {
        self.side
    }

    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    pub fn occupied(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(|sq| self.board[sq.index()].map(|p| (sq, p)))
    }

    pub fn piece_count(&self) -> usize {
        self.board.iter().flatten().count()
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        self.occupied()
            .find(|(_, p)| p.color == color && p.kind == PieceKind::King)
            .map(|(sq, _)| sq)
    }

    pub fn in_check(&self, color: Color) -> bool {
        self.king_square(color)
            .is_some_and(|k| self.is_attacked(k, color.opposite()))
    }

    pub fn validate(&self) -> Result<(), PositionError> {
        for color in [Color::White, Color::Black] {
            let kings = self
                .board
                .iter()
                .flatten()
                .filter(|p| p.color == color && p.kind == PieceKind::King)
                .count();
            if kings != 1 {
                return Err(PositionError::KingCount(color, kings));
            }
        }
        for (sq, p) in self.occupied() {
            if p.kind == PieceKind::Pawn && (sq.rank() == 0 || sq.rank() == 7) {
                return Err(PositionError::PawnOnBackRank(sq));
            }
        }
        let needs = |c: char, king: usize, rook: usize, color: Color| {
            let ok = self.board[king] == Some(Piece::new(color, PieceKind::King))
                && self.board[rook] == Some(Piece::new(color, PieceKind::Rook));
            if ok {
                Ok(())
            } else {
                Err(PositionError::InconsistentCastling(c))
            }
        };
        if self.castling.white_king {
            needs('K', 4, 7, Color::White)?;
        }
        if self.castling.white_queen {
            needs('Q', 4, 0, Color::White)?;
        }
        if self.castling.black_king {
            needs('k', 60, 63, Color::Black)?;
        }
        if self.castling.black_queen {
            needs('q', 60, 56, Color::Black)?;
        }
        if let Some(ep) = self.en_passant {
            // The double-stepped pawn belongs to the side that just moved.
            let (rank, forward) = match self.side {
                Color::White => (5, -1),
                Color::Black => (2, 1),
            };
            let pawn = ep.offset(0, forward);
            let origin = ep.offset(0, -forward);
            let ok = ep.rank() == rank
                && self.board[ep.index()].is_none()
                && origin.is_some_and(|o| self.board[o.index()].is_none())
                && pawn.is_some_and(|p| self.board[p.index()] == Some(Piece::new(self.side.opposite(), PieceKind::Pawn)));
            if !ok {
                return Err(PositionError::InvalidEnPassant(ep));
            }
        }
        if self.in_check(self.side.opposite()) {
            return Err(PositionError::OpponentInCheck);
        }
        Ok(())
    }

    /// True when `sq` is attacked by any piece of `by`.
    pub fn is_attacked(&self, sq: Square, by: Color) -> bool {
        let has = |s: Option<Square>, kinds: &[PieceKind]| {
            s.and_then(|s| self.board[s.index()])
                .is_some_and(|p| p.color == by && kinds.contains(&p.kind))
        };
        let pawn_dir = match by {
            Color::White => -1,
            Color::Black => 1,
        };
        if has(sq.offset(-1, pawn_dir), &[PieceKind::Pawn]) || has(sq.offset(1, pawn_dir), &[PieceKind::Pawn]) {
            return true;
        }
        if KNIGHT_STEPS.iter().any(|&(df, dr)| has(sq.offset(df, dr), &[PieceKind::Knight])) {
            return true;
        }
        if KING_STEPS.iter().any(|&(df, dr)| has(sq.offset(df, dr), &[PieceKind::King])) {
            return true;
        }
        let slides = |dirs: &[(i8, i8)], kinds: &[PieceKind]| {
            dirs.iter().any(|&(df, dr)| {
                let mut cur = sq.offset(df, dr);
                while let Some(s) = cur {
                    if let Some(p) = self.board[s.index()] {
                        return p.color == by && kinds.contains(&p.kind);
                    }
                    cur = s.offset(df, dr);
                }
                false
            })
        };
        slides(&ROOK_DIRS, &[PieceKind::Rook, PieceKind::Queen]) || slides(&BISHOP_DIRS, &[PieceKind::Bishop, PieceKind::Queen])
    }
}

pub(crate) const KNIGHT_STEPS: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
pub(crate) const KING_STEPS: [(i8, i8); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
pub(crate) const ROOK_DIRS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
pub(crate) const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Position({})", self.to_fen())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_fen())
    }
}

impl FromStr for Position {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Position::from_fen(s)
    }
}
