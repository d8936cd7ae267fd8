use std::fmt;
use std::str::FromStr;

use crate::position::{Position, BISHOP_DIRS, KING_STEPS, KNIGHT_STEPS, ROOK_DIRS};
use crate::types::{Color, Piece, PieceKind, Square};

/// A move in long algebraic (UCI) form. Castling is the king's two-square
/// move, e.g. `e1g1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PromotionKind>,
}

/// Wrapper so `Move` can derive `Ord`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PromotionKind(u8);

impl PromotionKind {
    fn new(kind: PieceKind) -> Self {
        PromotionKind(kind.to_char() as u8)
    }

    pub fn kind(self) -> PieceKind {
        PieceKind::from_char(self.0 as char).expect("stored from a piece kind")
    }
}

impl Move {
    pub fn new(from: Square, to: Square, promotion: Option<PieceKind>) -> Self {
        Move {
            from,
            to,
            promotion: promotion.map(PromotionKind::new),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)?;
        if let Some(p) = self.promotion {
            write!(f, "{}", p.kind().to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Move {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !(s.len() == 4 || s.len() == 5) || !s.is_ascii() {
            return Err(format!("invalid move `{s}`"));
        }
        let from: Square = s[0..2].parse()?;
        let to: Square = s[2..4].parse()?;
        let promotion = match s.as_bytes().get(4) {
            None => None,
            Some(&c) => match PieceKind::from_char(c as char) {
                Some(k @ (PieceKind::Knight | PieceKind::Bishop | PieceKind::Rook | PieceKind::Queen))
                    if c.is_ascii_lowercase() =>
                {
                    Some(k)
                }
                _ => return Err(format!("invalid promotion in `{s}`")),
            },
        };
        Ok(Move::new(from, to, promotion))
    }
}

const PROMOTIONS: [PieceKind; 4] = [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight];

impl Position {
    /// Every legal move for the side to move, ordered by origin square then
    /// generation order. Empty on checkmate or stalemate.
    pub fn legal_moves(&self) -> Vec<Move> {
        let us = self.side;
        self.pseudo_legal_moves()
            .into_iter()
            .filter(|m| !self.play_unchecked(*m).in_check(us))
            .collect()
    }

    pub fn is_legal(&self, mv: Move) -> bool {
        self.legal_moves().contains(&mv)
    }

    /// Parses a long-algebraic move and checks that it is legal here.
    pub fn parse_move(&self, text: &str) -> Option<Move> {
        let mv: Move = text.parse().ok()?;
        self.is_legal(mv).then_some(mv)
    }

    /// Plays a legal move. Returns `None` if `mv` is not legal.
    pub fn play(&self, mv: Move) -> Option<Position> {
        self.is_legal(mv).then(|| self.play_unchecked(mv))
    }

    fn pseudo_legal_moves(&self) -> Vec<Move> {
        let us = self.side;
        let mut moves = Vec::with_capacity(64);
        for (from, piece) in self.occupied().filter(|(_, p)| p.color == us) {
            match piece.kind {
                PieceKind::Pawn => self.pawn_moves(from, &mut moves),
                PieceKind::Knight => self.step_moves(from, &KNIGHT_STEPS, &mut moves),
                PieceKind::King => {
                    self.step_moves(from, &KING_STEPS, &mut moves);
                    self.castling_moves(from, &mut moves);
                }
                PieceKind::Bishop => self.slide_moves(from, &BISHOP_DIRS, &mut moves),
                PieceKind::Rook => self.slide_moves(from, &ROOK_DIRS, &mut moves),
                PieceKind::Queen => {
                    self.slide_moves(from, &ROOK_DIRS, &mut moves);
                    self.slide_moves(from, &BISHOP_DIRS, &mut moves);
                }
            }
        }
        moves
    }

    fn can_land(&self, to: Square) -> bool {
        self.board[to.index()].is_none_or(|p| p.color != self.side)
    }

    fn step_moves(&self, from: Square, steps: &[(i8, i8)], out: &mut Vec<Move>) {
        for &(df, dr) in steps {
            if let Some(to) = from.offset(df, dr).filter(|&to| self.can_land(to)) {
                out.push(Move::new(from, to, None));
            }
        }
    }

    fn slide_moves(&self, from: Square, dirs: &[(i8, i8)], out: &mut Vec<Move>) {
        for &(df, dr) in dirs {
            let mut cur = from.offset(df, dr);
            while let Some(to) = cur {
                match self.board[to.index()] {
                    None => out.push(Move::new(from, to, None)),
                    Some(p) => {
                        if p.color != self.side {
                            out.push(Move::new(from, to, None));
                        }
                        break;
                    }
                }
                cur = to.offset(df, dr);
            }
        }
    }

    fn pawn_moves(&self, from: Square, out: &mut Vec<Move>) {
        let (dir, start_rank, last_rank) = match self.side {
            Color::White => (1, 1, 7),
            Color::Black => (-1, 6, 0),
        };
        let push = |to: Square, out: &mut Vec<Move>| {
            if to.rank() == last_rank {
                for kind in PROMOTIONS {
                    out.push(Move::new(from, to, Some(kind)));
                }
            } else {
                out.push(Move::new(from, to, None));
            }
        };
        if let Some(one) = from.offset(0, dir).filter(|s| self.board[s.index()].is_none()) {
            push(one, out);
            if from.rank() == start_rank {
                if let Some(two) = one.offset(0, dir).filter(|s| self.board[s.index()].is_none()) {
                    out.push(Move::new(from, two, None));
                }
            }
        }
        for df in [-1, 1] {
            if let Some(to) = from.offset(df, dir) {
                let enemy = self.board[to.index()].is_some_and(|p| p.color != self.side);
                if enemy || self.en_passant == Some(to) {
                    push(to, out);
                }
            }
        }
    }

    fn castling_moves(&self, from: Square, out: &mut Vec<Move>) {
        let them = self.side.opposite();
        let (home, king_side, queen_side) = match self.side {
            Color::White => (4usize, self.castling.white_king, self.castling.white_queen),
            Color::Black => (60usize, self.castling.black_king, self.castling.black_queen),
        };
        if from.index() != home || !(king_side || queen_side) || self.is_attacked(from, them) {
            return;
        }
        let sq = |i: usize| Square::from_index(i).expect("on board");
        let empty = |idx: &[usize]| idx.iter().all(|&i| self.board[i].is_none());
        let safe = |idx: &[usize]| idx.iter().all(|&i| !self.is_attacked(sq(i), them));
        if king_side && empty(&[home + 1, home + 2]) && safe(&[home + 1, home + 2]) {
            out.push(Move::new(from, sq(home + 2), None));
        }
        if queen_side && empty(&[home - 1, home - 2, home - 3]) && safe(&[home - 1, home - 2]) {
            out.push(Move::new(from, sq(home - 2), None));
        }
    }

    /// Applies a pseudo-legal move without checking king safety.
    pub(crate) fn play_unchecked(&self, mv: Move) -> Position {
        let mut next = self.clone();
        let piece = self.board[mv.from.index()].expect("move starts on a piece");
        let captured = self.board[mv.to.index()];
        next.board[mv.from.index()] = None;
        next.board[mv.to.index()] = Some(match mv.promotion {
            Some(p) => Piece::new(piece.color, p.kind()),
            None => piece,
        });

        let mut is_capture = captured.is_some();
        if piece.kind == PieceKind::Pawn && self.en_passant == Some(mv.to) && captured.is_none() {
            let victim = Square::new(mv.to.file(), mv.from.rank()).expect("on board");
            next.board[victim.index()] = None;
            is_capture = true;
        }
        if piece.kind == PieceKind::King && (mv.to.file() as i8 - mv.from.file() as i8).abs() == 2 {
            let rank = mv.from.rank();
            let (rook_from, rook_to) = if mv.to.file() == 6 { (7, 5) } else { (0, 3) };
            let rf = Square::new(rook_from, rank).expect("on board");
            let rt = Square::new(rook_to, rank).expect("on board");
            next.board[rt.index()] = next.board[rf.index()].take();
        }

        next.castling.clear_for_square(mv.from);
        next.castling.clear_for_square(mv.to);

        next.en_passant = None;
        if piece.kind == PieceKind::Pawn && (mv.to.rank() as i8 - mv.from.rank() as i8).abs() == 2 {
            next.en_passant = Square::new(mv.from.file(), (mv.from.rank() + mv.to.rank()) / 2);
        }

        next.halfmove = if piece.kind == PieceKind::Pawn || is_capture { 0 } else { self.halfmove + 1 };
        if self.side == Color::Black {
            next.fullmove += 1;
        }
        next.side = self.side.opposite();
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perft(pos: &Position, depth: u32) -> u64 {
        if depth == 0 {
            return 1;
        }
        let moves = pos.legal_moves();
        if depth == 1 {
            return moves.len() as u64;
        }
        moves.iter().map(|m| perft(&pos.play_unchecked(*m), depth - 1)).sum()
    }

    fn perft_fen(fen: &str, expected: &[u64]) {
        let pos = Position::from_fen(fen).unwrap();
        for (d, n) in expected.iter().enumerate() {
            assert_eq!(perft(&pos, d as u32 + 1), *n, "{fen} depth {}", d + 1);
        }
    }

    #[test]
    fn perft_start() {
        perft_fen(Position::START_FEN, &[20, 400, 8902]);
    }

    #[test]
    fn perft_kiwipete() {
        perft_fen(
            "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
            &[48, 2039, 97862],
        );
    }

    #[test]
    fn perft_endgame() {
        perft_fen("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1", &[14, 191, 2812, 43238]);
    }

    #[test]
    fn perft_promotions() {
        perft_fen(
            "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
            &[6, 264, 9467],
        );
        perft_fen("rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8", &[44, 1486, 62379]);
    }

    #[test]
    fn checkmate_has_no_moves() {
        // Fool's mate.
        let p = Position::from_fen("rnb1kbnr/pppp1ppp/8/4p3/6Pq/5P2/PPPPP2P/RNBQKBNR w KQkq - 1 3").unwrap();
        assert!(p.in_check(Color::White));
        assert!(p.legal_moves().is_empty());
    }

    #[test]
    fn stalemate_has_no_moves() {
        let p = Position::from_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1").unwrap();
        assert!(!p.in_check(Color::Black));
        assert!(p.legal_moves().is_empty());
    }

    #[test]
    fn lone_kings_only_move_kings_safely() {
        let p = Position::from_fen("8/8/8/3k4/8/3K4/8/8 w - - 0 1").unwrap();
        let moves = p.legal_moves();
        assert_eq!(moves.len(), 5);
        for m in moves {
            assert_eq!(m.from.to_string(), "d3");
            assert!(m.to.rank() == 2 || m.to.rank() == 1, "{m} walks next to the other king");
        }
    }

    #[test]
    fn move_notation() {
        let m: Move = "e7e8q".parse().unwrap();
        assert_eq!(m.to_string(), "e7e8q");
        assert!("e7e8k".parse::<Move>().is_err());
        assert!("e7e8Q".parse::<Move>().is_err());
        assert!("e7".parse::<Move>().is_err());
        let p = Position::start();
        assert!(p.parse_move("e2e4").is_some());
        assert!(p.parse_move("e2e5").is_none());
        let after = p.play(p.parse_move("e2e4").unwrap()).unwrap();
        assert_eq!(after.to_fen(), "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1");
    }
}
