//! Deterministic UCI engine for tests. Scores every legal move by material
//! after the move, or with `--planted DATASET` by the planted puzzle oracle.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use clap::Parser;
use sarfa_chess::{load_dataset, Move, PieceKind, Position};
use sarfa_eval::PlantedOracle;

#[derive(Debug, Parser)]
struct Args {
    /// Answer with the planted values for the puzzles in this dataset
    #[arg(long)]
    planted: Option<PathBuf>,
}

fn piece_value(kind: PieceKind) -> i64 {
    match kind {
        PieceKind::Pawn => 100,
        PieceKind::Knight => 300,
        PieceKind::Bishop => 320,
        PieceKind::Rook => 500,
        PieceKind::Queen => 900,
        PieceKind::King => 0,
    }
}

enum Score {
    Cp(i64),
    Mate(i64),
}

fn material_scores(pos: &Position) -> Vec<(Move, Score)> {
    let us = pos.side_to_move();
    pos.legal_moves()
        .into_iter()
        .map(|m| {
            let after = pos.play(m).expect("legal move");
            if after.legal_moves().is_empty() {
                let score = if after.in_check(after.side_to_move()) { Score::Mate(1) } else { Score::Cp(0) };
                return (m, score);
            }
            let material: i64 = after
                .occupied()
                .map(|(_, p)| if p.color == us { piece_value(p.kind) } else { -piece_value(p.kind) })
                .sum();
            let (f, r) = (m.to.file() as i64, m.to.rank() as i64);
            let centre = 7 - ((2 * f - 7).abs() + (2 * r - 7).abs()) / 2;
            (m, Score::Cp(material + centre))
        })
        .collect()
}

fn planted_scores(oracle: &PlantedOracle, pos: &Position) -> Vec<(Move, Score)> {
    let (best, value) = oracle.planted_value(pos).unwrap_or_default();
    pos.legal_moves()
        .into_iter()
        .map(|m| {
            let cp = if m.to_string() == best { (value * 100.0).round() as i64 } else { 0 };
            (m, Score::Cp(cp))
        })
        .collect()
}

fn rank(score: &Score) -> i64 {
    match score {
        Score::Mate(n) => 1_000_000 - n,
        Score::Cp(cp) => *cp,
    }
}

fn main() -> io::Result<()> {
    let args = Args::parse();
    let planted = match &args.planted {
        Some(path) => {
            let entries = load_dataset(path).map_err(io::Error::other)?;
            Some(PlantedOracle::new(&entries).map_err(io::Error::other)?)
        }
        None => None,
    };
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let mut pos = Position::start();
    let mut multipv = 1usize;
    for line in stdin.lock().lines() {
        let line = line?;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["uci"] => writeln!(out, "id name sarfa-stub-uci\nid author sarfa\nuciok")?,
            ["isready"] => writeln!(out, "readyok")?,
            ["setoption", "name", "MultiPV", "value", n] => multipv = n.parse().unwrap_or(1).max(1),
            ["position", "startpos", rest @ ..] | ["position", "fen", rest @ ..] => {
                let (fen_words, moves) = match rest.iter().position(|w| *w == "moves") {
                    Some(i) => (&rest[..i], &rest[i + 1..]),
                    None => (rest, &[][..]),
                };
                pos = if words[1] == "startpos" {
                    Position::start()
                } else {
                    Position::from_fen(&fen_words.join(" ")).unwrap_or_else(|_| Position::start())
                };
                for m in moves {
                    if let Some(next) = pos.parse_move(m).and_then(|mv| pos.play(mv)) {
                        pos = next;
                    }
                }
            }
            ["go", ..] => {
                let mut scored = match &planted {
                    Some(oracle) => planted_scores(oracle, &pos),
                    None => material_scores(&pos),
                };
                scored.sort_by(|a, b| rank(&b.1).cmp(&rank(&a.1)).then_with(|| a.0.to_string().cmp(&b.0.to_string())));
                if scored.is_empty() {
                    writeln!(out, "info depth 0 score mate 0\nbestmove (none)")?;
                } else {
                    for (i, (m, s)) in scored.iter().take(multipv).enumerate() {
                        let score = match s {
                            Score::Cp(cp) => format!("cp {cp}"),
                            Score::Mate(n) => format!("mate {n}"),
                        };
                        writeln!(out, "info depth 1 multipv {} score {score} pv {m}", i + 1)?;
                    }
                    writeln!(out, "bestmove {}", scored[0].0)?;
                }
            }
            ["quit"] => break,
            _ => {}
        }
        out.flush()?;
    }
    Ok(())
}
