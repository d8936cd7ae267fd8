use std::collections::BTreeMap;
use std::fmt::Write;

use sarfa_chess::{Color, PieceKind, Position, Square};

use crate::style::HeatmapStyle;

const CELL: u32 = 45;
const LIGHT: &str = "#f0d9b5";
const DARK: &str = "#b58863";

fn glyph(color: Color, kind: PieceKind) -> char {
    let white = ['\u{2654}', '\u{2655}', '\u{2656}', '\u{2657}', '\u{2658}', '\u{2659}'];
    let black = ['\u{265A}', '\u{265B}', '\u{265C}', '\u{265D}', '\u{265E}', '\u{265F}'];
    let i = match kind {
        PieceKind::King => 0,
        PieceKind::Queen => 1,
        PieceKind::Rook => 2,
        PieceKind::Bishop => 3,
        PieceKind::Knight => 4,
        PieceKind::Pawn => 5,
    };
    match color {
        Color::White => white[i],
        Color::Black => black[i],
    }
}

/// White-at-the-bottom board with one tinted rectangle per square whose
/// score lies above the style minimum. Output is byte-stable for equal inputs.
pub fn chess_svg(pos: &Position, scores: &BTreeMap<Square, f64>, style: &HeatmapStyle) -> String {
    let size = CELL * 8;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    for sq in Square::all() {
        let (x, y) = (sq.file() as u32 * CELL, (7 - sq.rank() as u32) * CELL);
        let fill = if (sq.file() + sq.rank()) % 2 == 0 { DARK } else { LIGHT };
        let _ = writeln!(svg, r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"/>"#);
    }
    for (sq, score) in scores {
        let alpha = style.alpha(*score);
        if alpha <= 0.0 {
            continue;
        }
        let (x, y) = (sq.file() as u32 * CELL, (7 - sq.rank() as u32) * CELL);
        let [r, g, b] = style.color(*score);
        let _ = writeln!(
            svg,
            r##"<rect class="heat" data-square="{sq}" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}{b:02x}" fill-opacity="{alpha:.4}"/>"##
        );
    }
    for (sq, piece) in pos.occupied() {
        let x = sq.file() as u32 * CELL + CELL / 2;
        let y = (7 - sq.rank() as u32) * CELL + CELL * 3 / 4;
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y}" font-size="36" text-anchor="middle" font-family="serif">{}</text>"#,
            glyph(piece.color, piece.kind)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
