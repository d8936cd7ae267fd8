//! Heatmap rendering: chessboards as SVG, frames as PNG or PGM.

mod board;
mod overlay;
mod style;

pub use board::chess_svg;
pub use overlay::{overlay_frame, Overlay, RenderError};
pub use style::{Colormap, HeatmapStyle, StyleError};
