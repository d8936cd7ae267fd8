use std::io::{self, Write};
use std::path::Path;

use sarfa_image::Frame;
use thiserror::Error;

use crate::style::HeatmapStyle;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("heatmap has {actual} values, frame has {expected} pixels")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Png(#[from] png::EncodingError),
}

/// RGB raster of a frame with a heatmap blended over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overlay {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<u8>,
}

/// Blends `heat` (one value per pixel, row-major) over the first channel of `frame`.
pub fn overlay_frame(frame: &Frame, heat: &[f64], style: &HeatmapStyle) -> Result<Overlay, RenderError> {
    let n = frame.width() * frame.height();
    if heat.len() != n {
        return Err(RenderError::DimensionMismatch { expected: n, actual: heat.len() });
    }
    let mut rgb = Vec::with_capacity(n * 3);
    for (gray, h) in frame.to_bytes()[..n].iter().zip(heat) {
        let a = style.alpha(*h);
        for c in style.color(*h) {
            rgb.push(if a == 0.0 {
                *gray
            } else {
                ((1.0 - a) * *gray as f64 + a * c as f64).round() as u8
            });
        }
    }
    Ok(Overlay { width: frame.width() as u32, height: frame.height() as u32, rgb })
}

impl Overlay {
    /// 8-bit RGB PNG; a non-empty `metadata` is stored as a `Comment` text chunk.
    pub fn write_png(&self, out: impl Write, metadata: &str) -> Result<(), RenderError> {
        let mut encoder = png::Encoder::new(out, self.width, self.height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        if !metadata.is_empty() {
            encoder.add_text_chunk("Comment".to_owned(), metadata.to_owned())?;
        }
        let mut writer = encoder.write_header()?;
        writer.write_image_data(&self.rgb)?;
        writer.finish()?;
        Ok(())
    }

    pub fn save_png(&self, path: impl AsRef<Path>, metadata: &str) -> Result<(), RenderError> {
        let mut file = io::BufWriter::new(std::fs::File::create(path)?);
        self.write_png(&mut file, metadata)?;
        file.flush()?;
        Ok(())
    }

    /// Luma (ITU-R 601) of the blended image as a binary PGM, with each line
    /// of `metadata` as a header comment.
    pub fn write_pgm(&self, mut out: impl Write, metadata: &str) -> Result<(), RenderError> {
        out.write_all(b"P5\n")?;
        for line in metadata.lines() {
            writeln!(out, "# {line}")?;
        }
        write!(out, "{} {}\n255\n", self.width, self.height)?;
        let luma: Vec<u8> = self
            .rgb
            .chunks_exact(3)
            .map(|p| ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000) as u8)
            .collect();
        out.write_all(&luma)?;
        Ok(())
    }
}
