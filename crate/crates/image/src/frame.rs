use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame must be at least 1x1 with at least one channel")]
    Empty,
    #[error("expected {expected} intensities, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("intensity {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("center ({x}, {y}) is outside a {width}x{height} frame")]
    CenterOutOfBounds { x: usize, y: usize, width: usize, height: usize },
    #[error("invalid blur settings: {0}")]
    InvalidSpec(String),
    #[error("not a binary PGM: {0}")]
    Pgm(String),
    #[error("PGM output holds a single channel, frame has {0}")]
    Channels(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Grayscale frame with intensities in [0, 1]. Stacked frames are stored as
/// consecutive channels, each `width * height` values in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, FrameError> {
        Self::with_channels(width, height, 1, pixels)
    }

    pub fn with_channels(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(FrameError::Empty);
        }
        let expected = width * height * channels;
        if pixels.len() != expected {
            return Err(FrameError::SizeMismatch { expected, actual: pixels.len() });
        }
        if let Some((index, &value)) = pixels.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(FrameError::OutOfRange { index, value });
        }
        Ok(Frame { width, height, channels, pixels })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, FrameError> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Stacks single-channel frames of equal size into one multi-channel frame.
    pub fn stack(frames: &[Frame]) -> Result<Self, FrameError> {
        let first = frames.first().ok_or(FrameError::Empty)?;
        let mut pixels = Vec::with_capacity(first.pixels.len() * frames.len());
        let mut channels = 0;
        for f in frames {
            if (f.width, f.height) != (first.width, first.height) {
                return Err(FrameError::SizeMismatch { expected: first.width * first.height, actual: f.width * f.height });
            }
            pixels.extend_from_slice(&f.pixels);
            channels += f.channels;
        }
        Self::with_channels(first.width, first.height, channels, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, channel: usize, x: usize, y: usize) -> f64 {
        self.pixels[self.index(channel, x, y)]
    }

    pub(crate) fn index(&self, channel: usize, x: usize, y: usize) -> usize {
        (channel * self.height + y) * self.width + x
    }

    pub(crate) fn from_parts_unchecked(&self, pixels: Vec<f64>) -> Frame {
        Frame { pixels, ..*self }
    }

    /// Intensities quantized to bytes, channel after channel.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels.iter().map(|v| (v * 255.0).round() as u8).collect()
    }

    pub fn read_pgm(mut reader: impl Read) -> Result<Self, FrameError> {
        let mut data = Vec::new();
        reader.read_to_end(&mut data)?;
        parse_pgm(&data)
    }

    pub fn load_pgm(path: impl AsRef<Path>) -> Result<Self, FrameError> {
        Self::read_pgm(std::fs::File::open(path)?)
    }

    pub fn write_pgm(&self, mut writer: impl Write) -> Result<(), FrameError> {
        if self.channels != 1 {
            return Err(FrameError::Channels(self.channels));
        }
        write!(writer, "P5\n{} {}\n255\n", self.width, self.height)?;
        writer.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<(), FrameError> {
        let mut out = io::BufWriter::new(std::fs::File::create(path)?);
        self.write_pgm(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

fn parse_pgm(data: &[u8]) -> Result<Frame, FrameError> {
    let bad = |m: &str| FrameError::Pgm(m.to_owned());
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < data.len() && (data[pos].is_ascii_whitespace() || data[pos] == b'#') {
            if data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&data[start..pos]).map_err(|_| bad("non-ascii header"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("magic number is not P5"));
    }
    let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| bad(&format!("bad {what}")));
    let (width, height, maxval) = (num(fields[1], "width")?, num(fields[2], "height")?, num(fields[3], "maxval")?);
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let n = width * height;
    let bytes_per = if maxval < 256 { 1 } else { 2 };
    let raster = data.get(pos..pos + n * bytes_per).ok_or_else(|| bad("truncated raster"))?;
    let pixels = (0..n)
        .map(|i| {
            let raw = if bytes_per == 1 {
                raster[i] as usize
            } else {
                (raster[2 * i] as usize) << 8 | raster[2 * i + 1] as usize
            };
            (raw.min(maxval)) as f64 / maxval as f64
        })
        .collect();
    Frame::new(width, height, pixels)
}
