use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colormap {
    /// Pure red whose opacity follows the score.
    #[default]
    RedAlpha,
    /// Viridis hue with opacity following the score.
    Viridis,
}

impl std::str::FromStr for Colormap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "red_alpha" => Ok(Colormap::RedAlpha),
            "viridis" => Ok(Colormap::Viridis),
            other => Err(format!("unknown colormap `{other}` (expected red_alpha or viridis)")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StyleError {
    #[error("heatmap range is empty: min {min} must be below max {max}")]
    EmptyRange { min: f64, max: f64 },
    #[error("opacity must lie in (0, 1], got {0}")]
    Opacity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapStyle {
    pub colormap: Colormap,
    pub min: f64,
    pub max: f64,
    pub opacity: f64,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        HeatmapStyle { colormap: Colormap::RedAlpha, min: 0.0, max: 1.0, opacity: 0.8 }
    }
}

const VIRIDIS: [[u8; 3]; 11] = [
    [68, 1, 84],
    [72, 36, 117],
    [65, 68, 135],
    [53, 95, 141],
    [42, 120, 142],
    [33, 145, 140],
    [34, 168, 132],
    [68, 191, 112],
    [122, 209, 81],
    [189, 223, 38],
    [253, 231, 37],
];

impl HeatmapStyle {
    pub fn new(colormap: Colormap, min: f64, max: f64, opacity: f64) -> Result<Self, StyleError> {
        let style = HeatmapStyle { colormap, min, max, opacity };
        style.validate()?;
        Ok(style)
    }

    pub fn validate(&self) -> Result<(), StyleError> {
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(StyleError::EmptyRange { min: self.min, max: self.max });
        }
        if !(self.opacity > 0.0 && self.opacity <= 1.0) {
            return Err(StyleError::Opacity(self.opacity));
        }
        Ok(())
    }

    /// Score clamped to the range and scaled to [0, 1]; NaN counts as 0.
    pub fn level(&self, score: f64) -> f64 {
        let t = (score - self.min) / (self.max - self.min);
        if t.is_nan() {
            0.0
        } else {
            t.clamp(0.0, 1.0)
        }
    }

    pub fn alpha(&self, score: f64) -> f64 {
        self.level(score) * self.opacity
    }

    pub fn color(&self, score: f64) -> [u8; 3] {
        match self.colormap {
            Colormap::RedAlpha => [255, 0, 0],
            Colormap::Viridis => {
                let pos = self.level(score) * (VIRIDIS.len() - 1) as f64;
                let lo = (pos.floor() as usize).min(VIRIDIS.len() - 2);
                let t = pos - lo as f64;
                let mix = |i: usize| (VIRIDIS[lo][i] as f64 * (1.0 - t) + VIRIDIS[lo + 1][i] as f64 * t).round() as u8;
                [mix(0), mix(1), mix(2)]
            }
        }
    }
}
