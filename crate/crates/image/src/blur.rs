use serde::{Deserialize, Serialize};

use crate::frame::{Frame, FrameError};

/// Localized blur settings, all in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurSpec {
    pub sigma_blur: f64,
    pub sigma_mask: f64,
    pub stride: usize,
}

impl Default for BlurSpec {
    fn default() -> Self {
        BlurSpec { sigma_blur: 3.0, sigma_mask: 5.0, stride: 5 }
    }
}

impl BlurSpec {
    pub fn validate(&self) -> Result<(), FrameError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.sigma_blur) {
            return Err(FrameError::InvalidSpec(format!("sigma_blur must be positive, got {}", self.sigma_blur)));
        }
        if !positive(self.sigma_mask) {
            return Err(FrameError::InvalidSpec(format!("sigma_mask must be positive, got {}", self.sigma_mask)));
        }
        if self.stride == 0 {
            return Err(FrameError::InvalidSpec("stride must be at least 1".into()));
        }
        Ok(())
    }
}

fn kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// One pass along a line of `len` samples spaced `step` apart. Written as an
/// offset from the source value so that flat regions come back bit-exact.
fn convolve_line(src: &[f64], dst: &mut [f64], start: usize, len: usize, step: usize, k: &[f64]) {
    let radius = (k.len() / 2) as isize;
    for i in 0..len {
        let centre = src[start + i * step];
        let mut acc = 0.0;
        for (j, w) in k.iter().enumerate() {
            let at = (i as isize + j as isize - radius).clamp(0, len as isize - 1) as usize;
            acc += w * (src[start + at * step] - centre);
        }
        dst[start + i * step] = centre + acc;
    }
}

/// Separable Gaussian blur with edge samples repeated past the border.
pub fn gaussian_blur(frame: &Frame, sigma: f64) -> Frame {
    let k = kernel(sigma);
    let (w, h) = (frame.width(), frame.height());
    let mut horizontal = frame.pixels().to_vec();
    for c in 0..frame.channels() {
        for y in 0..h {
            convolve_line(frame.pixels(), &mut horizontal, frame.index(c, 0, y), w, 1, &k);
        }
    }
    let mut out = horizontal.clone();
    for c in 0..frame.channels() {
        for x in 0..w {
            convolve_line(&horizontal, &mut out, frame.index(c, x, 0), h, w, &k);
        }
    }
    for v in &mut out {
        *v = v.clamp(0.0, 1.0);
    }
    frame.from_parts_unchecked(out)
}

pub(crate) fn blend(frame: &Frame, blurred: &Frame, center: (usize, usize), sigma_mask: f64) -> Result<Frame, FrameError> {
    let (cx, cy) = center;
    let (w, h) = (frame.width(), frame.height());
    if cx >= w || cy >= h {
        return Err(FrameError::CenterOutOfBounds { x: cx, y: cy, width: w, height: h });
    }
    let denom = 2.0 * sigma_mask * sigma_mask;
    let mut out = frame.pixels().to_vec();
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 - cx as f64, y as f64 - cy as f64);
            let m = (-(dx * dx + dy * dy) / denom).exp().clamp(0.0, 1.0);
            if m == 0.0 {
                continue;
            }
            for c in 0..frame.channels() {
                let i = frame.index(c, x, y);
                out[i] = (out[i] + m * (blurred.pixels()[i] - out[i])).clamp(0.0, 1.0);
            }
        }
    }
    Ok(frame.from_parts_unchecked(out))
}

/// Interpolates between `frame` and its blur with a Gaussian mask of peak 1
/// at `center`. All channels are perturbed at the same center.
pub fn perturb_frame(frame: &Frame, center: (usize, usize), spec: &BlurSpec) -> Result<Frame, FrameError> {
    spec.validate()?;
    blend(frame, &gaussian_blur(frame, spec.sigma_blur), center, spec.sigma_mask)
}
