use sarfa_core::{map_with_pool, score_feature, FeatureStatus, Method, QOracle, QProfile, SaliencyError, ScoreBreakdown, SessionPool};
use serde::Serialize;
use thiserror::Error;

use crate::blur::{blend, gaussian_blur, BlurSpec};
use crate::frame::{Frame, FrameError};

/// Scores on the grid of perturbation centers, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaliencyGrid {
    pub cols: usize,
    pub rows: usize,
    pub centers_x: Vec<usize>,
    pub centers_y: Vec<usize>,
    pub values: Vec<f64>,
}

fn centers(len: usize, stride: usize) -> Vec<usize> {
    (0..len.div_ceil(stride))
        .map(|i| {
            let start = i * stride;
            let end = (start + stride).min(len);
            (start + end - 1) / 2
        })
        .collect()
}

/// Position of `p` between neighbouring centers: (lower index, upper index, weight of upper).
fn bracket(centers: &[usize], p: usize) -> (usize, usize, f64) {
    let last = centers.len() - 1;
    if p <= centers[0] {
        return (0, 0, 0.0);
    }
    if p >= centers[last] {
        return (last, last, 0.0);
    }
    let hi = centers.partition_point(|&c| c <= p);
    let lo = hi - 1;
    let t = (p - centers[lo]) as f64 / (centers[hi] - centers[lo]) as f64;
    (lo, hi, t)
}

impl SaliencyGrid {
    pub(crate) fn for_frame(width: usize, height: usize, stride: usize) -> Self {
        let (centers_x, centers_y) = (centers(width, stride), centers(height, stride));
        SaliencyGrid {
            cols: centers_x.len(),
            rows: centers_y.len(),
            values: vec![0.0; centers_x.len() * centers_y.len()],
            centers_x,
            centers_y,
        }
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// Grid cell holding the largest score; the first one on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        (best % self.cols, best / self.cols)
    }

    /// Bilinear interpolation between centers, held constant past the outermost ones.
    pub fn upsample(&self, width: usize, height: usize) -> Vec<f64> {
        let xs: Vec<_> = (0..width).map(|x| bracket(&self.centers_x, x)).collect();
        let mut out = Vec::with_capacity(width * height);
        for y in 0..height {
            let (r0, r1, ty) = bracket(&self.centers_y, y);
            for &(c0, c1, tx) in &xs {
                let top = self.get(c0, r0) * (1.0 - tx) + self.get(c1, r0) * tx;
                let bottom = self.get(c0, r1) * (1.0 - tx) + self.get(c1, r1) * tx;
                out.push(top * (1.0 - ty) + bottom * ty);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSaliency {
    pub selected: String,
    pub method: Method,
    pub spec: BlurSpec,
    pub original: QProfile,
    /// Skipped centers hold 0.
    pub grid: SaliencyGrid,
    pub breakdowns: Vec<ScoreBreakdown>,
}

#[derive(Debug, Error)]
pub enum FrameSaliencyError<E: std::error::Error + 'static> {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("evaluating the unperturbed frame failed: {0}")]
    Oracle(#[source] E),
    #[error("the agent reported no value for the explained action `{0}`")]
    SelectedNotEvaluated(String),
    #[error(transparent)]
    Saliency(#[from] SaliencyError),
}

struct Job<'a> {
    frame: &'a Frame,
    blurred: Frame,
    original: QProfile,
    selected: &'a str,
    spec: BlurSpec,
    method: Method,
    temperature: f64,
    grid: SaliencyGrid,
}

impl Job<'_> {
    fn center(&self, i: usize) -> (usize, usize) {
        (self.grid.centers_x[i % self.grid.cols], self.grid.centers_y[i / self.grid.cols])
    }

    fn score<O: QOracle<Frame>>(&self, i: usize, oracle: &mut O) -> ScoreBreakdown {
        let (x, y) = self.center(i);
        let name = format!("{x},{y}");
        let invalid = || ScoreBreakdown::skipped(name.clone(), FeatureStatus::SkippedInvalidPerturbation);
        let Ok(perturbed) = blend(self.frame, &self.blurred, (x, y), self.spec.sigma_mask) else {
            return invalid();
        };
        let Ok(q) = oracle.evaluate(&perturbed) else {
            return invalid();
        };
        score_feature(self.method, &self.original, &q.with_state_id(name.clone()), self.selected, self.temperature)
            .unwrap_or_else(|_| invalid())
    }

    fn finish(mut self, breakdowns: Vec<ScoreBreakdown>) -> FrameSaliency {
        for (v, b) in self.grid.values.iter_mut().zip(&breakdowns) {
            *v = if b.status.is_skipped() { 0.0 } else { b.score };
        }
        FrameSaliency {
            selected: self.selected.to_owned(),
            method: self.method,
            spec: self.spec,
            original: self.original,
            grid: self.grid,
            breakdowns,
        }
    }
}

fn prepare<'a, O: QOracle<Frame>>(
    frame: &'a Frame,
    selected: &'a str,
    oracle: &mut O,
    spec: &BlurSpec,
    method: Method,
    temperature: f64,
) -> Result<Job<'a>, FrameSaliencyError<O::Error>> {
    spec.validate()?;
    let original = oracle.evaluate(frame).map_err(FrameSaliencyError::Oracle)?;
    if !original.contains(selected) {
        return Err(FrameSaliencyError::SelectedNotEvaluated(selected.to_owned()));
    }
    Ok(Job {
        frame,
        blurred: gaussian_blur(frame, spec.sigma_blur),
        original,
        selected,
        spec: *spec,
        method,
        temperature,
        grid: SaliencyGrid::for_frame(frame.width(), frame.height(), spec.stride),
    })
}

/// Saliency of every stride-grid center for `selected`. Centers whose
/// evaluation fails are skipped; only a failure on the original frame is fatal.
pub fn compute_frame_saliency<O: QOracle<Frame>>(
    frame: &Frame,
    selected: &str,
    oracle: &mut O,
    spec: &BlurSpec,
    method: Method,
    temperature: f64,
) -> Result<FrameSaliency, FrameSaliencyError<O::Error>> {
    let job = prepare(frame, selected, oracle, spec, method, temperature)?;
    let breakdowns = (0..job.grid.values.len()).map(|i| job.score(i, oracle)).collect();
    Ok(job.finish(breakdowns))
}

/// As [`compute_frame_saliency`], spreading the centers over the sessions of `pool`.
pub fn compute_frame_saliency_pooled<O: QOracle<Frame> + Send>(
    frame: &Frame,
    selected: &str,
    pool: &SessionPool<O>,
    spec: &BlurSpec,
    method: Method,
    temperature: f64,
) -> Result<FrameSaliency, FrameSaliencyError<O::Error>> {
    let job = prepare(frame, selected, &mut *pool.lease(), spec, method, temperature)?;
    let breakdowns = map_with_pool(pool, job.grid.values.len(), |oracle, i| job.score(i, oracle));
    Ok(job.finish(breakdowns))
}
