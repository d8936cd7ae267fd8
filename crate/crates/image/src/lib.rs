//! Frames, localized Gaussian-blur perturbations and pixel-grid saliency.

mod agent;
mod blur;
mod frame;
mod saliency;

pub use agent::FrameAgent;
pub use blur::{gaussian_blur, perturb_frame, BlurSpec};
pub use frame::{Frame, FrameError};
pub use saliency::{compute_frame_saliency, compute_frame_saliency_pooled, FrameSaliency, FrameSaliencyError, SaliencyGrid};
