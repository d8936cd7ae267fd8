use std::io::Write;
use std::os::unix::fs::PermissionsExt;

use proptest::prelude::*;
use sarfa_agents::OracleConfig;
use sarfa_core::{FeatureStatus, FnOracle, Method, QProfile, SessionPool};
use sarfa_image::{
    compute_frame_saliency, compute_frame_saliency_pooled, gaussian_blur, perturb_frame, BlurSpec, Frame, FrameAgent,
};

#[derive(Debug, thiserror::Error)]
#[error("stub")]
struct Stub;

fn frame_strategy() -> impl Strategy<Value = Frame> {
    (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0f64..=1.0, w * h).prop_map(move |p| Frame::new(w, h, p).unwrap())
    })
}

/// Direct 2D convolution with a normalized, truncated Gaussian and
/// edge-replicated borders.
fn reference_blur(f: &Frame, sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil() as i64;
    let g = |d: i64| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp();
    let norm: f64 = (-r..=r).map(g).sum();
    let (w, h) = (f.width() as i64, f.height() as i64);
    let mut out = vec![0.0; f.pixels().len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let sx = (x + dx).clamp(0, w - 1) as usize;
                    let sy = (y + dy).clamp(0, h - 1) as usize;
                    acc += g(dx) * g(dy) * f.get(0, sx, sy);
                }
            }
            out[(y * w + x) as usize] = acc / (norm * norm);
        }
    }
    out
}

#[test]
fn single_white_pixel_matches_direct_convolution() {
    let mut pixels = vec![0.0; 81];
    pixels[4 * 9 + 4] = 1.0;
    let f = Frame::new(9, 9, pixels).unwrap();
    let spec = BlurSpec { sigma_blur: 4.0, sigma_mask: 5.0, stride: 1 };
    let blurred = gaussian_blur(&f, spec.sigma_blur);
    let reference = reference_blur(&f, spec.sigma_blur);
    for (a, b) in blurred.pixels().iter().zip(&reference) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    // Mask peak is 1, so the center takes the blurred value.
    let out = perturb_frame(&f, (4, 4), &spec).unwrap();
    assert!((out.get(0, 4, 4) - reference[40]).abs() < 1e-12);
    assert!(out.get(0, 4, 4) < 1.0);
    let m = (-1.0f64 / 50.0).exp();
    assert!((out.get(0, 5, 4) - m * reference[41]).abs() < 1e-12);
}

#[test]
fn constant_frames_are_untouched() {
    for v in [0.0, 0.5, 1.0, 0.123] {
        let f = Frame::filled(13, 7, v).unwrap();
        for center in [(0, 0), (6, 3), (12, 6)] {
            assert_eq!(perturb_frame(&f, center, &BlurSpec::default()).unwrap(), f);
        }
    }
}

#[test]
fn far_field_is_unchanged() {
    let spec = BlurSpec { sigma_blur: 3.0, sigma_mask: 2.0, stride: 1 };
    let pixels: Vec<f64> = (0..40 * 40).map(|i| ((i * 7919) % 101) as f64 / 100.0).collect();
    let f = Frame::new(40, 40, pixels).unwrap();
    let out = perturb_frame(&f, (5, 5), &spec).unwrap();
    for y in 0..40 {
        for x in 0..40 {
            let d = ((x as f64 - 5.0).powi(2) + (y as f64 - 5.0).powi(2)).sqrt();
            if d >= 6.0 * spec.sigma_mask {
                assert!((out.get(0, x, y) - f.get(0, x, y)).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn channels_are_perturbed_together() {
    let mut a = vec![0.0; 25];
    a[12] = 1.0;
    let fa = Frame::new(5, 5, a).unwrap();
    let fb = Frame::filled(5, 5, 0.3).unwrap();
    let stacked = Frame::stack(&[fa.clone(), fb.clone()]).unwrap();
    let spec = BlurSpec { sigma_blur: 1.0, sigma_mask: 1.0, stride: 1 };
    let out = perturb_frame(&stacked, (2, 2), &spec).unwrap();
    let single = perturb_frame(&fa, (2, 2), &spec).unwrap();
    assert_eq!(&out.pixels()[..25], single.pixels());
    assert_eq!(&out.pixels()[25..], fb.pixels());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn perturbation_stays_in_range(f in frame_strategy(), sb in 0.2f64..6.0, sm in 0.2f64..6.0, cx in 0usize..12, cy in 0usize..12) {
        let spec = BlurSpec { sigma_blur: sb, sigma_mask: sm, stride: 1 };
        let center = (cx % f.width(), cy % f.height());
        let out = perturb_frame(&f, center, &spec).unwrap();
        prop_assert_eq!((out.width(), out.height()), (f.width(), f.height()));
        prop_assert!(out.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn grid_dimensions(w in 1usize..40, h in 1usize..40, stride in 1usize..12) {
        let f = Frame::filled(w, h, 0.5).unwrap();
        let fixed = QProfile::new("s", [("a".to_string(), 1.0), ("b".to_string(), 0.0)]).unwrap();
        let mut oracle = FnOracle(move |_: &Frame| -> Result<QProfile, Stub> { Ok(fixed.clone()) });
        let spec = BlurSpec { stride, ..Default::default() };
        let s = compute_frame_saliency(&f, "a", &mut oracle, &spec, Method::default(), 1.0).unwrap();
        prop_assert_eq!(s.grid.cols, w.div_ceil(stride));
        prop_assert_eq!(s.grid.rows, h.div_ceil(stride));
        prop_assert_eq!(s.grid.upsample(w, h).len(), w * h);
        prop_assert!(s.grid.values.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn stride_equal_to_width_gives_one_column() {
    let f = Frame::filled(12, 10, 0.2).unwrap();
    let mut evaluated = Vec::new();
    let mut oracle = FnOracle(|fr: &Frame| -> Result<QProfile, Stub> {
        evaluated.push(fr.clone());
        QProfile::new("s", [("a".to_string(), 0.0)]).map_err(|_| Stub)
    });
    let spec = BlurSpec { stride: 12, ..Default::default() };
    let s = compute_frame_saliency(&f, "a", &mut oracle, &spec, Method::default(), 1.0).unwrap();
    assert_eq!(s.grid.cols, 1);
    assert_eq!(s.grid.rows, 1);
    assert_eq!(s.grid.centers_x, [5]);
    assert_eq!(evaluated.len(), 2);
}

/// Q of `fire` is proportional to the intensity of one pixel; the other
/// actions are fixed.
fn planted(px: usize, py: usize) -> impl FnMut(&Frame) -> Result<QProfile, Stub> + Clone {
    move |f: &Frame| {
        QProfile::new(
            "s",
            [("noop".to_string(), 0.0), ("left".to_string(), 1.0), ("fire".to_string(), 3.0 * f.get(0, px, py))],
        )
        .map_err(|_| Stub)
    }
}

#[test]
fn planted_pixel_is_found_at_every_location() {
    let (w, h) = (15, 15);
    for stride in [3, 5] {
        let spec = BlurSpec { sigma_blur: 2.0, sigma_mask: 2.0, stride };
        for py in 0..h {
            for px in 0..w {
                let mut pixels = vec![0.2; w * h];
                pixels[py * w + px] = 1.0;
                let f = Frame::new(w, h, pixels).unwrap();
                let s = compute_frame_saliency(&f, "fire", &mut FnOracle(planted(px, py)), &spec, Method::default(), 1.0)
                    .unwrap();
                assert_eq!(s.grid.argmax(), (px / stride, py / stride), "pixel ({px},{py}) stride {stride}");
                let (c, r) = s.grid.argmax();
                assert!(s.grid.values.iter().enumerate().all(|(i, v)| i == r * s.grid.cols + c || *v < s.grid.get(c, r)));
            }
        }
    }
}

#[test]
fn failures_are_skipped_and_pool_matches() {
    let pixels: Vec<f64> = (0..20 * 20).map(|i| ((i * 31) % 17) as f64 / 16.0).collect();
    let f = Frame::new(20, 20, pixels).unwrap();
    let spec = BlurSpec::default();
    let original = f.clone();
    let blurred = gaussian_blur(&f, spec.sigma_blur);
    // Fails only for the perturbation centered on (2, 2), where the mask peaks.
    let flaky = move |fr: &Frame| -> Result<QProfile, Stub> {
        let full = blurred.get(0, 2, 2) - original.get(0, 2, 2);
        if fr != &original && ((fr.get(0, 2, 2) - original.get(0, 2, 2)) - full).abs() < 1e-12 {
            return Err(Stub);
        }
        planted(7, 7)(fr)
    };
    let seq = compute_frame_saliency(&f, "fire", &mut FnOracle(flaky.clone()), &spec, Method::default(), 1.0).unwrap();
    assert_eq!(seq.breakdowns[0].status, FeatureStatus::SkippedInvalidPerturbation);
    assert_eq!(seq.grid.values[0], 0.0);
    assert!(seq.breakdowns[1..].iter().any(|b| b.status == FeatureStatus::Scored));
    let pool = SessionPool::new((0..3).map(|_| FnOracle(flaky.clone())).collect());
    let par = compute_frame_saliency_pooled(&f, "fire", &pool, &spec, Method::default(), 1.0).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn external_agent_with_constant_values() {
    let dir = tempfile::TempDir::new().unwrap();
    let path = dir.path().join("agent");
    let mut file = std::fs::File::create(&path).unwrap();
    writeln!(file, "#!/bin/sh\nwhile read -r line; do echo 'QVALUES noop:0 fire:1.5 left:-2'; done").unwrap();
    drop(file);
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    let mut agent = FrameAgent::open(&OracleConfig::external(&path, vec![])).unwrap();
    let f = Frame::filled(10, 10, 0.4).unwrap();
    let s = compute_frame_saliency(&f, "fire", &mut agent, &BlurSpec::default(), Method::default(), 1.0).unwrap();
    assert_eq!(s.grid.values, vec![0.0; 4]);
    assert!(s.breakdowns.iter().all(|b| b.status == FeatureStatus::Scored));
}
