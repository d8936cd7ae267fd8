use std::collections::BTreeMap;
use std::path::PathBuf;

use sarfa_chess::{Position, Square};
use sarfa_image::Frame;
use sarfa_render::{chess_svg, overlay_frame, Colormap, HeatmapStyle, RenderError};

fn sq(name: &str) -> Square {
    name.parse().unwrap()
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn zero_scores_leave_board_untinted() {
    let pos = Position::start();
    let scores: BTreeMap<Square, f64> = pos.occupied().map(|(s, _)| (s, 0.0)).collect();
    let svg = chess_svg(&pos, &scores, &HeatmapStyle::default());
    assert!(!svg.contains("class=\"heat\""));
    assert_eq!(svg.matches("<rect").count(), 64);
    assert_eq!(svg.matches("<text").count(), 32);
}

#[test]
fn single_score_tints_one_cell() {
    let pos = Position::start();
    let scores = BTreeMap::from([(sq("a4"), 1.0), (sq("e2"), 0.0)]);
    let svg = chess_svg(&pos, &scores, &HeatmapStyle::default());
    assert_eq!(svg.matches("class=\"heat\"").count(), 1);
    assert!(svg.contains(r##"data-square="a4" x="0" y="180" width="45" height="45" fill="#ff0000" fill-opacity="0.8000""##));
}

#[test]
fn board_matches_golden_file() {
    let pos = Position::from_fen("r1bqkbnr/pppp1ppp/2n5/4p3/2B1P3/5N2/PPPP1PPP/RNBQK2R b KQkq - 3 3").unwrap();
    let scores = BTreeMap::from([(sq("c4"), 0.9), (sq("f3"), 0.35), (sq("e5"), 0.05), (sq("c6"), 0.0)]);
    for (style, file) in [
        (HeatmapStyle::default(), "italian_red.svg"),
        (HeatmapStyle { colormap: Colormap::Viridis, opacity: 0.6, ..Default::default() }, "italian_viridis.svg"),
    ] {
        let svg = chess_svg(&pos, &scores, &style);
        assert_eq!(svg, chess_svg(&pos, &scores, &style));
        let path = golden(file);
        if std::env::var_os("SARFA_UPDATE_GOLDEN").is_some() {
            std::fs::write(&path, &svg).unwrap();
        }
        assert_eq!(svg, std::fs::read_to_string(&path).unwrap(), "{file}");
    }
}

fn gradient() -> Frame {
    Frame::new(6, 4, (0..24).map(|i| i as f64 / 23.0).collect()).unwrap()
}

#[test]
fn zero_heat_reproduces_the_frame() {
    let f = gradient();
    let o = overlay_frame(&f, &[0.0; 24], &HeatmapStyle::default()).unwrap();
    let expected: Vec<u8> = f.to_bytes().iter().flat_map(|b| [*b; 3]).collect();
    assert_eq!(o.rgb, expected);
    let mut pgm = Vec::new();
    o.write_pgm(&mut pgm, "made by a test").unwrap();
    assert!(pgm.starts_with(b"P5\n# made by a test\n6 4\n255\n"));
    assert_eq!(Frame::read_pgm(&pgm[..]).unwrap().to_bytes(), f.to_bytes());
}

#[test]
fn uniform_heat_gives_uniform_tint() {
    let f = Frame::filled(5, 5, 0.5).unwrap();
    let style = HeatmapStyle { colormap: Colormap::Viridis, ..Default::default() };
    let o = overlay_frame(&f, &[0.7; 25], &style).unwrap();
    let first = &o.rgb[..3];
    assert!(o.rgb.chunks(3).all(|p| p == first));
    assert_ne!(first, [128, 128, 128]);
}

#[test]
fn dimension_mismatch() {
    assert!(matches!(
        overlay_frame(&gradient(), &[0.0; 23], &HeatmapStyle::default()),
        Err(RenderError::DimensionMismatch { expected: 24, actual: 23 })
    ));
}

#[test]
fn png_output_is_byte_stable() {
    let f = gradient();
    let heat: Vec<f64> = (0..24).map(|i| (i % 5) as f64 / 4.0).collect();
    let o = overlay_frame(&f, &heat, &HeatmapStyle::default()).unwrap();
    let dir = tempfile::TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    o.save_png(&a, "{\"schema\":1}").unwrap();
    overlay_frame(&f, &heat, &HeatmapStyle::default()).unwrap().save_png(&b, "{\"schema\":1}").unwrap();
    let bytes = std::fs::read(&a).unwrap();
    assert!(bytes.starts_with(b"\x89PNG"));
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert!(bytes.windows(7).any(|w| w == b"Comment"));
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    reader.next_frame(&mut buf).unwrap();
    assert_eq!(&buf[..o.rgb.len()], &o.rgb[..]);
}
