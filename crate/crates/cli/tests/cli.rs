use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::{GrayImage, Luma};

fn rtvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtvar")).args(args).output().unwrap()
}

fn save(path: &Path, w: u32, h: u32, f: impl Fn(u32, u32) -> u8) -> PathBuf {
    GrayImage::from_fn(w, h, |i, j| Luma([f(i, j)])).save(path).unwrap();
    path.to_path_buf()
}

fn square(dir: &Path) -> PathBuf {
    save(&dir.join("in.pgm"), 12, 10, |i, j| {
        if (3..8).contains(&i) && (3..7).contains(&j) {
            255
        } else {
            0
        }
    })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn parse_diagnostics(stdout: &str) -> Vec<f64> {
    let line = stdout.lines().find(|l| l.starts_with("H_TV=")).unwrap();
    line.split_whitespace()
        .take(3)
        .map(|kv| kv.split('=').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn fully_known_mask_returns_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = square(dir.path());
    let mask = save(&dir.path().join("mask.pgm"), 12, 10, |_, _| 255);
    let out = dir.path().join("out.pgm");
    let report = dir.path().join("report.csv");
    let o = rtvar(&[
        "inpaint",
        s(&input),
        "--mask",
        s(&mask),
        "-o",
        s(&out),
        "--ntheta",
        "8",
        "--iters",
        "300",
        "--report",
        s(&report),
    ]);
    assert!(
        matches!(o.status.code(), Some(0 | 2)),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(
        image::open(&input).unwrap().to_luma8(),
        image::open(&out).unwrap().to_luma8()
    );
    let csv = std::fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("iter,energy,div_res,cons_res\n"));
    assert_eq!(csv.lines().count(), 1 + 4);
}

#[test]
fn flat_image_converges_with_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(&dir.path().join("flat.png"), 9, 7, |_, _| 100);
    let mask = save(&dir.path().join("mask.png"), 9, 7, |i, _| if i == 4 { 0 } else { 255 });
    let out = dir.path().join("out.png");
    let o = rtvar(&[
        "complete",
        s(&input),
        "--mask",
        s(&mask),
        "--ntheta",
        "8",
        "-o",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("converged=true"));
    let img = image::open(&out).unwrap().to_luma8();
    assert!(img.pixels().all(|p| p.0[0] == 100));
}

#[test]
fn iteration_budget_exhaustion_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("disk.png");
    let o = rtvar(&[
        "disk",
        "--size",
        "16",
        "--radius",
        "5",
        "--band",
        "4",
        "--ntheta",
        "8",
        "--iters",
        "30",
        "-o",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let img = image::open(&out).unwrap().to_luma8();
    assert_eq!(img.dimensions(), (16, 16));
    assert_eq!(img.get_pixel(8, 8).0[0], 255);
    assert_eq!(img.get_pixel(0, 0).0[0], 0);
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.png");
    assert_eq!(rtvar(&["denoise", s(&missing)]).status.code(), Some(1));
    assert_eq!(rtvar(&["frobnicate"]).status.code(), Some(1));
    let input = square(dir.path());
    // mask of the wrong size
    let mask = save(&dir.path().join("m.png"), 4, 4, |_, _| 255);
    assert_eq!(
        rtvar(&["complete", s(&input), "--mask", s(&mask)]).status.code(),
        Some(1)
    );
    // invalid parameter
    let o = rtvar(&[
        "shapereg",
        s(&input),
        "--alpha",
        "-1",
        "-o",
        s(&dir.path().join("x.png")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(rtvar(&["--help"]).status.code(), Some(0));
}

#[test]
fn exported_field_reproduces_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let input = square(dir.path());
    let mask = save(&dir.path().join("mask.png"), 12, 10, |i, _| {
        if (5..8).contains(&i) {
            0
        } else {
            255
        }
    });
    let field = dir.path().join("field.csv");
    let o = rtvar(&[
        "complete",
        s(&input),
        "--mask",
        s(&mask),
        "--ntheta",
        "8",
        "--iters",
        "400",
        "--export-field",
        s(&field),
        "-o",
        s(&dir.path().join("c.png")),
    ]);
    assert!(matches!(o.status.code(), Some(0 | 2)));
    let first = parse_diagnostics(&String::from_utf8_lossy(&o.stdout));
    assert!(first[0] > 0.0);
    let o = rtvar(&["diagnose", s(&field)]);
    assert_eq!(o.status.code(), Some(0));
    let again = parse_diagnostics(&String::from_utf8_lossy(&o.stdout));
    for (a, b) in first.iter().zip(&again) {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }
    let text = std::fs::read_to_string(&field).unwrap();
    assert_eq!(text.lines().count(), 1 + 11 * 9 * 8);
}

#[test]
fn heavy_fidelity_keeps_the_noisy_image() {
    let dir = tempfile::tempdir().unwrap();
    let input = square(dir.path());
    let noisy = dir.path().join("noisy.pgm");
    let out = dir.path().join("den.pgm");
    let o = rtvar(&[
        "denoise",
        s(&input),
        "--salt-pepper",
        "0.2",
        "--seed",
        "4",
        "--save-noisy",
        s(&noisy),
        "--lambda",
        "1e9",
        "--ntheta",
        "8",
        "--iters",
        "200",
        "-o",
        s(&out),
    ]);
    assert!(
        matches!(o.status.code(), Some(0 | 2)),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let a = image::open(&noisy).unwrap().to_luma8();
    let b = image::open(&out).unwrap().to_luma8();
    assert_ne!(a, image::open(&input).unwrap().to_luma8());
    for (p, q) in a.pixels().zip(b.pixels()) {
        assert!(p.0[0].abs_diff(q.0[0]) <= 1);
    }
}

#[test]
fn generated_masks_are_seeded_and_saved() {
    let dir = tempfile::tempdir().unwrap();
    let input = square(dir.path());
    let run = |seed: &str, name: &str| {
        let m = dir.path().join(name);
        let o = rtvar(&[
            "inpaint",
            s(&input),
            "--remove-pixels",
            "0.5",
            "--seed",
            seed,
            "--save-mask",
            s(&m),
            "--ntheta",
            "4",
            "--iters",
            "20",
            "-o",
            s(&dir.path().join("i.png")),
        ]);
        assert_eq!(o.status.code(), Some(2));
        image::open(&m).unwrap().to_luma8()
    };
    let (a, b, c) = (run("1", "a.png"), run("1", "b.png"), run("2", "c.png"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.pixels().filter(|p| p.0[0] == 0).count(), 60);
}

#[test]
fn unconstrained_problem_warns() {
    let dir = tempfile::tempdir().unwrap();
    let input = square(dir.path());
    let mask = save(&dir.path().join("mask.png"), 12, 10, |_, _| 0);
    let o = rtvar(&[
        "inpaint",
        s(&input),
        "--mask",
        s(&mask),
        "--ntheta",
        "4",
        "--iters",
        "10",
        "-o",
        s(&dir.path().join("u.png")),
    ]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ties no pixel"));
}
