//! Grayscale image and mask files. Values map linearly between `0..=255` and `[0, 1]`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, GrayImage, ImageEncoder, Luma};
use ndarray::Array2;
use rtvar::Img;

fn read_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(img.to_luma8())
}

pub fn read_image(path: &Path) -> Result<Img> {
    let g = read_gray(path)?;
    let (w, h) = g.dimensions();
    Ok(Img::new(Array2::from_shape_fn((h as usize, w as usize), |(j, i)| {
        f64::from(g.get_pixel(i as u32, j as u32).0[0]) / 255.0
    })))
}

/// Boolean mask: `true` where the pixel is at least half intensity.
pub fn read_mask(path: &Path, dims: (usize, usize)) -> Result<Array2<bool>> {
    let g = read_gray(path)?;
    let (w, h) = g.dimensions();
    if (h as usize, w as usize) != dims {
        bail!("mask {} is {w}x{h}, image is {}x{}", path.display(), dims.1, dims.0);
    }
    Ok(Array2::from_shape_fn(dims, |(j, i)| {
        g.get_pixel(i as u32, j as u32).0[0] >= 128
    }))
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes `u` clamped to `[0, 1]`; the format follows the file extension (`.png`, `.pgm`).
pub fn write_image(path: &Path, u: &Img) -> Result<()> {
    let (h, w) = u.values.dim();
    let img = GrayImage::from_fn(w as u32, h as u32, |i, j| {
        Luma([quantize(u.values[[j as usize, i as usize]])])
    });
    save(path, &img)
}

fn save(path: &Path, img: &GrayImage) -> Result<()> {
    let pnm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("pnm"));
    let res = if pnm {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        PnmEncoder::new(file)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(img.as_raw(), img.width(), img.height(), ExtendedColorType::L8)
    } else {
        img.save(path)
    };
    res.with_context(|| format!("writing {}", path.display()))
}

/// Writes a mask with 255 where `known` holds and 0 elsewhere.
pub fn write_mask(path: &Path, known: &Array2<bool>) -> Result<()> {
    let (h, w) = known.dim();
    let img = GrayImage::from_fn(w as u32, h as u32, |i, j| {
        Luma([if known[[j as usize, i as usize]] { 255 } else { 0 }])
    });
    save(path, &img)
}
