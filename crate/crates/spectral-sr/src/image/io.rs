//! PNG (8/16-bit gray/RGB) and PFM (32-bit float) file I/O.
//!
//! PFM is the lossless interchange format between pipeline stages; PNG is for
//! inspection. 8-bit samples map to `[0,1]` via `v/255`, 16-bit via `v/65535`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Png8,
    Png16,
    Pfm,
}

/// Loads a PNG (8- or 16-bit gray/RGB) or PFM (by `.pfm` extension) file.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pfm")) {
        load_pfm(path)
    } else {
        load_png(path)
    }
}

/// Saves in the requested format. PNG paths clamp samples to `[0,1]` and
/// quantize with round-half-away-from-zero; PFM is written losslessly as
/// little-endian f32 with scale -1.0.
pub fn save_image(img: &Image, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        ImageFormat::Png8 => save_png8(img, path),
        ImageFormat::Png16 => save_png16(img, path),
        ImageFormat::Pfm => save_pfm(img, path),
    }
}

fn load_png(path: &Path) -> Result<Image> {
    let dynimg = image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        other => Error::Png { path: path.into(), source: other },
    })?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    use image::DynamicImage::*;
    match dynimg {
        ImageLuma8(buf) => planar(w, h, 1, buf.as_raw().iter().map(|&v| v as f64 / 255.0)),
        ImageRgb8(buf) => planar(w, h, 3, buf.as_raw().iter().map(|&v| v as f64 / 255.0)),
        ImageLuma16(buf) => planar(w, h, 1, buf.as_raw().iter().map(|&v| v as f64 / 65535.0)),
        ImageRgb16(buf) => planar(w, h, 3, buf.as_raw().iter().map(|&v| v as f64 / 65535.0)),
        other => Err(Error::UnsupportedImage {
            path: path.into(),
            message: format!(
                "unsupported colour type {:?}; expected 8/16-bit gray or RGB",
                other.color()
            ),
        }),
    }
}

/// Converts interleaved samples into a planar image.
fn planar(w: usize, h: usize, channels: usize, samples: impl Iterator<Item = f64>) -> Result<Image> {
    let mut data = vec![0.0; w * h * channels];
    let n = w * h;
    for (i, v) in samples.enumerate() {
        let (pix, c) = (i / channels, i % channels);
        data[c * n + pix] = v;
    }
    Image::new(w, h, channels, data)
}

fn quantize(v: f64, max: f64) -> f64 {
    (v.clamp(0.0, 1.0) * max).round()
}

fn save_png8(img: &Image, path: &Path) -> Result<()> {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let n = w * h;
    let mut raw = Vec::with_capacity(n * c);
    for pix in 0..n {
        for ch in 0..c {
            raw.push(quantize(img.plane(ch)[pix], 255.0) as u8);
        }
    }
    let to_err = |source| Error::Png { path: path.into(), source };
    if c == 1 {
        image::GrayImage::from_raw(w as u32, h as u32, raw)
            .expect("raw buffer sized for dimensions")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(to_err)
    } else {
        image::RgbImage::from_raw(w as u32, h as u32, raw)
            .expect("raw buffer sized for dimensions")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(to_err)
    }
}

fn save_png16(img: &Image, path: &Path) -> Result<()> {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let n = w * h;
    let mut raw = Vec::with_capacity(n * c);
    for pix in 0..n {
        for ch in 0..c {
            raw.push(quantize(img.plane(ch)[pix], 65535.0) as u16);
        }
    }
    let to_err = |source| Error::Png { path: path.into(), source };
    if c == 1 {
        image::ImageBuffer::<image::Luma<u16>, _>::from_raw(w as u32, h as u32, raw)
            .expect("raw buffer sized for dimensions")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(to_err)
    } else {
        image::ImageBuffer::<image::Rgb<u16>, _>::from_raw(w as u32, h as u32, raw)
            .expect("raw buffer sized for dimensions")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(to_err)
    }
}

// PFM: ASCII header (`Pf` gray / `PF` RGB, dimensions, scale), then rows of
// f32 samples stored bottom-to-top. Negative scale means little-endian.

fn save_pfm(img: &Image, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let magic = if img.channels() == 1 { "Pf" } else { "PF" };
    let io_err = |e| Error::io(path, e);
    write!(w, "{}\n{} {}\n-1.0\n", magic, img.width(), img.height()).map_err(io_err)?;
    let (width, height, c) = (img.width(), img.height(), img.channels());
    for row in (0..height).rev() {
        for x in 0..width {
            for ch in 0..c {
                let v = img.plane(ch)[row * width + x] as f32;
                w.write_all(&v.to_le_bytes()).map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}

fn load_pfm(path: &Path) -> Result<Image> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let malformed = |message: &str| Error::MalformedPfm { path: path.into(), message: message.into() };

    // Header: three whitespace-separated tokens after the magic.
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    let mut pos = 0;
    let mut token = |bytes: &[u8]| -> Option<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos > start {
            // Consume exactly one whitespace byte after the token.
            let s = String::from_utf8_lossy(&bytes[start..pos]).into_owned();
            pos += 1;
            Some(s)
        } else {
            None
        }
    };

    let magic = token(&bytes).ok_or_else(|| malformed("missing magic"))?;
    let channels = match magic.as_str() {
        "Pf" => 1,
        "PF" => 3,
        _ => return Err(malformed("magic must be Pf or PF")),
    };
    let width: usize = token(&bytes)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed("bad width"))?;
    let height: usize = token(&bytes)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed("bad height"))?;
    let scale: f64 = token(&bytes)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed("bad scale"))?;
    let little_endian = scale < 0.0;

    let expected = width * height * channels * 4;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(malformed("truncated sample data"));
    }

    let n = width * height;
    let mut data = vec![0.0f64; n * channels];
    let mut off = 0;
    for row in (0..height).rev() {
        for x in 0..width {
            for ch in 0..channels {
                let raw: [u8; 4] = payload[off..off + 4].try_into().unwrap();
                let v = if little_endian { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
                data[ch * n + row * width + x] = v as f64;
                off += 4;
            }
        }
    }
    Image::new(width, height, channels, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tempfile::tempdir;

    fn random_f32_image(w: usize, h: usize, c: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..w * h * c)
            .map(|_| rng.gen_range(-2.0f32..2.0f32) as f64)
            .collect();
        Image::new(w, h, c, data).unwrap()
    }

    #[test]
    fn png8_scale_endpoints() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.png");
        let img = Image::new(2, 1, 1, vec![1.0, 0.0]).unwrap();
        save_image(&img, &path, ImageFormat::Png8).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.plane(0)[0], 1.0);
        assert_eq!(back.plane(0)[1], 0.0);
    }

    #[test]
    fn png8_quantization_rounds_half_away_and_clamps() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("q.png");
        let img = Image::new(3, 1, 1, vec![0.5, -0.2, 1.7]).unwrap();
        save_image(&img, &path, ImageFormat::Png8).unwrap();
        let back = load_image(&path).unwrap();
        // 0.5 * 255 = 127.5 rounds away from zero to 128.
        assert_eq!((back.plane(0)[0] * 255.0).round(), 128.0);
        assert_eq!(back.plane(0)[1], 0.0);
        assert_eq!(back.plane(0)[2], 1.0);
    }

    #[test]
    fn png16_roundtrip_rgb() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.png");
        let img = Image::new(2, 2, 3, (0..12).map(|i| i as f64 / 11.0).collect()).unwrap();
        save_image(&img, &path, ImageFormat::Png16).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.channels(), 3);
        assert!(img.max_abs_diff(&back) <= 0.5 / 65535.0 + 1e-12);
    }

    #[test]
    fn pfm_roundtrip_is_bitwise_for_f32_samples() {
        let dir = tempdir().unwrap();
        for (c, name) in [(1, "g.pfm"), (3, "c.pfm")] {
            let path = dir.path().join(name);
            let img = random_f32_image(8, 8, c, 42 + c as u64);
            save_image(&img, &path, ImageFormat::Pfm).unwrap();
            let back = load_image(&path).unwrap();
            assert_eq!(img.channels(), back.channels());
            assert_eq!(img.data(), back.data());
        }
    }

    #[test]
    fn load_missing_file_is_descriptive() {
        let err = load_image("/nonexistent/nope.pfm").unwrap_err();
        assert!(err.to_string().contains("nope.pfm"));
    }

    #[test]
    fn malformed_pfm_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.pfm");
        std::fs::write(&path, b"Pf\n4 4\n-1.0\nshort").unwrap();
        assert!(matches!(load_image(&path), Err(Error::MalformedPfm { .. })));
    }
}
