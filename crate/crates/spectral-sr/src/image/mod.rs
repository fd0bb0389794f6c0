//! Pixel-domain data model and the linear resampling / blur / decimation
//! operators the rest of the crate is built on.
//!
//! Images are planar `f64` rasters (1 or 3 channels) with samples nominally
//! in `[0, 1]`. All operators here are pure and linear in the pixel values;
//! `degrade` is the forward operator of the reversibility constraint.

mod io;

pub use io::{load_image, save_image, ImageFormat};

use crate::error::{Error, Result};

/// Planar float raster: `channels` planes of `width * height` samples each,
/// row-major within a plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image from planar data, validating the shape and that every
    /// sample is finite.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParam("image dimensions must be nonzero".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParam(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "data length {} != {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParam("image contains non-finite samples".into()));
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self::constant(width, height, channels, 0.0)
    }

    pub fn constant(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Self::new(width, height, channels, vec![value; width * height * channels])
            .expect("constant image is always valid")
    }

    /// Single-channel image from a row-major plane.
    pub fn from_plane(width: usize, height: usize, plane: Vec<f64>) -> Result<Self> {
        Self::new(width, height, 1, plane)
    }

    pub fn from_planes(width: usize, height: usize, planes: Vec<Vec<f64>>) -> Result<Self> {
        let channels = planes.len();
        let mut data = Vec::with_capacity(width * height * channels);
        for plane in planes {
            data.extend_from_slice(&plane);
        }
        Self::new(width, height, channels, data)
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[channel * n..(channel + 1) * n]
    }

    pub fn plane_mut(&mut self, channel: usize) -> &mut [f64] {
        let n = self.width * self.height;
        &mut self.data[channel * n..(channel + 1) * n]
    }

    pub fn plane_ref(&self, channel: usize) -> PlaneRef<'_> {
        PlaneRef { width: self.width, height: self.height, samples: self.plane(channel) }
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Largest absolute per-sample difference; shapes must match.
    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        assert!(self.same_shape(other), "max_abs_diff on mismatched shapes");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Borrowed view of one image channel, the unit the Fourier operations work on.
#[derive(Debug, Clone, Copy)]
pub struct PlaneRef<'a> {
    pub width: usize,
    pub height: usize,
    pub samples: &'a [f64],
}

/// Normalized, symmetric 1-D convolution kernel.
#[derive(Debug, Clone)]
pub struct Kernel1D {
    taps: Vec<f64>,
    radius: usize,
    sigma: f64,
}

impl Kernel1D {
    /// Gaussian taps `exp(-i^2 / 2 sigma^2)` for `|i| <= ceil(4 sigma)`,
    /// normalized to sum to one.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParam(format!("sigma must be > 0, got {sigma}")));
        }
        let radius = (4.0 * sigma).ceil() as usize;
        let mut taps = Vec::with_capacity(2 * radius + 1);
        for i in -(radius as i64)..=(radius as i64) {
            let x = i as f64;
            taps.push((-x * x / (2.0 * sigma * sigma)).exp());
        }
        let sum: f64 = taps.iter().sum();
        for t in &mut taps {
            *t /= sum;
        }
        Ok(Self { taps, radius, sigma })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Mirror index without repeating the edge sample: ..2 1 | 0 1 2 .. n-1 | n-2 n-3..
pub(crate) fn mirror_index(i: i64, n: usize) -> usize {
    let n = n as i64;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - m;
    }
    m as usize
}

fn convolve_rows_mirrored(src: &[f64], dst: &mut [f64], width: usize, height: usize, taps: &[f64], radius: usize) {
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        let out = &mut dst[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let sx = x as i64 + k as i64 - radius as i64;
                acc += t * row[mirror_index(sx, width)];
            }
            out[x] = acc;
        }
    }
}

fn convolve_cols_mirrored(src: &[f64], dst: &mut [f64], width: usize, height: usize, taps: &[f64], radius: usize) {
    for x in 0..width {
        for y in 0..height {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let sy = y as i64 + k as i64 - radius as i64;
                acc += t * src[mirror_index(sy, height) * width + x];
            }
            dst[y * width + x] = acc;
        }
    }
}

/// Separable Gaussian blur with mirror boundary handling, applied per channel.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Result<Image> {
    let kernel = Kernel1D::gaussian(sigma)?;
    Ok(blur_with_kernel(img, &kernel))
}

pub(crate) fn blur_with_kernel(img: &Image, kernel: &Kernel1D) -> Image {
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    let mut tmp = vec![0.0; w * h];
    for c in 0..img.channels() {
        convolve_rows_mirrored(img.plane(c), &mut tmp, w, h, kernel.taps(), kernel.radius());
        convolve_cols_mirrored(&tmp, out.plane_mut(c), w, h, kernel.taps(), kernel.radius());
    }
    out
}

/// Pixel-center-aligned bilinear resampling with clamped border sampling.
///
/// Source coordinate for output pixel `x`: `(x + 0.5) * w_in / w_out - 0.5`.
pub fn resample_bilinear(img: &Image, out_w: usize, out_h: usize) -> Result<Image> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidParam("output dimensions must be >= 1".into()));
    }
    let (w, h) = (img.width(), img.height());
    let scale_x = w as f64 / out_w as f64;
    let scale_y = h as f64 / out_h as f64;

    // Per output coordinate: clamped pair of source indices plus the blend factor.
    let xmap: Vec<(usize, usize, f64)> = (0..out_w)
        .map(|x| axis_sample(x, scale_x, w))
        .collect();
    let ymap: Vec<(usize, usize, f64)> = (0..out_h)
        .map(|y| axis_sample(y, scale_y, h))
        .collect();

    let mut out = Image::zeros(out_w, out_h, img.channels());
    for c in 0..img.channels() {
        let src = img.plane(c);
        let dst = out.plane_mut(c);
        for (y, &(y0, y1, ty)) in ymap.iter().enumerate() {
            for (x, &(x0, x1, tx)) in xmap.iter().enumerate() {
                let top = src[y0 * w + x0] * (1.0 - tx) + src[y0 * w + x1] * tx;
                let bot = src[y1 * w + x0] * (1.0 - tx) + src[y1 * w + x1] * tx;
                dst[y * out_w + x] = top * (1.0 - ty) + bot * ty;
            }
        }
    }
    Ok(out)
}

fn axis_sample(i: usize, scale: f64, n: usize) -> (usize, usize, f64) {
    let s = (i as f64 + 0.5) * scale - 0.5;
    let i0 = s.floor();
    let t = s - i0;
    let clamp = |v: f64| -> usize { v.max(0.0).min((n - 1) as f64) as usize };
    (clamp(i0), clamp(i0 + 1.0), t)
}

/// Adjoint of [`resample_bilinear`]: scatters each output sample back through
/// its interpolation weights. Used by the reversibility projection.
pub(crate) fn resample_bilinear_adjoint(img: &Image, out_w: usize, out_h: usize) -> Image {
    let (w, h) = (img.width(), img.height());
    let scale_x = out_w as f64 / w as f64;
    let scale_y = out_h as f64 / h as f64;
    let xmap: Vec<(usize, usize, f64)> = (0..w).map(|x| axis_sample(x, scale_x, out_w)).collect();
    let ymap: Vec<(usize, usize, f64)> = (0..h).map(|y| axis_sample(y, scale_y, out_h)).collect();

    let mut out = Image::zeros(out_w, out_h, img.channels());
    for c in 0..img.channels() {
        let src = img.plane(c);
        let dst = out.plane_mut(c);
        for (y, &(y0, y1, ty)) in ymap.iter().enumerate() {
            for (x, &(x0, x1, tx)) in xmap.iter().enumerate() {
                let v = src[y * w + x];
                dst[y0 * out_w + x0] += v * (1.0 - tx) * (1.0 - ty);
                dst[y0 * out_w + x1] += v * tx * (1.0 - ty);
                dst[y1 * out_w + x0] += v * (1.0 - tx) * ty;
                dst[y1 * out_w + x1] += v * tx * ty;
            }
        }
    }
    out
}

/// Adjoint of the mirrored separable blur: scatter instead of gather.
pub(crate) fn blur_adjoint_with_kernel(img: &Image, kernel: &Kernel1D) -> Image {
    let (w, h) = (img.width(), img.height());
    let taps = kernel.taps();
    let radius = kernel.radius();
    let mut out = img.clone();
    let mut tmp = vec![0.0; w * h];
    for c in 0..img.channels() {
        // Adjoint of the column pass.
        tmp.iter_mut().for_each(|v| *v = 0.0);
        let src = img.plane(c);
        for x in 0..w {
            for y in 0..h {
                let v = src[y * w + x];
                for (k, &t) in taps.iter().enumerate() {
                    let sy = y as i64 + k as i64 - radius as i64;
                    tmp[mirror_index(sy, h) * w + x] += t * v;
                }
            }
        }
        // Adjoint of the row pass.
        let dst = out.plane_mut(c);
        dst.iter_mut().for_each(|v| *v = 0.0);
        for y in 0..h {
            let row = &tmp[y * w..(y + 1) * w];
            let orow = &mut dst[y * w..(y + 1) * w];
            for x in 0..w {
                let v = row[x];
                for (k, &t) in taps.iter().enumerate() {
                    let sx = x as i64 + k as i64 - radius as i64;
                    orow[mirror_index(sx, w)] += t * v;
                }
            }
        }
    }
    out
}

/// Output dimensions of [`degrade`] for a given factor.
pub fn degraded_dims(width: usize, height: usize, factor: f64) -> (usize, usize) {
    ((width as f64 / factor).round() as usize, (height as f64 / factor).round() as usize)
}

/// Blur-then-decimate: Gaussian blur with `sigma = 0.7 * factor` followed by
/// bilinear resampling to `(round(w/factor), round(h/factor))`.
///
/// This is the forward operator of the reversibility constraint.
pub fn degrade(img: &Image, factor: f64) -> Result<Image> {
    if !(factor > 1.0) {
        return Err(Error::InvalidParam(format!("degrade factor must be > 1, got {factor}")));
    }
    let (out_w, out_h) = degraded_dims(img.width(), img.height(), factor);
    if out_w < 4 || out_h < 4 {
        return Err(Error::InvalidParam(format!(
            "degrade output {out_w}x{out_h} is smaller than 4 pixels per side"
        )));
    }
    let blurred = gaussian_blur(img, 0.7 * factor)?;
    resample_bilinear(&blurred, out_w, out_h)
}

/// Adjoint of `x -> degrade(x, factor)` for a high-resolution grid of
/// `hr_w x hr_h`. `img` must have the dimensions `degrade` would produce.
pub(crate) fn degrade_adjoint(img: &Image, hr_w: usize, hr_h: usize, factor: f64) -> Result<Image> {
    let (exp_w, exp_h) = degraded_dims(hr_w, hr_h, factor);
    if (img.width(), img.height()) != (exp_w, exp_h) {
        return Err(Error::DimensionMismatch(format!(
            "adjoint input {}x{} does not match degrade output {}x{} for factor {}",
            img.width(),
            img.height(),
            exp_w,
            exp_h,
            factor
        )));
    }
    let kernel = Kernel1D::gaussian(0.7 * factor)?;
    let spread = resample_bilinear_adjoint(img, hr_w, hr_h);
    Ok(blur_adjoint_with_kernel(&spread, &kernel))
}
