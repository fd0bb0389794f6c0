//! Pluggable per-step upscalers for the iterative super-resolution loop.
//!
//! `Bilinear` just enlarges. `SpectralDetail` enlarges and seeds the band the
//! input could not represent with a zero-mean colored-noise field whose ring
//! means continue the power law fitted on the input's top octave of rings,
//! scaled by `detail_sigma`. The spectrum projection later reshapes exactly
//! that band, so the detail field mainly supplies plausible phases there.

use crate::error::{Error, Result};
use crate::fourier::{dft2, fit_log_log, radial_profile};
use crate::image::{resample_bilinear, Image};
use crate::rng::mix_seed;
use crate::synth::unit_phase_field;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsamplerVariant {
    Bilinear,
    SpectralDetail,
}

/// Upsampler selection plus the detail-field settings.
#[derive(Debug, Clone, Copy)]
pub struct UpsamplerKind {
    pub variant: UpsamplerVariant,
    /// Relative amplitude of the injected detail field.
    pub detail_sigma: f64,
    /// Spectral exponent assumed when the top-octave fit is unusable.
    pub p: f64,
}

pub const DEFAULT_DETAIL_SIGMA: f64 = 0.01;

impl UpsamplerKind {
    pub fn bilinear() -> Self {
        Self { variant: UpsamplerVariant::Bilinear, detail_sigma: 0.0, p: 1.7 }
    }

    pub fn spectral_detail(detail_sigma: f64, p: f64) -> Self {
        Self { variant: UpsamplerVariant::SpectralDetail, detail_sigma, p }
    }

    /// True when the operator reduces to plain bilinear resampling.
    pub fn is_pure_bilinear(&self) -> bool {
        self.variant == UpsamplerVariant::Bilinear || self.detail_sigma == 0.0
    }

    fn validate(&self) -> Result<()> {
        if self.detail_sigma < 0.0 {
            return Err(Error::InvalidParam(format!(
                "detail_sigma must be >= 0, got {}",
                self.detail_sigma
            )));
        }
        Ok(())
    }
}

/// Upscales by `step_zoom`, rounding the output dimensions.
pub fn upsample(img: &Image, step_zoom: f64, kind: &UpsamplerKind, seed: u64) -> Result<Image> {
    if !(step_zoom > 1.0) {
        return Err(Error::InvalidParam(format!("step zoom must be > 1, got {step_zoom}")));
    }
    let out_w = (img.width() as f64 * step_zoom).round() as usize;
    let out_h = (img.height() as f64 * step_zoom).round() as usize;
    upsample_to(img, out_w, out_h, kind, seed)
}

/// Upscales to exact target dimensions; the pipeline uses this form so the
/// per-step sizes can be planned analytically from the LR grid.
pub fn upsample_to(img: &Image, out_w: usize, out_h: usize, kind: &UpsamplerKind, seed: u64) -> Result<Image> {
    kind.validate()?;
    if out_w < img.width() || out_h < img.height() {
        return Err(Error::InvalidParam(format!(
            "upsample target {}x{} is smaller than input {}x{}",
            out_w,
            out_h,
            img.width(),
            img.height()
        )));
    }
    let base = resample_bilinear(img, out_w, out_h)?;
    if kind.is_pure_bilinear() {
        return Ok(base);
    }
    add_spectral_detail(img, base, kind, seed)
}

fn add_spectral_detail(input: &Image, mut base: Image, kind: &UpsamplerKind, seed: u64) -> Result<Image> {
    let nyquist = input.width().min(input.height()) as f64 / 2.0;
    let (out_w, out_h) = (base.width(), base.height());
    // The forward transform is unnormalized, so coefficients scale with the
    // pixel count; rescale the fitted law into the output grid.
    let area_scale = (out_w * out_h) as f64 / (input.width() * input.height()) as f64;

    for c in 0..input.channels() {
        let spec = dft2(input.plane_ref(c))?;
        let prof = radial_profile(&spec);
        let lo = ((nyquist / 2.0).floor() as usize).max(1);
        let hi = (nyquist.floor() as usize).min(prof.max_radius());
        let fit = fit_log_log(
            prof.rings[lo..=hi]
                .iter()
                .filter(|r| r.count > 0)
                .map(|r| (r.radius as f64, r.mean_modulus)),
        );
        let (slope, intercept) = match fit {
            Some(f) => (f.slope, f.intercept),
            // Not enough spectral content to fit (e.g. constant input):
            // fall back to the configured exponent anchored at the Nyquist
            // ring's mean, or skip entirely for an empty band.
            None => {
                let anchor = prof.rings[lo..=hi]
                    .iter()
                    .map(|r| r.mean_modulus)
                    .fold(0.0, f64::max);
                if anchor <= 0.0 {
                    continue;
                }
                (-kind.p, anchor.ln() + kind.p * nyquist.ln())
            }
        };

        let amplitude = kind.detail_sigma * area_scale;
        let detail = unit_phase_field(
            out_w,
            out_h,
            |rho| {
                if rho > nyquist {
                    amplitude * (intercept + slope * rho.ln()).exp()
                } else {
                    0.0
                }
            },
            mix_seed(seed, c as u64),
        );
        for (dst, d) in base.plane_mut(c).iter_mut().zip(&detail) {
            *dst += d;
        }
    }
    Ok(base)
}
