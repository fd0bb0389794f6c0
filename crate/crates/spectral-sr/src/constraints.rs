//! The three statistical projections and the alternating scheduler that
//! applies them during iterative upsampling.
//!
//! - `proj_spectrum` imposes a power-law radial decay with Rayleigh-ordered
//!   moduli past a radius `r0`, acting on the periodic component only.
//! - `proj_hist` moves the color histogram toward the (stretched) reference
//!   by sliced optimal transport.
//! - `proj_rev` restores blur-then-decimate consistency with the low
//!   resolution input via a minimal-norm correction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{
    dft2, idft2_real, max_ring, periodic_smooth_decompose, ring_of, signed_frequency, Spectrum,
};
use crate::image::{degrade, degraded_dims, resample_bilinear, Image, PlaneRef};
use crate::rng::{mix_seed, unit_direction};
use crate::upsampler::{upsample_to, UpsamplerKind};

/// Power-law / Rayleigh spectrum constraint settings.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumConstraintParams {
    /// Rings at or below this radius are left untouched.
    pub r0: usize,
    /// Spectral exponent of the imposed modulus decay.
    pub p: f64,
}

impl SpectrumConstraintParams {
    pub fn new(r0: usize, p: f64) -> Result<Self> {
        let params = Self { r0, p };
        params.validate()?;
        Ok(params)
    }

    /// Default `r0`: the Nyquist ring of the low-resolution reference, i.e.
    /// only bands the input could not represent are constrained.
    pub fn for_lr(lr: &Image, p: f64) -> Result<Self> {
        Self::new((lr.width().min(lr.height()) / 2).max(1), p)
    }

    fn validate(&self) -> Result<()> {
        if self.r0 < 1 {
            return Err(Error::InvalidParam("r0 must be >= 1".into()));
        }
        if !(self.p > 0.0) {
            return Err(Error::InvalidParam(format!("spectral exponent must be > 0, got {}", self.p)));
        }
        Ok(())
    }
}

/// Sliced-optimal-transport histogram constraint settings.
#[derive(Debug, Clone, Copy)]
pub struct HistConstraintParams {
    pub num_slices: usize,
    /// Transport step size in (0, 1]; 1 matches each slice fully.
    pub step_eps: f64,
    pub seed: u64,
}

impl Default for HistConstraintParams {
    fn default() -> Self {
        Self { num_slices: 32, step_eps: 1.0, seed: 0 }
    }
}

impl HistConstraintParams {
    fn validate(&self) -> Result<()> {
        if self.num_slices < 1 {
            return Err(Error::InvalidParam("num_slices must be >= 1".into()));
        }
        if !(self.step_eps > 0.0 && self.step_eps <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "step_eps must be in (0, 1], got {}",
                self.step_eps
            )));
        }
        Ok(())
    }
}

/// Reversibility constraint solver settings.
#[derive(Debug, Clone, Copy)]
pub struct RevConstraintParams {
    /// Stop once `|A w - u| / |u|` falls below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for RevConstraintParams {
    fn default() -> Self {
        Self { tol: 1e-6, max_iters: 50 }
    }
}

impl RevConstraintParams {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParam("tol must be > 0".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidParam("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// Quantile function of the Rayleigh distribution with scale `beta`:
/// `Q(u) = beta * sqrt(-2 ln(1 - u))`.
pub fn rayleigh_quantile(beta: f64, u: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParam(format!("beta must be > 0, got {beta}")));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidParam(format!("quantile argument must be in [0, 1), got {u}")));
    }
    Ok(rayleigh_q(beta, u))
}

#[inline]
fn rayleigh_q(beta: f64, u: f64) -> f64 {
    beta * (-2.0 * (1.0 - u).ln()).sqrt()
}

struct RingMember {
    idx: usize,
    partner: usize,
    modulus: f64,
}

/// Coefficient-space core of the spectrum projection, acting on the spectrum
/// of one (periodic) channel in place.
///
/// Rings `r <= r0` are untouched. For each ring beyond, the canonical
/// half-ring moduli are sorted ascending and replaced by the midpoint
/// Rayleigh quantiles `Q(beta_r, (i - 0.5)/m)` with
/// `beta_r = sqrt(2/pi) * E_r0 * (r/r0)^{-p}`, keeping phases and mirroring
/// to the conjugate frequencies so the spectrum stays Hermitian.
fn project_spectrum_coeffs(spec: &mut Spectrum, params: &SpectrumConstraintParams) -> Result<()> {
    let (w, h) = (spec.width(), spec.height());
    let r_max = max_ring(w, h);
    if params.r0 >= r_max {
        return Err(Error::InvalidParam(format!(
            "r0 = {} must be below the maximum ring {} of a {}x{} spectrum",
            params.r0, r_max, w, h
        )));
    }

    let mut e0_sum = 0.0;
    let mut e0_count = 0usize;
    let mut rings: Vec<Vec<RingMember>> = (0..=r_max).map(|_| Vec::new()).collect();
    for j in 0..h {
        let xi2 = signed_frequency(j, h);
        for i in 0..w {
            let xi1 = signed_frequency(i, w);
            let r = ring_of(xi1, xi2);
            let idx = j * w + i;
            if r == params.r0 {
                e0_sum += spec.coeffs()[idx].norm();
                e0_count += 1;
            } else if r > params.r0 {
                let partner = spec.index_of(-xi1, -xi2);
                if idx <= partner {
                    rings[r].push(RingMember { idx, partner, modulus: spec.coeffs()[idx].norm() });
                }
            }
        }
    }
    if e0_count == 0 {
        return Err(Error::InvalidParam(format!("reference ring r0 = {} is empty", params.r0)));
    }
    let e0 = e0_sum / e0_count as f64;
    let beta_scale = (2.0 / std::f64::consts::PI).sqrt() * e0;

    for r in (params.r0 + 1)..=r_max {
        let members = &mut rings[r];
        let m = members.len();
        if m == 0 {
            continue;
        }
        members.sort_by(|a, b| {
            a.modulus
                .partial_cmp(&b.modulus)
                .expect("moduli of finite coefficients are comparable")
                .then(a.idx.cmp(&b.idx))
        });
        let beta = beta_scale * (r as f64 / params.r0 as f64).powf(-params.p);
        let coeffs = spec.coeffs_mut();
        for (k, member) in members.iter().enumerate() {
            let q = rayleigh_q(beta, (k as f64 + 0.5) / m as f64);
            if member.partner == member.idx {
                // Self-conjugate frequency: real valued, keep the sign.
                let sign = if coeffs[member.idx].re < 0.0 { -1.0 } else { 1.0 };
                coeffs[member.idx] = Complex64::new(sign * q, 0.0);
            } else {
                let c = coeffs[member.idx];
                let scaled = if member.modulus > 0.0 {
                    c * (q / member.modulus)
                } else {
                    Complex64::new(q, 0.0)
                };
                coeffs[member.idx] = scaled;
                coeffs[member.partner] = scaled.conj();
            }
        }
    }
    Ok(())
}

/// Spectrum projection on an image: per channel, split into periodic and
/// smooth parts, reshape the periodic spectrum, add the smooth part back.
pub fn proj_spectrum(img: &Image, params: &SpectrumConstraintParams) -> Result<Image> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    for c in 0..img.channels() {
        let (periodic, smooth) = periodic_smooth_decompose(img.plane_ref(c))?;
        let mut spec = dft2(PlaneRef { width: w, height: h, samples: &periodic })?;
        project_spectrum_coeffs(&mut spec, params)?;
        let (projected, max_imag) = idft2_real(&spec);
        debug_assert!(max_imag <= 1e-9, "imaginary residual {max_imag}");
        let dst = out.plane_mut(c);
        for i in 0..dst.len() {
            dst[i] = projected[i] + smooth[i];
        }
    }
    Ok(out)
}

/// Histogram projection: `num_slices` sliced-transport steps of `img` toward
/// `reference` stretched to `img`'s size.
pub fn proj_hist(img: &Image, reference: &Image, params: &HistConstraintParams) -> Result<Image> {
    params.validate()?;
    if img.channels() != reference.channels() {
        return Err(Error::DimensionMismatch(format!(
            "channel mismatch: {} vs {}",
            img.channels(),
            reference.channels()
        )));
    }
    let target = resample_bilinear(reference, img.width(), img.height())?;
    let n = img.width() * img.height();
    let channels = img.channels();
    let mut out = img.clone();

    let mut proj_w = vec![0.0f64; n];
    let mut proj_u = vec![0.0f64; n];
    for slice in 0..params.num_slices {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed, slice as u64));
        let theta = unit_direction(&mut rng, channels);

        project_onto(&out, &theta, &mut proj_w);
        project_onto(&target, &theta, &mut proj_u);
        let order_w = argsort(&proj_w);
        let order_u = argsort(&proj_u);

        if channels == 1 && params.step_eps == 1.0 {
            // One full step in one dimension is exact histogram matching:
            // assign the sorted target values directly.
            let src = target.plane(0);
            let dst = out.plane_mut(0);
            for k in 0..n {
                dst[order_w[k]] = src[order_u[k]];
            }
        } else {
            let gaps: Vec<f64> = (0..n)
                .map(|k| params.step_eps * (proj_u[order_u[k]] - proj_w[order_w[k]]))
                .collect();
            for (c, &t) in theta.iter().enumerate() {
                let dst = out.plane_mut(c);
                for k in 0..n {
                    dst[order_w[k]] += t * gaps[k];
                }
            }
        }
    }
    Ok(out)
}

fn project_onto(img: &Image, theta: &[f64], dst: &mut [f64]) {
    dst.iter_mut().for_each(|v| *v = 0.0);
    for (c, &t) in theta.iter().enumerate() {
        for (d, &v) in dst.iter_mut().zip(img.plane(c)) {
            *d += t * v;
        }
    }
}

fn argsort(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("projections of finite pixels are comparable")
            .then(a.cmp(&b))
    });
    order
}

/// Adjoint of `x -> degrade(x, factor)` onto a `hr_w x hr_h` grid; satisfies
/// the dot-product test against `degrade` to machine precision.
pub fn degrade_adjoint(lr_sized: &Image, hr_w: usize, hr_h: usize, factor: f64) -> Result<Image> {
    crate::image::degrade_adjoint(lr_sized, hr_w, hr_h, factor)
}

fn dot(a: &Image, b: &Image) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn add_scaled(dst: &mut Image, src: &Image, s: f64) {
    for (d, &v) in dst.data_mut().iter_mut().zip(src.data()) {
        *d += s * v;
    }
}

/// Reversibility projection: minimal-norm correction `w + A^T (A A^T)^{-1}
/// (u - A w)` computed by conjugate gradients on the low-resolution grid,
/// iterated until `|A w' - u| / |u| <= tol` or `max_iters`.
pub fn proj_rev(img: &Image, lr: &Image, factor: f64, params: &RevConstraintParams) -> Result<Image> {
    params.validate()?;
    if !(factor > 1.0) {
        return Err(Error::InvalidParam(format!("factor must be > 1, got {factor}")));
    }
    if img.channels() != lr.channels() {
        return Err(Error::DimensionMismatch(format!(
            "channel mismatch: {} vs {}",
            img.channels(),
            lr.channels()
        )));
    }
    let (exp_w, exp_h) = degraded_dims(img.width(), img.height(), factor);
    if (lr.width(), lr.height()) != (exp_w, exp_h) {
        return Err(Error::DimensionMismatch(format!(
            "low-resolution image is {}x{} but degrade({}x{}, {}) gives {}x{}",
            lr.width(),
            lr.height(),
            img.width(),
            img.height(),
            factor,
            exp_w,
            exp_h
        )));
    }

    let apply_a = |x: &Image| degrade(x, factor);
    let apply_at = |y: &Image| degrade_adjoint(y, img.width(), img.height(), factor);

    let mut residual = lr.clone();
    add_scaled(&mut residual, &apply_a(img)?, -1.0);
    let denom = dot(lr, lr).sqrt().max(f64::MIN_POSITIVE);
    let initial_resid = dot(&residual, &residual).sqrt() / denom;
    if initial_resid <= params.tol {
        return Ok(img.clone());
    }

    // CG on the normal equations in the LR domain: (A A^T) y = u - A w.
    // The residual 2-norm is not monotone for CG, so keep the best iterate
    // and call it divergence only when the residual blows up well past it
    // for several iterations in a row.
    let mut y = Image::zeros(lr.width(), lr.height(), lr.channels());
    let mut best_y = y.clone();
    let mut best_resid = initial_resid;
    let mut r = residual;
    let mut p = r.clone();
    let mut rs_old = dot(&r, &r);
    let mut grew = 0usize;
    for _ in 0..params.max_iters {
        let mp = apply_a(&apply_at(&p)?)?;
        let p_mp = dot(&p, &mp);
        if p_mp <= 0.0 {
            break;
        }
        let alpha = rs_old / p_mp;
        add_scaled(&mut y, &p, alpha);
        add_scaled(&mut r, &mp, -alpha);
        let rs_new = dot(&r, &r);
        let resid = rs_new.sqrt() / denom;
        if resid < best_resid {
            best_resid = resid;
            best_y.data_mut().copy_from_slice(y.data());
        }
        if resid <= params.tol {
            break;
        }
        if resid > 10.0 * best_resid {
            grew += 1;
            if grew >= 5 {
                return Err(Error::CgDiverged { residual: resid, grew_iters: grew });
            }
        } else {
            grew = 0;
        }
        let beta = rs_new / rs_old;
        rs_old = rs_new;
        let mut p_next = r.clone();
        add_scaled(&mut p_next, &p, beta);
        p = p_next;
    }

    let mut out = img.clone();
    add_scaled(&mut out, &apply_at(&best_y)?, 1.0);
    Ok(out)
}

/// Which projections run, with their settings; `None` disables one.
#[derive(Debug, Clone, Default)]
pub struct ConstraintConfig {
    pub spectrum: Option<SpectrumConstraintParams>,
    pub hist: Option<HistConstraintParams>,
    pub rev: Option<RevConstraintParams>,
}

impl ConstraintConfig {
    /// All three constraints with defaults derived from the LR reference.
    pub fn all_for(lr: &Image, p: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            spectrum: Some(SpectrumConstraintParams::for_lr(lr, p)?),
            hist: Some(HistConstraintParams { seed: mix_seed(seed, 0x6869_7374), ..Default::default() }),
            rev: Some(RevConstraintParams::default()),
        })
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn any_enabled(&self) -> bool {
        self.spectrum.is_some() || self.hist.is_some() || self.rev.is_some()
    }
}

/// Runs the enabled projections in order (spectrum, histogram,
/// reversibility), `rounds` times.
pub fn apply_constraints(
    img: &Image,
    lr: &Image,
    factor: f64,
    cfg: &ConstraintConfig,
    rounds: usize,
) -> Result<Image> {
    let mut w = img.clone();
    for _ in 0..rounds {
        if let Some(sp) = &cfg.spectrum {
            w = proj_spectrum(&w, sp)?;
        }
        if let Some(hp) = &cfg.hist {
            w = proj_hist(&w, lr, hp)?;
        }
        if let Some(rp) = &cfg.rev {
            w = proj_rev(&w, lr, factor, rp)?;
        }
    }
    Ok(w)
}

/// Per-step downscale ratio of the iterative upsampler; each step zooms by
/// its inverse (~1.259921, so six steps give x4).
pub const DEFAULT_STEP_SCALE: f64 = 0.793701;

/// Projection rounds per upsampling step.
pub const DEFAULT_ROUNDS: usize = 3;

/// Everything a super-resolution run needs besides the LR image itself.
#[derive(Debug, Clone)]
pub struct SrContext {
    pub target_zoom: f64,
    /// The per-step scale ratio `r`; each step enlarges by `1/r`.
    pub step_scale: f64,
    pub rounds: usize,
    pub upsampler: UpsamplerKind,
    pub constraints: ConstraintConfig,
    pub seed: u64,
}

impl SrContext {
    /// Defaults: step scale `0.793701`, 3 rounds, spectral-detail upsampler,
    /// all constraints on with `r0` at the LR Nyquist ring and `p = 1.7`.
    pub fn new(lr: &Image, target_zoom: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            target_zoom,
            step_scale: DEFAULT_STEP_SCALE,
            rounds: DEFAULT_ROUNDS,
            upsampler: UpsamplerKind::spectral_detail(crate::upsampler::DEFAULT_DETAIL_SIGMA, 1.7),
            constraints: ConstraintConfig::all_for(lr, 1.7, seed)?,
            seed,
        })
    }
}

/// One planned upsampling step: target dimensions and the cumulative zoom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrStep {
    pub width: usize,
    pub height: usize,
    pub zoom: f64,
}

/// Plans the ladder of intermediate sizes `round(lr * (1/r)^k)`, clipping the
/// final step so the output is exactly `round(lr * target_zoom)`.
pub fn sr_plan(lr_w: usize, lr_h: usize, target_zoom: f64, step_scale: f64) -> Result<Vec<SrStep>> {
    if !(target_zoom > 1.0) {
        return Err(Error::InvalidParam(format!("target zoom must be > 1, got {target_zoom}")));
    }
    if !(step_scale > 0.0 && step_scale < 1.0) {
        return Err(Error::InvalidParam(format!("step scale must be in (0, 1), got {step_scale}")));
    }
    let final_w = (lr_w as f64 * target_zoom).round() as usize;
    let final_h = (lr_h as f64 * target_zoom).round() as usize;
    let step_zoom = 1.0 / step_scale;

    let mut plan = Vec::new();
    let (mut prev_w, mut prev_h) = (lr_w, lr_h);
    for k in 1..10_000 {
        let z = step_zoom.powi(k);
        let w = (lr_w as f64 * z).round() as usize;
        let h = (lr_h as f64 * z).round() as usize;
        if w >= final_w || h >= final_h {
            plan.push(SrStep { width: final_w, height: final_h, zoom: target_zoom });
            return Ok(plan);
        }
        if w > prev_w && h > prev_h {
            plan.push(SrStep { width: w, height: h, zoom: z });
            prev_w = w;
            prev_h = h;
        }
    }
    Err(Error::InvalidParam("upsampling plan did not reach the target zoom".into()))
}

/// Iterative super-resolution: repeatedly upsample by `1/step_scale` and
/// apply the constraint rounds against the LR reference at the current
/// cumulative zoom.
pub fn sr_pipeline(lr: &Image, ctx: &SrContext) -> Result<Image> {
    let plan = sr_plan(lr.width(), lr.height(), ctx.target_zoom, ctx.step_scale)?;
    let last = *plan.last().expect("plan is never empty");

    // With every projection disabled the iteration is just a chain of
    // resamplings; collapse it to the one-shot baseline enlargement.
    if (!ctx.constraints.any_enabled() || ctx.rounds == 0) && ctx.upsampler.is_pure_bilinear() {
        return resample_bilinear(lr, last.width, last.height);
    }

    let mut w = lr.clone();
    for (i, step) in plan.iter().enumerate() {
        let step_seed = mix_seed(ctx.seed, 0x7570_0000 + i as u64);
        w = upsample_to(&w, step.width, step.height, &ctx.upsampler, step_seed)?;
        w = apply_constraints(&w, lr, step.zoom, &ctx.constraints, ctx.rounds)?;
    }
    Ok(w)
}
