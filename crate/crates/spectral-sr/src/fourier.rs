//! 2-D discrete Fourier transform, the periodic+smooth decomposition, and
//! radial (ring) statistics of the spectrum.
//!
//! Conventions fixed here and relied on everywhere else:
//! - forward transform unnormalized, inverse scaled by `1/(w*h)`;
//! - frequencies are centered, `(xi1, xi2)` in `[-w/2, w/2) x [-h/2, h/2)`,
//!   stored in standard unshifted row-major order (DC at index 0);
//! - the discrete "circle" of radius `r` is the set of frequencies whose
//!   Euclidean radius rounds to `r`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::image::PlaneRef;

/// Complex 2-D spectrum of one image channel.
#[derive(Debug, Clone)]
pub struct Spectrum {
    width: usize,
    height: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major coefficients, DC first (unshifted layout).
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at centered frequency `(xi1, xi2)`.
    pub fn at(&self, xi1: i64, xi2: i64) -> Complex64 {
        self.coeffs[self.index_of(xi1, xi2)]
    }

    pub fn index_of(&self, xi1: i64, xi2: i64) -> usize {
        let i = xi1.rem_euclid(self.width as i64) as usize;
        let j = xi2.rem_euclid(self.height as i64) as usize;
        j * self.width + i
    }

    /// Largest deviation from conjugate symmetry, relative to the peak modulus.
    pub fn hermitian_residual(&self) -> f64 {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        let mut worst = 0.0f64;
        for j in 0..self.height {
            for i in 0..self.width {
                let xi1 = signed_frequency(i, self.width);
                let xi2 = signed_frequency(j, self.height);
                let c = self.coeffs[j * self.width + i];
                let mirrored = self.at(-xi1, -xi2);
                worst = worst.max((mirrored - c.conj()).norm());
            }
        }
        worst / peak
    }
}

/// Maps an unshifted array index to its centered (signed) frequency.
pub fn signed_frequency(index: usize, n: usize) -> i64 {
    if index <= (n - 1) / 2 {
        index as i64
    } else {
        index as i64 - n as i64
    }
}

/// Ring index of a centered frequency: Euclidean radius rounded to nearest.
pub fn ring_of(xi1: i64, xi2: i64) -> usize {
    (((xi1 * xi1 + xi2 * xi2) as f64).sqrt()).round() as usize
}

/// Largest ring index reachable on a `width x height` grid.
pub fn max_ring(width: usize, height: usize) -> usize {
    ring_of((width / 2) as i64, (height / 2) as i64)
}

fn fft_2d_in_place(coeffs: &mut [Complex64], width: usize, height: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let row_fft = if inverse { planner.plan_fft_inverse(width) } else { planner.plan_fft_forward(width) };
    for row in coeffs.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let col_fft = if inverse { planner.plan_fft_inverse(height) } else { planner.plan_fft_forward(height) };
    let mut col = vec![Complex64::default(); height];
    for x in 0..width {
        for y in 0..height {
            col[y] = coeffs[y * width + x];
        }
        col_fft.process(&mut col);
        for y in 0..height {
            coeffs[y * width + x] = col[y];
        }
    }
}

/// Unnormalized forward 2-D DFT of one channel.
pub fn dft2(plane: PlaneRef<'_>) -> Result<Spectrum> {
    let (w, h) = (plane.width, plane.height);
    if w < 2 || h < 2 {
        return Err(Error::InvalidParam(format!("dft2 needs at least 2x2 samples, got {w}x{h}")));
    }
    debug_assert_eq!(plane.samples.len(), w * h);
    let mut coeffs: Vec<Complex64> = plane.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_2d_in_place(&mut coeffs, w, h, false);
    Ok(Spectrum { width: w, height: h, coeffs })
}

/// Inverse 2-D DFT with `1/(w*h)` normalization; returns complex samples.
pub fn idft2(spec: &Spectrum) -> Vec<Complex64> {
    let mut coeffs = spec.coeffs.clone();
    fft_2d_in_place(&mut coeffs, spec.width, spec.height, true);
    let scale = 1.0 / (spec.width * spec.height) as f64;
    for c in &mut coeffs {
        *c *= scale;
    }
    coeffs
}

/// Inverse transform of a (nominally Hermitian) spectrum; returns the real
/// part plus the largest imaginary residual that was discarded.
pub fn idft2_real(spec: &Spectrum) -> (Vec<f64>, f64) {
    let full = idft2(spec);
    let max_imag = full.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    (full.into_iter().map(|c| c.re).collect(), max_imag)
}

/// Periodic+smooth decomposition of one channel.
///
/// The smooth part solves, in the Fourier domain,
/// `s_hat(q) = v_hat(q) / (2cos(2 pi q1 / w) + 2cos(2 pi q2 / h) - 4)` for
/// `q != 0` with `s_hat(0) = 0`, where `v` is the boundary-discrepancy image
/// (opposite-edge differences on the border, zero inside). Returns
/// `(periodic, smooth)` with `periodic + smooth == input` exactly.
pub fn periodic_smooth_decompose(plane: PlaneRef<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
    let (w, h) = (plane.width, plane.height);
    if w < 3 || h < 3 {
        return Err(Error::InvalidParam(format!(
            "periodic+smooth decomposition needs at least 3x3 samples, got {w}x{h}"
        )));
    }
    let u = plane.samples;

    let mut v = vec![0.0f64; w * h];
    for y in 0..h {
        let d = u[y * w + (w - 1)] - u[y * w];
        v[y * w] += d;
        v[y * w + (w - 1)] -= d;
    }
    for x in 0..w {
        let d = u[(h - 1) * w + x] - u[x];
        v[x] += d;
        v[(h - 1) * w + x] -= d;
    }

    let mut vhat = dft2(PlaneRef { width: w, height: h, samples: &v })?;
    let two_pi = 2.0 * std::f64::consts::PI;
    for j in 0..h {
        for i in 0..w {
            let idx = j * w + i;
            if idx == 0 {
                vhat.coeffs[0] = Complex64::new(0.0, 0.0);
                continue;
            }
            let denom = 2.0 * (two_pi * i as f64 / w as f64).cos()
                + 2.0 * (two_pi * j as f64 / h as f64).cos()
                - 4.0;
            vhat.coeffs[idx] /= denom;
        }
    }
    let (smooth, _) = idft2_real(&vhat);
    let periodic: Vec<f64> = u.iter().zip(&smooth).map(|(a, b)| a - b).collect();
    Ok((periodic, smooth))
}

/// Per-ring count and mean modulus over the whole spectrum.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub rings: Vec<Ring>,
}

#[derive(Debug, Clone, Copy)]
pub struct Ring {
    pub radius: usize,
    pub count: usize,
    pub mean_modulus: f64,
}

impl RadialProfile {
    pub fn max_radius(&self) -> usize {
        self.rings.len() - 1
    }

    pub fn mean_at(&self, radius: usize) -> Option<f64> {
        self.rings.get(radius).map(|r| r.mean_modulus)
    }
}

/// Assigns every frequency to the ring of its rounded radius and averages
/// moduli per ring. Bins are contiguous from 0 to the maximum reachable ring.
pub fn radial_profile(spec: &Spectrum) -> RadialProfile {
    let (w, h) = (spec.width, spec.height);
    let n_rings = max_ring(w, h) + 1;
    let mut counts = vec![0usize; n_rings];
    let mut sums = vec![0.0f64; n_rings];
    for j in 0..h {
        let xi2 = signed_frequency(j, h);
        for i in 0..w {
            let xi1 = signed_frequency(i, w);
            let r = ring_of(xi1, xi2);
            counts[r] += 1;
            sums[r] += spec.coeffs[j * w + i].norm();
        }
    }
    let rings = counts
        .into_iter()
        .zip(sums)
        .enumerate()
        .map(|(radius, (count, sum))| Ring {
            radius,
            count,
            mean_modulus: if count > 0 { sum / count as f64 } else { 0.0 },
        })
        .collect();
    RadialProfile { rings }
}

/// Ordinary least-squares fit of `ln(y)` against `ln(x)`.
#[derive(Debug, Clone, Copy)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope estimate.
    pub stderr: f64,
    pub points: usize,
}

/// Fits `ln y = slope * ln x + intercept` by OLS over `(x, y)` pairs with
/// positive coordinates. Returns `None` with fewer than 3 usable points.
pub fn fit_log_log(points: impl IntoIterator<Item = (f64, f64)>) -> Option<LogLogFit> {
    let logs: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = logs
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    Some(LogLogFit { slope, intercept, stderr, points: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Image;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_plane(w: usize, h: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..w * h).map(|_| rng.gen_range(0.0..1.0)).collect()
    }

    fn plane<'a>(w: usize, h: usize, s: &'a [f64]) -> PlaneRef<'a> {
        PlaneRef { width: w, height: h, samples: s }
    }

    #[test]
    fn constant_image_has_only_dc() {
        let data = vec![0.3; 9 * 7];
        let spec = dft2(plane(9, 7, &data)).unwrap();
        let dc = spec.at(0, 0);
        assert!((dc.re - 0.3 * 63.0).abs() <= 1e-9);
        assert!(dc.im.abs() <= 1e-12);
        for (idx, c) in spec.coeffs().iter().enumerate() {
            if idx != 0 {
                assert!(c.norm() <= 1e-9, "coefficient {idx} = {c}");
            }
        }
    }

    #[test]
    fn matches_brute_force_dft_on_4x4() {
        let data = random_plane(4, 4, 5);
        let spec = dft2(plane(4, 4, &data)).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for j in 0..4usize {
            for i in 0..4usize {
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..4usize {
                    for x in 0..4usize {
                        let phase = -two_pi * (i * x) as f64 / 4.0 - two_pi * (j * y) as f64 / 4.0;
                        acc += data[y * 4 + x] * Complex64::new(phase.cos(), phase.sin());
                    }
                }
                let got = spec.coeffs()[j * 4 + i];
                assert!((got - acc).norm() <= 1e-10, "({i},{j}): {got} vs {acc}");
            }
        }
    }

    #[test]
    fn parseval_under_stated_convention() {
        let data = random_plane(12, 10, 6);
        let spec = dft2(plane(12, 10, &data)).unwrap();
        let pixel_energy: f64 = data.iter().map(|v| v * v).sum();
        let coeff_energy: f64 = spec.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() / 120.0;
        assert!((pixel_energy - coeff_energy).abs() <= 1e-9 * pixel_energy);
    }

    #[test]
    fn forward_inverse_roundtrip() {
        for &(w, h) in &[(8usize, 8usize), (81, 63), (7, 13)] {
            let data = random_plane(w, h, w as u64 * 31 + h as u64);
            let spec = dft2(plane(w, h, &data)).unwrap();
            let (back, max_imag) = idft2_real(&spec);
            assert!(max_imag <= 1e-9);
            let worst = data
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 1e-9, "{w}x{h} roundtrip error {worst}");
        }
    }

    #[test]
    fn real_input_gives_hermitian_spectrum() {
        for &(w, h) in &[(16usize, 16usize), (11, 18)] {
            let data = random_plane(w, h, 100 + w as u64);
            let spec = dft2(plane(w, h, &data)).unwrap();
            assert!(spec.hermitian_residual() <= 1e-9);
        }
    }

    #[test]
    fn rejects_sub_2x2() {
        let data = vec![0.0; 4];
        assert!(dft2(plane(1, 4, &data)).is_err());
        assert!(dft2(plane(4, 1, &data)).is_err());
    }

    #[test]
    fn decomposition_identity() {
        for seed in 0..5u64 {
            let data = random_plane(23, 17, seed);
            let (p, s) = periodic_smooth_decompose(plane(23, 17, &data)).unwrap();
            for i in 0..data.len() {
                assert!((p[i] + s[i] - data[i]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn zero_boundary_discrepancy_means_zero_smooth() {
        // Wrap-consistent borders: opposite edges equal, so v == 0 exactly.
        let (w, h) = (16usize, 12usize);
        let mut data = random_plane(w, h, 9);
        for y in 0..h {
            data[y * w + (w - 1)] = data[y * w];
        }
        for x in 0..w {
            data[(h - 1) * w + x] = data[x];
        }
        let (_, s) = periodic_smooth_decompose(plane(w, h, &data)).unwrap();
        let worst = s.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-6, "smooth residual {worst}");
    }

    #[test]
    fn ramp_periodic_component_has_near_equal_edge_columns() {
        let (w, h) = (128usize, 64usize);
        let data: Vec<f64> = (0..w * h).map(|i| (i % w) as f64 / w as f64).collect();
        let (p, _) = periodic_smooth_decompose(plane(w, h, &data)).unwrap();
        let range = (w - 1) as f64 / w as f64;
        let mut worst = 0.0f64;
        for y in 0..h {
            worst = worst.max((p[y * w] - p[y * w + (w - 1)]).abs());
        }
        assert!(worst <= 0.01 * range, "edge mismatch {worst} vs range {range}");
    }

    fn smooth_high_ring_share(samples: &[f64], w: usize, h: usize) -> f64 {
        let (_, s) = periodic_smooth_decompose(plane(w, h, samples)).unwrap();
        let spec = dft2(plane(w, h, &s)).unwrap();
        let cutoff = max_ring(w, h) / 4;
        let mut total = 0.0;
        let mut high = 0.0;
        for j in 0..h {
            for i in 0..w {
                let e = spec.coeffs()[j * w + i].norm_sqr();
                total += e;
                if ring_of(signed_frequency(i, w), signed_frequency(j, h)) > cutoff {
                    high += e;
                }
            }
        }
        high / total
    }

    #[test]
    fn smooth_component_energy_is_low_frequency() {
        // The tail share is driven by how rough the image is along its
        // borders: smooth natural-like fields stay below 5%, while the
        // rougher 1.7-exponent noise still keeps a strong low-frequency
        // concentration.
        for seed in 0..3u64 {
            let smooth_field = crate::synth::gen_colored_noise(128, 128, 2.5, seed).unwrap();
            let share = smooth_high_ring_share(smooth_field.plane(0), 128, 128);
            assert!(share < 0.05, "seed {seed}: share {share}");

            let target_class = crate::synth::gen_colored_noise(128, 128, 1.7, seed).unwrap();
            let share = smooth_high_ring_share(target_class.plane(0), 128, 128);
            assert!(share < 0.25, "seed {seed}: share {share}");
        }
    }

    #[test]
    fn radial_profile_dc_only() {
        let mut img = Image::zeros(16, 16, 1);
        img.data_mut().iter_mut().for_each(|v| *v = 0.25);
        let spec = dft2(img.plane_ref(0)).unwrap();
        let prof = radial_profile(&spec);
        assert!((prof.rings[0].mean_modulus - 0.25 * 256.0).abs() <= 1e-9);
        for ring in &prof.rings[1..] {
            assert!(ring.mean_modulus <= 1e-9);
        }
    }

    #[test]
    fn ring_counts_match_exhaustive_enumeration_8x8() {
        let data = random_plane(8, 8, 17);
        let spec = dft2(plane(8, 8, &data)).unwrap();
        let prof = radial_profile(&spec);

        let mut expect = std::collections::BTreeMap::new();
        for xi2 in -4i64..4 {
            for xi1 in -4i64..4 {
                let r = (((xi1 * xi1 + xi2 * xi2) as f64).sqrt()).round() as usize;
                *expect.entry(r).or_insert(0usize) += 1;
            }
        }
        let total: usize = prof.rings.iter().map(|r| r.count).sum();
        assert_eq!(total, 64);
        assert_eq!(prof.max_radius(), *expect.keys().max().unwrap());
        for ring in &prof.rings {
            assert_eq!(ring.count, expect.get(&ring.radius).copied().unwrap_or(0), "ring {}", ring.radius);
        }
    }

    #[test]
    fn profile_ignores_phases() {
        let data = random_plane(20, 20, 23);
        let mut spec = dft2(plane(20, 20, &data)).unwrap();
        let before = radial_profile(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for c in spec.coeffs_mut() {
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            *c *= Complex64::new(phi.cos(), phi.sin());
        }
        let after = radial_profile(&spec);
        for (a, b) in before.rings.iter().zip(&after.rings) {
            assert_eq!(a.count, b.count);
            assert!((a.mean_modulus - b.mean_modulus).abs() <= 1e-9 * (1.0 + a.mean_modulus));
        }
    }

    #[test]
    fn log_log_fit_recovers_exact_power_law() {
        let pts: Vec<(f64, f64)> = (2..100).map(|r| (r as f64, 3.5 * (r as f64).powf(-1.7))).collect();
        let fit = fit_log_log(pts).unwrap();
        assert!((fit.slope + 1.7).abs() <= 1e-12);
        assert!(fit.stderr <= 1e-12);
    }
}
