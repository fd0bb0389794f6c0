//! Quantitative evaluation: PSNR plus the three constraint-respect metrics
//! (color histogram distance, reversibility error, spectral slope fit).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fourier::{dft2, fit_log_log, periodic_smooth_decompose, radial_profile};
use crate::image::{degrade, resample_bilinear, Image, PlaneRef};
use crate::rng::{mix_seed, unit_direction};

/// Peak signal-to-noise ratio in dB for samples in `[0, 1]`; identical
/// images give `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch("psnr inputs must have equal shape".into()));
    }
    let mse = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.data().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

/// Sliced 1-D Wasserstein-1 distance between the color distributions,
/// averaged over `num_slices` seeded directions and reported on the 0-255
/// scale. Inputs of different sizes are compared after bilinearly stretching
/// the smaller one.
pub fn sliced_hist_distance(a: &Image, b: &Image, seed: u64, num_slices: usize) -> Result<f64> {
    if a.channels() != b.channels() {
        return Err(Error::DimensionMismatch(format!(
            "channel mismatch: {} vs {}",
            a.channels(),
            b.channels()
        )));
    }
    if num_slices < 1 {
        return Err(Error::InvalidParam("num_slices must be >= 1".into()));
    }
    let (first, second);
    let (a, b) = if (a.width(), a.height()) == (b.width(), b.height()) {
        (a, b)
    } else if a.width() * a.height() >= b.width() * b.height() {
        second = resample_bilinear(b, a.width(), a.height())?;
        (a, &second)
    } else {
        first = resample_bilinear(a, b.width(), b.height())?;
        (&first, b)
    };

    let n = a.width() * a.height();
    let channels = a.channels();

    // One channel: every direction gives the same 1-D transport distance, so
    // compute the sorted-difference value once, exactly.
    if channels == 1 {
        let mut pa = a.plane(0).to_vec();
        let mut pb = b.plane(0).to_vec();
        pa.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
        pb.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
        let w1 = pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
        return Ok(w1 * 255.0);
    }

    let mut pa = vec![0.0f64; n];
    let mut pb = vec![0.0f64; n];
    let mut total = 0.0;
    for slice in 0..num_slices {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, slice as u64));
        let theta = unit_direction(&mut rng, channels);
        for i in 0..n {
            let mut sa = 0.0;
            let mut sb = 0.0;
            for (c, &t) in theta.iter().enumerate() {
                sa += t * a.plane(c)[i];
                sb += t * b.plane(c)[i];
            }
            pa[i] = sa;
            pb[i] = sb;
        }
        pa.sort_by(|x, y| x.partial_cmp(y).expect("finite projections"));
        pb.sort_by(|x, y| x.partial_cmp(y).expect("finite projections"));
        total += pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
    }
    Ok(total / num_slices as f64 * 255.0)
}

/// Mean squared residual per low-resolution sample between `degrade(w)` and
/// the reference `u`.
pub fn reversibility_error(w: &Image, u: &Image, factor: f64) -> Result<f64> {
    let d = degrade(w, factor)?;
    if !d.same_shape(u) {
        return Err(Error::DimensionMismatch(format!(
            "reference is {}x{}x{} but degrade gives {}x{}x{}",
            u.width(),
            u.height(),
            u.channels(),
            d.width(),
            d.height(),
            d.channels()
        )));
    }
    Ok(d
        .data()
        .iter()
        .zip(u.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / u.data().len() as f64)
}

/// Result of the log-log radial slope regression.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    /// Standard error of the slope estimate; small values mean the radial
    /// modulus decays cleanly as a power law.
    pub stderr: f64,
}

/// Regresses `ln(ring mean modulus)` on `ln(ring radius)` over the periodic
/// component, using rings `2..=floor(0.9 r_max)` with at least 4 members.
pub fn slope_error(img: &Image) -> Result<SlopeFit> {
    if img.width().min(img.height()) < 16 {
        return Err(Error::InvalidParam("slope regression needs at least 16 pixels per side".into()));
    }
    let (w, h) = (img.width(), img.height());

    // Per-ring mean moduli averaged across channels.
    let mut sums: Vec<f64> = Vec::new();
    for c in 0..img.channels() {
        let (periodic, _) = periodic_smooth_decompose(img.plane_ref(c))?;
        let spec = dft2(PlaneRef { width: w, height: h, samples: &periodic })?;
        let prof = radial_profile(&spec);
        if sums.is_empty() {
            sums = vec![0.0; prof.rings.len()];
        }
        for (dst, ring) in sums.iter_mut().zip(&prof.rings) {
            *dst += ring.mean_modulus / img.channels() as f64;
        }
    }
    let (periodic, _) = periodic_smooth_decompose(img.plane_ref(0))?;
    let spec = dft2(PlaneRef { width: w, height: h, samples: &periodic })?;
    let counts: Vec<usize> = radial_profile(&spec).rings.iter().map(|r| r.count).collect();

    let r_max = sums.len() - 1;
    let hi = (0.9 * r_max as f64).floor() as usize;
    let points: Vec<(f64, f64)> = (2..=hi)
        .filter(|&r| counts[r] >= 4 && sums[r] > 0.0)
        .map(|r| (r as f64, sums[r]))
        .collect();
    if points.len() < 8 {
        return Err(Error::InsufficientRings(points.len()));
    }
    let fit = fit_log_log(points).expect("at least 8 positive points");
    Ok(SlopeFit { slope: fit.slope, stderr: fit.stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::gen_colored_noise;
    use rand::{Rng, SeedableRng};

    fn random_image(w: usize, h: usize, c: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..w * h * c).map(|_| rng.gen_range(0.0..1.0)).collect();
        Image::new(w, h, c, data).unwrap()
    }

    #[test]
    fn psnr_identical_is_infinite() {
        let a = random_image(8, 8, 3, 1);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psnr_constant_offset_is_twenty_db() {
        let a = Image::constant(16, 16, 1, 0.4);
        let b = Image::constant(16, 16, 1, 0.5);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() <= 1e-9);
    }

    #[test]
    fn psnr_matches_direct_mse_oracle() {
        let a = random_image(9, 7, 1, 2);
        let b = random_image(9, 7, 1, 3);
        let mse: f64 = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            / 63.0;
        let expect = 10.0 * (1.0 / mse).log10();
        assert!((psnr(&a, &b).unwrap() - expect).abs() <= 1e-9);
        assert!(psnr(&a, &random_image(8, 8, 1, 4)).is_err());
    }

    #[test]
    fn sliced_distance_basics() {
        let a = random_image(8, 8, 3, 5);
        assert_eq!(sliced_hist_distance(&a, &a, 0, 16).unwrap(), 0.0);
        let zero = Image::constant(8, 8, 1, 0.0);
        let one = Image::constant(8, 8, 1, 1.0);
        assert_eq!(sliced_hist_distance(&zero, &one, 0, 8).unwrap(), 255.0);
    }

    #[test]
    fn sliced_distance_matches_sorting_oracle_in_1d() {
        let a = random_image(8, 8, 1, 6);
        let b = random_image(8, 8, 1, 7);
        let mut va: Vec<f64> = a.plane(0).to_vec();
        let mut vb: Vec<f64> = b.plane(0).to_vec();
        va.sort_by(|x, y| x.partial_cmp(y).unwrap());
        vb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let oracle = va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).sum::<f64>() / 64.0 * 255.0;
        let got = sliced_hist_distance(&a, &b, 11, 16).unwrap();
        assert_eq!(got, oracle);
    }

    #[test]
    fn sliced_distance_is_symmetric_under_same_seed() {
        let a = random_image(12, 12, 3, 8);
        let b = random_image(12, 12, 3, 9);
        let ab = sliced_hist_distance(&a, &b, 21, 32).unwrap();
        let ba = sliced_hist_distance(&b, &a, 21, 32).unwrap();
        assert!((ab - ba).abs() <= 1e-12);
    }

    #[test]
    fn sliced_distance_stretches_smaller_input() {
        let a = random_image(32, 32, 1, 10);
        let b = degrade(&a, 2.0).unwrap();
        let d = sliced_hist_distance(&a, &b, 3, 8).unwrap();
        assert!(d.is_finite() && d >= 0.0);
    }

    #[test]
    fn reversibility_error_zero_for_consistent_pair() {
        let w = gen_colored_noise(64, 64, 1.7, 11).unwrap();
        let u = degrade(&w, 4.0).unwrap();
        assert!(reversibility_error(&w, &u, 4.0).unwrap() <= 1e-12);
    }

    #[test]
    fn reversibility_error_is_quadratic_in_the_residual() {
        let w = random_image(64, 64, 1, 12);
        let u = degrade(&gen_colored_noise(64, 64, 1.7, 13).unwrap(), 4.0).unwrap();
        let d = degrade(&w, 4.0).unwrap();
        // Double the residual by moving the reference away from degrade(w).
        let doubled = Image::new(
            16,
            16,
            1,
            u.data().iter().zip(d.data()).map(|(u, d)| 2.0 * u - d).collect(),
        )
        .unwrap();
        let e1 = reversibility_error(&w, &u, 4.0).unwrap();
        let e2 = reversibility_error(&w, &doubled, 4.0).unwrap();
        assert!((e2 - 4.0 * e1).abs() <= 1e-9 * e2);
    }

    #[test]
    fn slope_of_synthetic_noise_matches_generator() {
        let img = gen_colored_noise(512, 512, 1.7, 14).unwrap();
        let fit = slope_error(&img).unwrap();
        assert!((fit.slope + 1.7).abs() <= 0.05, "slope {}", fit.slope);
        assert!(fit.stderr <= 0.01, "stderr {}", fit.stderr);
    }

    #[test]
    fn slope_is_invariant_to_pixel_scaling() {
        let img = gen_colored_noise(64, 64, 1.7, 15).unwrap();
        let doubled = Image::new(
            64,
            64,
            1,
            img.data().iter().map(|v| 2.0 * v).collect(),
        )
        .unwrap();
        let a = slope_error(&img).unwrap();
        let b = slope_error(&doubled).unwrap();
        assert!((a.slope - b.slope).abs() <= 1e-9);
        assert!((a.stderr - b.stderr).abs() <= 1e-9);
    }

    #[test]
    fn slope_stderr_grows_with_broadband_contamination() {
        let img = gen_colored_noise(128, 128, 1.7, 16).unwrap();
        let clean = slope_error(&img).unwrap();

        let spread = img.data().iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let noisy = Image::new(
            128,
            128,
            1,
            img.data()
                .iter()
                .map(|v| v + 0.1 * spread * rng.gen_range(-1.0..1.0))
                .collect(),
        )
        .unwrap();
        let contaminated = slope_error(&noisy).unwrap();
        assert!(clean.stderr < contaminated.stderr);
    }

    #[test]
    fn slope_rejects_degenerate_inputs() {
        assert!(slope_error(&random_image(8, 8, 1, 18)).is_err());
        // Constant image: every usable ring mean is zero.
        let flat = Image::constant(64, 64, 1, 0.5);
        assert!(matches!(slope_error(&flat), Err(Error::InsufficientRings(_))));
    }
}
