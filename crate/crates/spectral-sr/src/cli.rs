//! Command-line frontend: dataset synthesis, degradation, super-resolution,
//! evaluation and spectrum reporting.
//!
//! Every seeded subcommand is bitwise reproducible, and output files are
//! written to a temporary sibling and renamed so no partial file survives a
//! failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::constraints::{SpectrumConstraintParams, SrContext};
use crate::error::{Error, Result};
use crate::fourier::{dft2, radial_profile};
use crate::image::{degrade, load_image, save_image, Image, ImageFormat};
use crate::metrics::{psnr, reversibility_error, sliced_hist_distance, slope_error};
use crate::synth::gen_colored_noise;
use crate::upsampler::UpsamplerKind;

#[derive(Parser)]
#[command(
    name = "spectral-sr",
    version,
    about = "Statistically constrained super-resolution for power-law-spectrum images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum UpsamplerArg {
    Bilinear,
    SpectralDetail,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic colored-noise image with a prescribed slope.
    Synth {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        /// Spectral decay exponent of the radial modulus.
        #[arg(long, default_value_t = 1.7)]
        slope: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output image (.pfm lossless, .png 16-bit).
        #[arg(long)]
        out: PathBuf,
        /// Optional 8-bit PNG preview.
        #[arg(long)]
        png: Option<PathBuf>,
        /// Write a JSON run manifest recording all parameters.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Blur and decimate an image by a factor.
    Degrade {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        factor: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Super-resolve a low-resolution image by iterative constrained upsampling.
    Sr {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        zoom: f64,
        #[arg(long, value_enum, default_value_t = UpsamplerArg::SpectralDetail)]
        upsampler: UpsamplerArg,
        /// Relative amplitude of the injected spectral detail.
        #[arg(long, default_value_t = 0.01)]
        detail_sigma: f64,
        /// First constrained ring; defaults to the LR Nyquist ring.
        #[arg(long)]
        r0: Option<usize>,
        /// Spectral decay exponent imposed past r0.
        #[arg(long, default_value_t = 1.7)]
        slope: f64,
        /// Projection rounds per upsampling step.
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Disable the spectrum constraint.
        #[arg(long)]
        no_spectrum: bool,
        /// Disable the histogram constraint.
        #[arg(long)]
        no_hist: bool,
        /// Disable the reversibility constraint.
        #[arg(long)]
        no_rev: bool,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Report quality metrics as `metric,value` CSV rows on stdout.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Low-resolution input; enables the reversibility row.
        #[arg(long)]
        lr: Option<PathBuf>,
        /// Degradation factor between test and lr.
        #[arg(long)]
        factor: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        slices: usize,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Write the radial spectrum profile as CSV (`ring,count,mean_modulus`).
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

/// Parses arguments from the process environment, runs the subcommand and
/// returns the exit code, printing a one-line diagnostic on failure.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { width, height, slope, seed, out, png, manifest } => {
            let img = gen_colored_noise(width, height, slope, seed)?;
            write_image_atomic(&img, &out)?;
            if let Some(png_path) = &png {
                write_atomic(png_path, |tmp| save_image(&img, tmp, ImageFormat::Png8))?;
            }
            write_manifest(
                manifest.as_deref(),
                serde_json::json!({
                    "command": "synth",
                    "width": width,
                    "height": height,
                    "slope": slope,
                    "seed": seed,
                    "out": out,
                    "png": png,
                }),
            )
        }
        Command::Degrade { input, factor, out, manifest } => {
            let img = load_image(&input)?;
            let result = degrade(&img, factor)?;
            write_image_atomic(&result, &out)?;
            write_manifest(
                manifest.as_deref(),
                serde_json::json!({
                    "command": "degrade",
                    "in": input,
                    "factor": factor,
                    "out": out,
                }),
            )
        }
        Command::Sr {
            input,
            zoom,
            upsampler,
            detail_sigma,
            r0,
            slope,
            rounds,
            seed,
            out,
            no_spectrum,
            no_hist,
            no_rev,
            manifest,
        } => {
            let lr = load_image(&input)?;
            let mut ctx = SrContext::new(&lr, zoom, seed)?;
            ctx.rounds = rounds;
            ctx.upsampler = match upsampler {
                UpsamplerArg::Bilinear => UpsamplerKind::bilinear(),
                UpsamplerArg::SpectralDetail => UpsamplerKind::spectral_detail(detail_sigma, slope),
            };
            if let Some(r0) = r0 {
                ctx.constraints.spectrum = Some(SpectrumConstraintParams::new(r0, slope)?);
            } else {
                ctx.constraints.spectrum = Some(SpectrumConstraintParams::for_lr(&lr, slope)?);
            }
            if no_spectrum {
                ctx.constraints.spectrum = None;
            }
            if no_hist {
                ctx.constraints.hist = None;
            }
            if no_rev {
                ctx.constraints.rev = None;
            }
            let result = crate::constraints::sr_pipeline(&lr, &ctx)?;
            write_image_atomic(&result, &out)?;
            write_manifest(
                manifest.as_deref(),
                serde_json::json!({
                    "command": "sr",
                    "in": input,
                    "zoom": zoom,
                    "upsampler": match upsampler {
                        UpsamplerArg::Bilinear => "bilinear",
                        UpsamplerArg::SpectralDetail => "spectral-detail",
                    },
                    "detail_sigma": detail_sigma,
                    "r0": ctx.constraints.spectrum.map(|s| s.r0),
                    "slope": slope,
                    "rounds": rounds,
                    "seed": seed,
                    "no_spectrum": no_spectrum,
                    "no_hist": no_hist,
                    "no_rev": no_rev,
                    "out": out,
                }),
            )
        }
        Command::Metrics { reference, test, lr, factor, seed, slices, manifest } => {
            let ref_img = load_image(&reference)?;
            let test_img = load_image(&test)?;
            println!("psnr,{}", psnr(&ref_img, &test_img)?);
            println!("sliced_hist_distance,{}", sliced_hist_distance(&ref_img, &test_img, seed, slices)?);
            if let Some(lr_path) = &lr {
                let factor = factor.ok_or_else(|| {
                    Error::InvalidParam("--factor is required when --lr is given".into())
                })?;
                let lr_img = load_image(lr_path)?;
                println!("reversibility_error,{}", reversibility_error(&test_img, &lr_img, factor)?);
            }
            let fit = slope_error(&test_img)?;
            println!("slope,{}", fit.slope);
            println!("slope_stderr,{}", fit.stderr);
            write_manifest(
                manifest.as_deref(),
                serde_json::json!({
                    "command": "metrics",
                    "ref": reference,
                    "test": test,
                    "lr": lr,
                    "factor": factor,
                    "seed": seed,
                    "slices": slices,
                }),
            )
        }
        Command::Spectrum { input, out, manifest } => {
            let img = load_image(&input)?;
            let mut csv = String::from("ring,count,mean_modulus\n");
            let mut means: Vec<f64> = Vec::new();
            let mut counts: Vec<usize> = Vec::new();
            for c in 0..img.channels() {
                let prof = radial_profile(&dft2(img.plane_ref(c))?);
                if means.is_empty() {
                    means = vec![0.0; prof.rings.len()];
                    counts = prof.rings.iter().map(|r| r.count).collect();
                }
                for (dst, ring) in means.iter_mut().zip(&prof.rings) {
                    *dst += ring.mean_modulus / img.channels() as f64;
                }
            }
            for (ring, (&count, &mean)) in counts.iter().zip(&means).enumerate() {
                csv.push_str(&format!("{ring},{count},{mean}\n"));
            }
            write_atomic(&out, |tmp| {
                fs::write(tmp, &csv).map_err(|e| Error::io(tmp, e))
            })?;
            write_manifest(
                manifest.as_deref(),
                serde_json::json!({
                    "command": "spectrum",
                    "in": input,
                    "out": out,
                }),
            )
        }
    }
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("pfm") => Ok(ImageFormat::Pfm),
        Some("png") => Ok(ImageFormat::Png16),
        other => Err(Error::InvalidParam(format!(
            "unsupported output extension {:?}; use .pfm or .png",
            other.unwrap_or("<none>")
        ))),
    }
}

fn write_image_atomic(img: &Image, path: &Path) -> Result<()> {
    let format = format_for(path)?;
    write_atomic(path, |tmp| save_image(img, tmp, format))
}

/// Writes through a temporary sibling and renames into place.
fn write_atomic(path: &Path, write: impl Fn(&Path) -> Result<()>) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParam(format!("output path {} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!("{}.tmp", file_name.to_string_lossy()));
    if let Err(e) = write(&tmp) {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_manifest(path: Option<&Path>, value: serde_json::Value) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let body = serde_json::to_string_pretty(&value).expect("manifest is valid JSON");
    write_atomic(path, |tmp| fs::write(tmp, &body).map_err(|e| Error::io(tmp, e)))
}
