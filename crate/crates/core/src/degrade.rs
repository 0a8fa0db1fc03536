//! Test-data factory for the degradation protocol: PSF generation, kernel
//! error injection, circular blurring, and white Gaussian noise with dBm
//! power semantics. Everything is seeded and reproducible.

use crate::error::{Error, Result};
use crate::fft::conv_circular;
use crate::grid::{Image, PsfKernel};
use crate::rng::GaussianSource;

/// Subpixel resolution of the motion-PSF line integration (16x per axis).
const MOTION_SUPERSAMPLE: f64 = 256.0;

/// Parameters for a generated PSF.
#[derive(Debug, Clone, PartialEq)]
pub enum PsfSpec {
    Gaussian { rows: usize, cols: usize, sigma: f64 },
    Motion { len: f64, theta_deg: f64 },
}

impl PsfSpec {
    pub fn build(&self) -> Result<PsfKernel> {
        match *self {
            PsfSpec::Gaussian { rows, cols, sigma } => psf_gaussian(rows, cols, sigma),
            PsfSpec::Motion { len, theta_deg } => psf_motion(len, theta_deg),
        }
    }
}

/// Full description of one degradation run.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationSpec {
    pub psf: PsfSpec,
    /// Scale of the kernel-error perturbation `e = std * randn`.
    pub std: f64,
    /// Noise power in dBm into a 1-ohm load; `None` disables noise.
    pub noise_power_dbm: Option<f64>,
    pub seed: u64,
}

/// Ground truth retained for evaluation only; the solver never sees it.
#[derive(Debug, Clone)]
pub struct DegradationTruth {
    /// The true kernel `k` used to blur.
    pub kernel: PsfKernel,
    /// The injected kernel error `e` (so `k = k0 + e`).
    pub kernel_error: PsfKernel,
    /// The additive noise field, if noise was enabled.
    pub noise: Option<Image>,
}

/// Output of the forward model `y = k (*) x + n` plus the observed kernel.
#[derive(Debug, Clone)]
pub struct Degraded {
    /// Blurred, noisy observation. Not clipped to [0, 1].
    pub observed: Image,
    /// The perturbed kernel `k0 = k - e` handed to the solver.
    pub k0: PsfKernel,
    pub truth: DegradationTruth,
}

/// Normalized Gaussian PSF on the integer lattice centered at
/// `((rows-1)/2, (cols-1)/2)`.
pub fn psf_gaussian(rows: usize, cols: usize, sigma: f64) -> Result<PsfKernel> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimension("PSF must be non-empty".into()));
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let cy = (rows as f64 - 1.0) / 2.0;
    let cx = (cols as f64 - 1.0) / 2.0;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut weights = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let dy = i as f64 - cy;
            let dx = j as f64 - cx;
            weights.push((-(dx * dx + dy * dy) * inv).exp());
        }
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    PsfKernel::new(rows, cols, weights)
}

/// Linear-motion PSF: a length-`len` segment at `theta_deg` (counterclockwise
/// degrees), rasterized by supersampled line integration and normalized to
/// sum 1. The kernel support is the segment's bounding box of touched cells.
pub fn psf_motion(len: f64, theta_deg: f64) -> Result<PsfKernel> {
    if len.is_nan() || len < 1.0 {
        return Err(Error::Domain(format!("motion length must be >= 1, got {len}")));
    }
    let theta = theta_deg.to_radians();
    // x grows along columns; y grows upward, i.e. against the row index,
    // so a 45-degree kernel runs from bottom-left to top-right.
    let (dx, dy) = (theta.cos(), theta.sin());
    let steps = (len * MOTION_SUPERSAMPLE).ceil() as usize;
    let step = len / steps as f64;

    // Accumulate arc length per touched lattice cell.
    let mut hits: std::collections::BTreeMap<(i64, i64), f64> = std::collections::BTreeMap::new();
    for s in 0..steps {
        let t = -len / 2.0 + (s as f64 + 0.5) * step;
        let x = t * dx;
        let y = t * dy;
        let cell = ((x + 0.5).floor() as i64, (y + 0.5).floor() as i64);
        *hits.entry(cell).or_insert(0.0) += step;
    }

    let min_x = hits.keys().map(|&(x, _)| x).min().expect("non-empty");
    let max_x = hits.keys().map(|&(x, _)| x).max().expect("non-empty");
    let min_y = hits.keys().map(|&(_, y)| y).min().expect("non-empty");
    let max_y = hits.keys().map(|&(_, y)| y).max().expect("non-empty");
    let cols = (max_x - min_x + 1) as usize;
    let rows = (max_y - min_y + 1) as usize;

    let mut weights = vec![0.0; rows * cols];
    let total: f64 = hits.values().sum();
    for (&(x, y), &mass) in &hits {
        let col = (x - min_x) as usize;
        let row = (max_y - y) as usize; // y up = row index down
        weights[row * cols + col] = mass / total;
    }
    PsfKernel::new(rows, cols, weights)
}

/// Draw the kernel error `e` (i.i.d. N(0, std^2)) and return
/// `(k0, e)` with `k0 = k - e`.
pub fn perturb_kernel(
    kernel: &PsfKernel,
    std: f64,
    rng: &mut GaussianSource,
) -> Result<(PsfKernel, PsfKernel)> {
    if std < 0.0 {
        return Err(Error::Domain(format!("std must be nonnegative, got {std}")));
    }
    let error_weights: Vec<f64> = (0..kernel.rows() * kernel.cols())
        .map(|_| std * rng.sample())
        .collect();
    let error = PsfKernel::new(kernel.rows(), kernel.cols(), error_weights)?;
    let k0 = kernel.sub(&error)?;
    Ok((k0, error))
}

/// Noise variance (watts into 1 ohm) for a dBm power level.
pub fn dbm_to_variance(power_dbm: f64) -> f64 {
    10.0_f64.powf((power_dbm - 30.0) / 10.0)
}

/// White Gaussian noise field with dBm power semantics.
pub fn wgn_noise(height: usize, width: usize, power_dbm: f64, rng: &mut GaussianSource) -> Image {
    let std = dbm_to_variance(power_dbm).sqrt();
    Image::from_fn(height, width, |_, _| std * rng.sample())
}

/// Run the forward model: blur with the true kernel `k = k0 + e`, then add
/// noise. The observation is not clipped; the solver receives only
/// `observed` and `k0`.
pub fn degrade(img: &Image, spec: &DegradationSpec) -> Result<Degraded> {
    let kernel = spec.psf.build()?;
    if kernel.rows() > img.height() || kernel.cols() > img.width() {
        return Err(Error::InvalidDimension(format!(
            "kernel {}x{} larger than image {}x{}",
            kernel.rows(),
            kernel.cols(),
            img.height(),
            img.width()
        )));
    }
    let mut rng = GaussianSource::new(spec.seed);
    let (k0, kernel_error) = perturb_kernel(&kernel, spec.std, &mut rng)?;
    let blurred = conv_circular(img, &kernel)?;
    let (observed, noise) = match spec.noise_power_dbm {
        Some(p) => {
            let noise = wgn_noise(img.height(), img.width(), p, &mut rng);
            (blurred.zip_map(&noise, |a, b| a + b), Some(noise))
        }
        None => (blurred, None),
    };
    Ok(Degraded {
        observed,
        k0,
        truth: DegradationTruth { kernel, kernel_error, noise },
    })
}

/// Deterministic edge-rich test scene: geometric structures, thin bars,
/// stripe patches and mild texture over a split background. Blur degrades
/// it the way it degrades structured natural images, which is what the
/// restoration experiments need; values stay inside (0, 1).
pub fn synthetic_scene(height: usize, width: usize) -> Image {
    let smoothstep = |edge0: f64, edge1: f64, x: f64| -> f64 {
        let t = ((x - edge0) / (edge1 - edge0)).clamp(0.0, 1.0);
        t * t * (3.0 - 2.0 * t)
    };
    let h = height as f64;
    let w = width as f64;
    // Edge softness of about one pixel regardless of scene size.
    let px = 1.0 / h.min(w);
    Image::from_fn(height, width, |i, j| {
        let u = i as f64 / h;
        let v = j as f64 / w;

        // Two-tone background with a gentle illumination ramp.
        let mut val = if v + 0.25 * u < 0.55 { 0.30 } else { 0.58 };
        val += 0.06 * (1.3 * std::f64::consts::PI * u).cos();

        // Bright disc with a dark ring.
        let d = ((u - 0.30) * (u - 0.30) + (v - 0.26) * (v - 0.26)).sqrt();
        val += 0.34 * (1.0 - smoothstep(0.15 - px, 0.15 + px, d));
        val -= 0.22 * (smoothstep(0.17 - px, 0.17 + px, d)
            - smoothstep(0.21 - px, 0.21 + px, d));

        // Dark rectangle with a bright slot inside.
        if (0.56..0.82).contains(&u) && (0.08..0.40).contains(&v) {
            val -= 0.26;
            if (0.64..0.74).contains(&u) && (0.14..0.34).contains(&v) {
                val += 0.40;
            }
        }

        // Thin diagonal bars, roughly two pixels wide.
        for (offset, gain) in [(0.0, 0.30), (0.12, -0.24), (0.24, 0.18)] {
            let d_bar = (u - v + offset).abs();
            val += gain * (1.0 - smoothstep(px, 3.0 * px, d_bar));
        }

        // Stripe patch: vertical square wave with an 8-pixel period.
        if (0.58..0.92).contains(&u) && (0.55..0.93).contains(&v) {
            let phase = (j / 4) % 2;
            val = if phase == 0 { 0.22 } else { 0.74 };
        }

        // Corner wedge.
        if u + v > 1.62 {
            val = 0.85 - 0.5 * (u - v).abs();
        }

        // Mild deterministic texture everywhere.
        val += 0.03 * (40.0 * u).sin() * (37.0 * v).sin()
            + 0.02 * (61.0 * (u + v)).sin();
        val.clamp(0.02, 0.98)
    })
}

/// Two-tone checkerboard used by the smoke instances.
pub fn checkerboard(height: usize, width: usize, tile: usize) -> Image {
    assert!(tile > 0, "tile must be positive");
    Image::from_fn(height, width, |i, j| {
        if (i / tile + j / tile).is_multiple_of(2) {
            0.15
        } else {
            0.85
        }
    })
}
