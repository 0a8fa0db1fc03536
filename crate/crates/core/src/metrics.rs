//! Image-quality metrics: PSNR, SSIM, FSIM (see [`crate::fsim`]) and the
//! relative-change stopping criterion.
//!
//! The reference parameterizations are pinned: SSIM uses an 11x11 Gaussian
//! window with sigma 1.5 and constants C1 = 0.01^2, C2 = 0.03^2 on the
//! [0, 1] dynamic range; FSIM uses the standard log-Gabor bank with
//! T1 = 0.85, T2 = 160 on a [0, 255] rescaling.

use crate::error::{Error, Result};
use crate::fsim::fsim;
use crate::grid::Image;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// PSNR cap used when serializing the infinite identity case.
pub const PSNR_CAP_DB: f64 = 999.0;

/// The three quality scores of one restored/reference pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub psnr: f64,
    pub ssim: f64,
    pub fsim: f64,
}

impl QualityReport {
    pub fn compute(x: &Image, reference: &Image) -> Result<Self> {
        Ok(Self {
            psnr: psnr(x, reference)?,
            ssim: ssim(x, reference)?,
            fsim: fsim(x, reference)?,
        })
    }

    /// One CSV row `psnr,ssim,fsim` at 6 decimal places; an infinite PSNR
    /// serializes as the 999 dB cap.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6}",
            self.psnr.min(PSNR_CAP_DB),
            self.ssim,
            self.fsim
        )
    }
}

/// Peak signal-to-noise ratio in dB with peak 1. Identical images return
/// `f64::INFINITY`; serialization caps it at [`PSNR_CAP_DB`].
pub fn psnr(x: &Image, reference: &Image) -> Result<f64> {
    x.check_same_shape(reference, "psnr inputs")?;
    let n = x.len() as f64;
    let mse: f64 = x
        .data()
        .iter()
        .zip(reference.data().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

/// Separable valid-region filtering with a 1D window along both axes.
/// Output shrinks by `window - 1` in each dimension.
fn filter_valid(img: &Image, window: &[f64]) -> Image {
    let k = window.len();
    let (h, w) = (img.height(), img.width());
    // Rows pass.
    let mut rows_done = Image::zeros(h, w - k + 1);
    for i in 0..h {
        for j in 0..w - k + 1 {
            let mut acc = 0.0;
            for (t, &g) in window.iter().enumerate() {
                acc += g * img.get(i, j + t);
            }
            rows_done.set(i, j, acc);
        }
    }
    // Columns pass.
    let mut out = Image::zeros(h - k + 1, w - k + 1);
    for i in 0..h - k + 1 {
        for j in 0..w - k + 1 {
            let mut acc = 0.0;
            for (t, &g) in window.iter().enumerate() {
                acc += g * rows_done.get(i + t, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}

fn gaussian_window() -> Vec<f64> {
    let c = (SSIM_WINDOW as f64 - 1.0) / 2.0;
    let mut w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| (-((i as f64 - c) * (i as f64 - c)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    w
}

/// Mean local structural similarity over all fully-contained windows.
pub fn ssim(x: &Image, reference: &Image) -> Result<f64> {
    x.check_same_shape(reference, "ssim inputs")?;
    if x.height() < SSIM_WINDOW || x.width() < SSIM_WINDOW {
        return Err(Error::InvalidDimension(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}",
            x.height(),
            x.width()
        )));
    }
    let window = gaussian_window();
    let mu_x = filter_valid(x, &window);
    let mu_y = filter_valid(reference, &window);
    let xx = filter_valid(&x.zip_map(x, |a, b| a * b), &window);
    let yy = filter_valid(&reference.zip_map(reference, |a, b| a * b), &window);
    let xy = filter_valid(&x.zip_map(reference, |a, b| a * b), &window);

    let mut total = 0.0;
    for idx in 0..mu_x.len() {
        let (mx, my) = (mu_x.data()[idx], mu_y.data()[idx]);
        let var_x = xx.data()[idx] - mx * mx;
        let var_y = yy.data()[idx] - my * my;
        let cov = xy.data()[idx] - mx * my;
        let num = (2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2);
        let den = (mx * mx + my * my + SSIM_C1) * (var_x + var_y + SSIM_C2);
        total += num / den;
    }
    Ok(total / mu_x.len() as f64)
}

/// Relative change `||new - old||_2 / ||new||_2` of successive iterates.
pub fn relative_change(x_new: &Image, x_old: &Image) -> Result<f64> {
    x_new.check_same_shape(x_old, "relative_change inputs")?;
    let new_norm = x_new.norm_l2();
    if new_norm == 0.0 {
        return Err(Error::Domain(
            "relative change undefined for a zero iterate".into(),
        ));
    }
    let diff: f64 = x_new
        .data()
        .iter()
        .zip(x_old.data().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / new_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrade::{synthetic_scene, wgn_noise};
    use crate::rng::{GaussianSource, SplitMix64};

    fn random_image(h: usize, w: usize, seed: u64) -> Image {
        let mut rng = SplitMix64::new(seed);
        Image::from_fn(h, w, |_, _| rng.next_f64())
    }

    #[test]
    fn psnr_identity_is_infinite_and_caps_at_999() {
        let img = random_image(16, 16, 1);
        let value = psnr(&img, &img).unwrap();
        assert!(value.is_infinite());
        let report = QualityReport { psnr: value, ssim: 1.0, fsim: 1.0 };
        assert!(report.csv_row().starts_with("999.000000,"));
    }

    #[test]
    fn psnr_uniform_difference_closed_form() {
        let a = Image::constant(16, 16, 0.5);
        let b = Image::constant(16, 16, 0.6);
        let value = psnr(&a, &b).unwrap();
        assert!((value - 20.0).abs() <= 1e-10);
    }

    #[test]
    fn psnr_matches_naive_two_loop_oracle() {
        let a = random_image(24, 18, 2);
        let b = random_image(24, 18, 3);
        let mut acc = 0.0;
        for i in 0..24 {
            for j in 0..18 {
                let d = a.get(i, j) - b.get(i, j);
                acc += d * d;
            }
        }
        let want = 10.0 * (1.0 / (acc / (24.0 * 18.0))).log10();
        assert!((psnr(&a, &b).unwrap() - want).abs() <= 1e-10);
    }

    #[test]
    fn psnr_rejects_shape_mismatch() {
        let a = random_image(8, 8, 1);
        let b = random_image(8, 9, 1);
        assert!(psnr(&a, &b).is_err());
    }

    #[test]
    fn ssim_identity_is_one() {
        let img = random_image(32, 32, 5);
        assert!((ssim(&img, &img).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ssim_constant_shift_matches_luminance_term() {
        // For two constant images only the luminance term differs.
        let a = Image::constant(32, 32, 0.25);
        let b = Image::constant(32, 32, 0.75);
        let want = (2.0 * 0.25 * 0.75 + SSIM_C1) / (0.25 * 0.25 + 0.75 * 0.75 + SSIM_C1);
        assert!((ssim(&a, &b).unwrap() - want).abs() <= 1e-12);
    }

    #[test]
    fn ssim_of_uncorrelated_noise_is_near_zero() {
        let mut g = GaussianSource::new(11);
        let a = Image::from_fn(256, 256, |_, _| 0.5 + 0.2 * g.sample());
        let b = Image::from_fn(256, 256, |_, _| 0.5 + 0.2 * g.sample());
        let value = ssim(&a, &b).unwrap();
        assert!(value.abs() < 0.1, "ssim {value}");
    }

    #[test]
    fn ssim_is_symmetric() {
        let a = random_image(32, 32, 21);
        let b = random_image(32, 32, 22);
        let ab = ssim(&a, &b).unwrap();
        let ba = ssim(&b, &a).unwrap();
        assert!((ab - ba).abs() <= 1e-12);
    }

    #[test]
    fn ssim_rejects_images_smaller_than_window() {
        let a = random_image(10, 32, 1);
        assert!(ssim(&a, &a.clone()).is_err());
    }

    #[test]
    fn relative_change_basics() {
        let a = random_image(8, 8, 31);
        assert_eq!(relative_change(&a, &a).unwrap(), 0.0);
        let zero = Image::zeros(8, 8);
        assert!((relative_change(&a, &zero).unwrap() - 1.0).abs() <= 1e-15);
        assert!(relative_change(&zero, &a).is_err());
    }

    #[test]
    fn relative_change_matches_naive_norms() {
        let a = random_image(12, 12, 41);
        let b = random_image(12, 12, 42);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..12 {
            for j in 0..12 {
                num += (a.get(i, j) - b.get(i, j)).powi(2);
                den += a.get(i, j).powi(2);
            }
        }
        let want = num.sqrt() / den.sqrt();
        assert!((relative_change(&a, &b).unwrap() - want).abs() <= 1e-12);
    }

    #[test]
    fn psnr_decreases_with_noise_level() {
        let clean = synthetic_scene(64, 64);
        let mut values = Vec::new();
        for (i, &p) in [-40.0, -25.0, -10.0].iter().enumerate() {
            let mut rng = GaussianSource::new(100 + i as u64);
            let noise = wgn_noise(64, 64, p, &mut rng);
            let noisy = clean.zip_map(&noise, |a, b| a + b);
            values.push(psnr(&noisy, &clean).unwrap());
        }
        assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
    }
}
