//! Feature-similarity metric: phase congruency from a log-Gabor filter bank
//! (4 scales, 4 orientations) combined with Scharr gradient-magnitude
//! similarity, constants T1 = 0.85 and T2 = 160 on a [0, 255] rescaling,
//! following the metric's reference definition.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fft2, ifft2_complex};
use crate::grid::{ComplexGrid, Image};

const NSCALE: usize = 4;
const NORIENT: usize = 4;
const MIN_WAVELENGTH: f64 = 6.0;
const MULT: f64 = 2.0;
const SIGMA_ONF: f64 = 0.55;
const D_THETA_ON_SIGMA: f64 = 1.2;
const NOISE_K: f64 = 2.0;
const EPSILON: f64 = 1e-4;
const T1: f64 = 0.85;
const T2: f64 = 160.0;
const MIN_SIDE: usize = 32;

/// Feature similarity of two single-channel images on [0, 1].
pub fn fsim(x: &Image, reference: &Image) -> Result<f64> {
    x.check_same_shape(reference, "fsim inputs")?;
    if x.height() < MIN_SIDE || x.width() < MIN_SIDE {
        return Err(Error::InvalidDimension(format!(
            "fsim needs at least {MIN_SIDE}x{MIN_SIDE}, got {}x{}",
            x.height(),
            x.width()
        )));
    }

    // Work on the [0, 255] scale used by the reference definition.
    let a = downsample(&x.map(|v| v * 255.0));
    let b = downsample(&reference.map(|v| v * 255.0));

    let pc_a = phase_congruency(&a);
    let pc_b = phase_congruency(&b);
    let grad_a = scharr_magnitude(&a);
    let grad_b = scharr_magnitude(&b);

    let mut num = 0.0;
    let mut den = 0.0;
    for idx in 0..a.len() {
        let (p1, p2) = (pc_a.data()[idx], pc_b.data()[idx]);
        let (g1, g2) = (grad_a.data()[idx], grad_b.data()[idx]);
        let s_pc = (2.0 * p1 * p2 + T1) / (p1 * p1 + p2 * p2 + T1);
        let s_g = (2.0 * g1 * g2 + T2) / (g1 * g1 + g2 * g2 + T2);
        let pcm = p1.max(p2);
        num += s_pc * s_g * pcm;
        den += pcm;
    }
    Ok(num / den.max(1e-12))
}

/// Average-and-subsample by `F = max(1, round(min_side / 256))`.
fn downsample(img: &Image) -> Image {
    let min_side = img.height().min(img.width());
    let f = ((min_side as f64 / 256.0).round() as usize).max(1);
    if f == 1 {
        return img.clone();
    }
    let (h, w) = (img.height(), img.width());
    let averaged = Image::from_fn(h, w, |i, j| {
        let mut acc = 0.0;
        for u in 0..f {
            for v in 0..f {
                let (si, sj) = (i + u, j + v);
                if si < h && sj < w {
                    acc += img.get(si, sj);
                }
            }
        }
        acc / (f * f) as f64
    });
    Image::from_fn(h.div_ceil(f), w.div_ceil(f), |i, j| averaged.get(i * f, j * f))
}

/// Gradient magnitude with the Scharr operator, zero-padded borders.
fn scharr_magnitude(img: &Image) -> Image {
    let dx = [[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]];
    let (h, w) = (img.height() as isize, img.width() as isize);
    let sample = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= h || j >= w {
            0.0
        } else {
            img.get(i as usize, j as usize)
        }
    };
    Image::from_fn(img.height(), img.width(), |i, j| {
        let mut gx = 0.0;
        let mut gy = 0.0;
        for u in 0..3isize {
            for v in 0..3isize {
                let s = sample(i as isize + u - 1, j as isize + v - 1);
                gx += dx[u as usize][v as usize] / 16.0 * s;
                gy += dx[v as usize][u as usize] / 16.0 * s;
            }
        }
        (gx * gx + gy * gy).sqrt()
    })
}

/// DFT-layout normalized frequency along one axis (zero frequency at
/// index 0, matching an ifftshifted centered range).
fn freq_axis(n: usize) -> Vec<f64> {
    let denom = if n % 2 == 1 { (n - 1) as f64 } else { n as f64 };
    let half = (n - 1) / 2;
    (0..n)
        .map(|k| {
            if k <= half {
                k as f64 / denom
            } else {
                (k as f64 - n as f64) / denom
            }
        })
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Phase-congruency map from a 4-scale, 4-orientation log-Gabor bank with
/// Rayleigh noise compensation.
#[allow(clippy::needless_range_loop)]
fn phase_congruency(img: &Image) -> Image {
    let (rows, cols) = (img.height(), img.width());
    let n = rows * cols;
    let theta_sigma = PI / NORIENT as f64 / D_THETA_ON_SIGMA;

    let image_fft = fft2(img).expect("validated dimensions");

    let fy = freq_axis(rows);
    let fx = freq_axis(cols);

    // Radius (with the zero-frequency fudge), polar angle, and the radial
    // low-pass that rolls the filters off before the Nyquist corners.
    let mut radius = vec![0.0; n];
    let mut sin_theta = vec![0.0; n];
    let mut cos_theta = vec![0.0; n];
    let mut lowpass = vec![0.0; n];
    for i in 0..rows {
        for j in 0..cols {
            let idx = i * cols + j;
            let r = (fx[j] * fx[j] + fy[i] * fy[i]).sqrt();
            lowpass[idx] = 1.0 / (1.0 + (r / 0.45).powi(30));
            let r = if idx == 0 { 1.0 } else { r };
            radius[idx] = r;
            let angle = (-fy[i]).atan2(fx[j]);
            sin_theta[idx] = angle.sin();
            cos_theta[idx] = angle.cos();
        }
    }

    let log_gabor: Vec<Vec<f64>> = (0..NSCALE)
        .map(|s| {
            let wavelength = MIN_WAVELENGTH * MULT.powi(s as i32);
            let fo = 1.0 / wavelength;
            let denom = 2.0 * SIGMA_ONF.ln().powi(2);
            let mut filt: Vec<f64> = radius
                .iter()
                .zip(lowpass.iter())
                .map(|(&r, &lp)| (-(r / fo).ln().powi(2) / denom).exp() * lp)
                .collect();
            filt[0] = 0.0;
            filt
        })
        .collect();

    let mut energy_all = vec![0.0; n];
    let mut an_all = vec![0.0; n];

    for o in 0..NORIENT {
        let angle = o as f64 * PI / NORIENT as f64;
        let spread: Vec<f64> = (0..n)
            .map(|idx| {
                let ds = sin_theta[idx] * angle.cos() - cos_theta[idx] * angle.sin();
                let dc = cos_theta[idx] * angle.cos() + sin_theta[idx] * angle.sin();
                let dtheta = ds.atan2(dc).abs();
                (-dtheta * dtheta / (2.0 * theta_sigma * theta_sigma)).exp()
            })
            .collect();

        let mut sum_even = vec![0.0; n];
        let mut sum_odd = vec![0.0; n];
        let mut sum_an = vec![0.0; n];
        let mut eo: Vec<Vec<Complex64>> = Vec::with_capacity(NSCALE);
        let mut ifft_filters: Vec<Vec<f64>> = Vec::with_capacity(NSCALE);
        let mut em_n = 0.0;

        for s in 0..NSCALE {
            let filter: Vec<f64> = log_gabor[s]
                .iter()
                .zip(spread.iter())
                .map(|(&g, &sp)| g * sp)
                .collect();
            if s == 0 {
                em_n = filter.iter().map(|f| f * f).sum();
            }
            let filter_grid = ComplexGrid::new(
                rows,
                cols,
                filter.iter().map(|&f| Complex64::new(f, 0.0)).collect(),
            )
            .expect("shape");
            // Spatial filter, rescaled to match power.
            let ifft_filt: Vec<f64> = ifft2_complex(&filter_grid)
                .data()
                .iter()
                .map(|c| c.re * (n as f64).sqrt())
                .collect();
            ifft_filters.push(ifft_filt);

            let response = ifft2_complex(&ComplexGrid::new(
                rows,
                cols,
                image_fft
                    .data()
                    .iter()
                    .zip(filter.iter())
                    .map(|(&c, &f)| c * f)
                    .collect(),
            )
            .expect("shape"));
            let resp = response.data().to_vec();
            for idx in 0..n {
                let amplitude = resp[idx].norm();
                sum_an[idx] += amplitude;
                sum_even[idx] += resp[idx].re;
                sum_odd[idx] += resp[idx].im;
            }
            eo.push(resp);
        }

        let mut energy = vec![0.0; n];
        for idx in 0..n {
            let x_energy = (sum_even[idx] * sum_even[idx] + sum_odd[idx] * sum_odd[idx]).sqrt()
                + EPSILON;
            let mean_e = sum_even[idx] / x_energy;
            let mean_o = sum_odd[idx] / x_energy;
            for resp in &eo {
                let (e, od) = (resp[idx].re, resp[idx].im);
                energy[idx] += e * mean_e + od * mean_o - (e * mean_o - od * mean_e).abs();
            }
        }

        // Rayleigh noise threshold estimated from the smallest scale.
        let mut e2: Vec<f64> = eo[0].iter().map(|c| c.norm_sqr()).collect();
        let median_e2n = median(&mut e2);
        let mean_e2n = -median_e2n / 0.5_f64.ln();
        let noise_power = mean_e2n / em_n;

        let mut sum_est_an2 = 0.0;
        for filt in &ifft_filters {
            sum_est_an2 += filt.iter().map(|f| f * f).sum::<f64>();
        }
        let mut sum_est_aiaj = 0.0;
        for si in 0..NSCALE {
            for sj in si + 1..NSCALE {
                sum_est_aiaj += ifft_filters[si]
                    .iter()
                    .zip(ifft_filters[sj].iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
        }
        let est_noise_energy2 = 2.0 * noise_power * sum_est_an2 + 4.0 * noise_power * sum_est_aiaj;
        let tau = (est_noise_energy2 / 2.0).sqrt();
        let est_noise_energy = tau * (PI / 2.0).sqrt();
        let est_noise_sigma = ((2.0 - PI / 2.0) * tau * tau).sqrt();
        // Empirical 1.7 rescaling of the estimated noise effect.
        let threshold = (est_noise_energy + NOISE_K * est_noise_sigma) / 1.7;

        for idx in 0..n {
            energy_all[idx] += (energy[idx] - threshold).max(0.0);
            an_all[idx] += sum_an[idx];
        }
    }

    Image::from_fn(rows, cols, |i, j| {
        let idx = i * cols + j;
        energy_all[idx] / (an_all[idx] + 1e-12)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrade::{psf_gaussian, synthetic_scene};
    use crate::fft::conv_circular;

    #[test]
    fn identity_is_one() {
        let img = synthetic_scene(64, 64);
        let value = fsim(&img, &img).unwrap();
        assert!((value - 1.0).abs() <= 1e-12, "fsim {value}");
    }

    #[test]
    fn symmetric_in_arguments() {
        let clean = synthetic_scene(64, 64);
        let k = psf_gaussian(5, 5, 1.0).unwrap();
        let blurred = conv_circular(&clean, &k).unwrap();
        let ab = fsim(&clean, &blurred).unwrap();
        let ba = fsim(&blurred, &clean).unwrap();
        assert!((ab - ba).abs() <= 1e-12);
    }

    #[test]
    fn monotone_in_blur_strength() {
        let clean = synthetic_scene(256, 256);
        let mut scores = Vec::new();
        for (size, sigma) in [(7, 1.0), (13, 2.5), (21, 5.0)] {
            let k = psf_gaussian(size, size, sigma).unwrap();
            let blurred = conv_circular(&clean, &k).unwrap();
            scores.push(fsim(&blurred, &clean).unwrap());
        }
        assert!(
            scores[0] > scores[1] && scores[1] > scores[2],
            "not monotone: {scores:?}"
        );
        assert!(scores[0] < 1.0);
    }

    #[test]
    fn rejects_small_images() {
        let img = synthetic_scene(16, 64);
        assert!(fsim(&img, &img).is_err());
    }

    #[test]
    fn values_stay_in_unit_interval() {
        let clean = synthetic_scene(96, 96);
        let k = psf_gaussian(9, 9, 2.0).unwrap();
        let blurred = conv_circular(&clean, &k).unwrap();
        let value = fsim(&blurred, &clean).unwrap();
        assert!((0.0..=1.0).contains(&value), "fsim {value}");
    }

    #[test]
    fn downsample_halves_large_images() {
        let img = synthetic_scene(512, 512);
        let small = downsample(&img);
        assert_eq!((small.height(), small.width()), (256, 256));
    }
}
