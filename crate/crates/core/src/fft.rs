//! Forward/inverse 2D discrete Fourier transforms and PSF-to-spectral
//! conversion under periodic boundary conditions.
//!
//! Convention: the forward transform is unnormalized and the inverse divides
//! by `height * width`, so the convolution theorem
//! `fft2(k (*) x) = psf_response .* fft2(x)` holds without extra factors.

use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, Image, PsfKernel, SpectralOperator};

/// Imaginary residue below this is rounding noise and silently discarded.
pub const IMAG_DISCARD: f64 = 1e-10;
/// Imaginary residue above this signals a non-Hermitian spectrum bug upstream.
pub const IMAG_ERROR: f64 = 1e-6;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn transform_2d(data: &mut [Complex64], height: usize, width: usize, forward: bool) {
    let (row_fft, col_fft) = {
        let mut planner = planner().lock().expect("fft planner poisoned");
        if forward {
            (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
        } else {
            (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
        }
    };

    // Rows in place.
    for row in data.chunks_exact_mut(width) {
        row_fft.process(row);
    }

    // Columns via transpose, row pass, transpose back.
    let mut transposed = vec![Complex64::new(0.0, 0.0); data.len()];
    for i in 0..height {
        for j in 0..width {
            transposed[j * height + i] = data[i * width + j];
        }
    }
    for col in transposed.chunks_exact_mut(height) {
        col_fft.process(col);
    }
    for i in 0..height {
        for j in 0..width {
            data[i * width + j] = transposed[j * height + i];
        }
    }
}

/// Unnormalized forward 2D DFT of a real image.
pub fn fft2(img: &Image) -> Result<ComplexGrid> {
    if img.height() == 0 || img.width() == 0 {
        return Err(Error::InvalidDimension("fft2 of zero-sized grid".into()));
    }
    let mut data: Vec<Complex64> = img.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_2d(&mut data, img.height(), img.width(), true);
    ComplexGrid::new(img.height(), img.width(), data)
}

/// Unnormalized forward 2D DFT of complex data.
pub fn fft2_complex(grid: &ComplexGrid) -> ComplexGrid {
    let mut data = grid.data().to_vec();
    transform_2d(&mut data, grid.height(), grid.width(), true);
    ComplexGrid::new(grid.height(), grid.width(), data).expect("shape preserved")
}

/// Normalized inverse 2D DFT returning complex data (no realness check).
pub fn ifft2_complex(grid: &ComplexGrid) -> ComplexGrid {
    let mut data = grid.data().to_vec();
    transform_2d(&mut data, grid.height(), grid.width(), false);
    let norm = 1.0 / (grid.height() * grid.width()) as f64;
    for v in &mut data {
        *v *= norm;
    }
    ComplexGrid::new(grid.height(), grid.width(), data).expect("shape preserved")
}

/// Normalized inverse 2D DFT of a spectrum expected to come from real data.
///
/// Imaginary residue up to [`IMAG_DISCARD`] is dropped; residue above
/// [`IMAG_ERROR`] is a numeric-consistency error so spectral-symmetry bugs
/// surface early instead of silently corrupting iterates.
pub fn ifft2(grid: &ComplexGrid) -> Result<Image> {
    if grid.height() == 0 || grid.width() == 0 {
        return Err(Error::InvalidDimension("ifft2 of zero-sized grid".into()));
    }
    let complex = ifft2_complex(grid);
    let max_imag = complex
        .data()
        .iter()
        .fold(0.0_f64, |m, c| m.max(c.im.abs()));
    if max_imag > IMAG_ERROR {
        return Err(Error::NumericConsistency(format!(
            "ifft2 imaginary residue {max_imag:.3e} exceeds {IMAG_ERROR:.0e}; spectrum is not Hermitian"
        )));
    }
    Image::new(
        grid.height(),
        grid.width(),
        complex.data().iter().map(|c| c.re).collect(),
    )
}

/// Embed a small kernel on an `h x w` grid as a spectral operator.
///
/// The kernel is zero-padded and circularly shifted so its center element
/// (index `floor(r/2), floor(s/2)`) sits at the grid origin; applying the
/// resulting operator equals circular convolution with the kernel.
pub fn psf_to_spectral(kernel: &PsfKernel, height: usize, width: usize) -> Result<SpectralOperator> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidDimension("target grid is zero-sized".into()));
    }
    if kernel.rows() > height || kernel.cols() > width {
        return Err(Error::InvalidDimension(format!(
            "kernel {}x{} larger than image {height}x{width}",
            kernel.rows(),
            kernel.cols()
        )));
    }
    let center_r = kernel.rows() / 2;
    let center_c = kernel.cols() / 2;
    let mut padded = Image::zeros(height, width);
    for u in 0..kernel.rows() {
        for v in 0..kernel.cols() {
            let i = (u + height - center_r) % height;
            let j = (v + width - center_c) % width;
            padded[(i, j)] += kernel.get(u, v);
        }
    }
    Ok(SpectralOperator::from_response(fft2(&padded)?))
}

/// Circular (wrap-around) 2D convolution of an image with a kernel,
/// computed through the spectral operator.
pub fn conv_circular(img: &Image, kernel: &PsfKernel) -> Result<Image> {
    let op = psf_to_spectral(kernel, img.height(), img.width())?;
    op.apply(img)
}
