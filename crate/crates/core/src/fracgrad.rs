//! Grunwald-Letnikov discrete fractional-order gradient with a truncated
//! coefficient window, its adjoint, and its spectral symbol.
//!
//! The gradient pairs a "horizontal" derivative along axis 0 (row index)
//! with a "vertical" derivative along axis 1 (column index); indices wrap
//! periodically so both operators stay circulant and diagonalize under fft2.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{ComplexGrid, Image, SpectralOperator};

/// Truncated Grunwald-Letnikov coefficients
/// `phi[i] = (-1)^i Gamma(alpha+1) / (Gamma(i+1) Gamma(alpha+1-i))`
/// computed by the overflow-safe recurrence
/// `phi[i] = phi[i-1] * (i-1-alpha) / i`, `phi[0] = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracCoeffs {
    alpha: f64,
    q: usize,
    phi: Vec<f64>,
}

impl FracCoeffs {
    pub fn new(alpha: f64, q: usize) -> Result<Self> {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::Domain(format!(
                "fractional order must be positive, got {alpha}"
            )));
        }
        if q < 1 {
            return Err(Error::Domain("coefficient window must be >= 1".into()));
        }
        let mut phi = Vec::with_capacity(q);
        phi.push(1.0);
        for i in 1..q {
            let prev = phi[i - 1];
            phi.push(prev * ((i as f64 - 1.0 - alpha) / i as f64));
        }
        Ok(Self { alpha, q, phi })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    fn check_fits(&self, height: usize, width: usize) -> Result<()> {
        if self.q > height || self.q > width {
            return Err(Error::InvalidDimension(format!(
                "coefficient window {} exceeds image dimension {}x{}",
                self.q, height, width
            )));
        }
        Ok(())
    }
}

/// The two components of the fractional gradient, same shape as the source.
#[derive(Debug, Clone, PartialEq)]
pub struct FracGradField {
    pub horizontal: Image,
    pub vertical: Image,
}

impl FracGradField {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            horizontal: Image::zeros(height, width),
            vertical: Image::zeros(height, width),
        }
    }

    pub fn zip_map(&self, other: &FracGradField, f: impl Fn(f64, f64) -> f64 + Copy) -> Self {
        Self {
            horizontal: self.horizontal.zip_map(&other.horizontal, f),
            vertical: self.vertical.zip_map(&other.vertical, f),
        }
    }

    pub fn dot(&self, other: &FracGradField) -> f64 {
        self.horizontal.dot(&other.horizontal) + self.vertical.dot(&other.vertical)
    }

    pub fn is_finite(&self) -> bool {
        self.horizontal.is_finite() && self.vertical.is_finite()
    }
}

/// Fractional gradient by the defining truncated sums with periodic wrap:
/// horizontal `(i,j) -> sum_l phi[l] x[i-l, j]`, vertical over `j-l`.
pub fn frac_gradient(img: &Image, coeffs: &FracCoeffs) -> Result<FracGradField> {
    coeffs.check_fits(img.height(), img.width())?;
    let (h, w) = (img.height(), img.width());
    let phi = coeffs.phi();
    let mut horizontal = Image::zeros(h, w);
    let mut vertical = Image::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let mut acc_h = 0.0;
            let mut acc_v = 0.0;
            for (l, &p) in phi.iter().enumerate() {
                let si = if i >= l { i - l } else { i + h - l };
                let sj = if j >= l { j - l } else { j + w - l };
                acc_h += p * img.get(si, j);
                acc_v += p * img.get(i, sj);
            }
            horizontal.set(i, j, acc_h);
            vertical.set(i, j, acc_v);
        }
    }
    Ok(FracGradField { horizontal, vertical })
}

/// Adjoint of [`frac_gradient`]: correlation with the coefficients
/// (index `+l` with wrap) applied to each component, summed.
pub fn frac_adjoint(field: &FracGradField, coeffs: &FracCoeffs) -> Result<Image> {
    field
        .horizontal
        .check_same_shape(&field.vertical, "gradient components")?;
    coeffs.check_fits(field.horizontal.height(), field.horizontal.width())?;
    let (h, w) = (field.horizontal.height(), field.horizontal.width());
    let phi = coeffs.phi();
    let mut out = Image::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (l, &p) in phi.iter().enumerate() {
                let si = if i + l < h { i + l } else { i + l - h };
                let sj = if j + l < w { j + l } else { j + l - w };
                acc += p * field.horizontal.get(si, j);
                acc += p * field.vertical.get(i, sj);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Frequency responses of the two derivative operators on an `h x w` grid.
///
/// Each response is the DFT of the coefficient sequence embedded as a
/// circulant stencil along its axis, constant along the other axis. The sum
/// `|sym_h|^2 + |sym_v|^2` is the real nonnegative grid the solver uses in
/// its frequency-domain denominator.
pub fn frac_spectral_symbol(
    coeffs: &FracCoeffs,
    height: usize,
    width: usize,
) -> Result<(SpectralOperator, SpectralOperator)> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidDimension("zero-sized grid".into()));
    }
    coeffs.check_fits(height, width)?;
    let sym_h = axis_symbol(coeffs.phi(), height);
    let sym_v = axis_symbol(coeffs.phi(), width);
    let resp_h = ComplexGrid::from_fn(height, width, |i, _| sym_h[i]);
    let resp_v = ComplexGrid::from_fn(height, width, |_, j| sym_v[j]);
    Ok((
        SpectralOperator::from_response(resp_h),
        SpectralOperator::from_response(resp_v),
    ))
}

/// 1D DFT of the zero-padded coefficient stencil along one axis.
fn axis_symbol(phi: &[f64], n: usize) -> Vec<Complex64> {
    let mut padded = Image::zeros(1, n);
    for (l, &p) in phi.iter().enumerate() {
        padded.set(0, l, p);
    }
    fft::fft2(&padded)
        .expect("nonzero length")
        .data()
        .to_vec()
}
