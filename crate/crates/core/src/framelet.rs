//! Single-level undecimated 2D tight-framelet transform built from the
//! piecewise-linear B-spline refinement mask and its two framelet masks,
//! with periodic boundary handling.
//!
//! The 2D transform is the tensor product of the three 1D masks, giving
//! 9 subbands per image. Analysis applies the masks as correlations and
//! synthesis as convolutions (flipped masks), so synthesis is the exact
//! adjoint and `synthesize(analyze(x)) == x` by the Parseval property.

use crate::error::{Error, Result};
use crate::grid::Image;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// The three 3-tap masks of the piecewise-linear B-spline Parseval frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameletMasks {
    pub h0: [f64; 3],
    pub h1: [f64; 3],
    pub h2: [f64; 3],
}

impl FrameletMasks {
    /// Refinement mask (1/4)[1,2,1] with framelet masks
    /// (sqrt(2)/4)[1,0,-1] and (1/4)[-1,2,-1].
    pub fn bspline() -> Self {
        Self {
            h0: [0.25, 0.5, 0.25],
            h1: [SQRT2 / 4.0, 0.0, -SQRT2 / 4.0],
            h2: [-0.25, 0.5, -0.25],
        }
    }

    pub fn mask(&self, index: usize) -> [f64; 3] {
        match index {
            0 => self.h0,
            1 => self.h1,
            2 => self.h2,
            _ => panic!("mask index out of range"),
        }
    }
}

/// The 9 subband grids of one analysis pass. Band `(a, b)` applies mask
/// `h_a` along rows (axis 0) and `h_b` along columns (axis 1); band (0,0)
/// is the low-pass band.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameletCoeffs {
    height: usize,
    width: usize,
    bands: Vec<Image>,
}

impl FrameletCoeffs {
    pub fn from_bands(bands: Vec<Image>) -> Result<Self> {
        if bands.len() != 9 {
            return Err(Error::InvalidDimension(format!(
                "expected 9 subbands, got {}",
                bands.len()
            )));
        }
        let (height, width) = (bands[0].height(), bands[0].width());
        for (idx, band) in bands.iter().enumerate() {
            if band.height() != height || band.width() != width {
                return Err(Error::InvalidDimension(format!(
                    "subband {idx} is {}x{}, expected {height}x{width}",
                    band.height(),
                    band.width()
                )));
            }
        }
        Ok(Self { height, width, bands })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bands: (0..9).map(|_| Image::zeros(height, width)).collect(),
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn band(&self, a: usize, b: usize) -> &Image {
        &self.bands[3 * a + b]
    }

    #[inline]
    pub fn band_mut(&mut self, a: usize, b: usize) -> &mut Image {
        &mut self.bands[3 * a + b]
    }

    pub fn bands(&self) -> &[Image] {
        &self.bands
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Copy) -> FrameletCoeffs {
        FrameletCoeffs {
            height: self.height,
            width: self.width,
            bands: self.bands.iter().map(|b| b.map(f)).collect(),
        }
    }

    /// Elementwise combination across matching bands.
    pub fn zip_map(
        &self,
        other: &FrameletCoeffs,
        f: impl Fn(f64, f64) -> f64 + Copy,
    ) -> FrameletCoeffs {
        assert!(
            self.height == other.height && self.width == other.width,
            "coefficient shapes differ"
        );
        FrameletCoeffs {
            height: self.height,
            width: self.width,
            bands: self
                .bands
                .iter()
                .zip(other.bands.iter())
                .map(|(a, b)| a.zip_map(b, f))
                .collect(),
        }
    }

    pub fn dot(&self, other: &FrameletCoeffs) -> f64 {
        self.bands
            .iter()
            .zip(other.bands.iter())
            .map(|(a, b)| a.dot(b))
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.bands.iter().map(|b| b.dot(b)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.bands.iter().all(|b| b.is_finite())
    }
}

/// Correlation with a centered 3-tap mask along axis 0 (rows), periodic wrap.
fn corr_axis0(img: &Image, mask: [f64; 3]) -> Image {
    let (h, w) = (img.height(), img.width());
    let mut out = Image::zeros(h, w);
    for i in 0..h {
        let up = if i == 0 { h - 1 } else { i - 1 };
        let down = if i + 1 == h { 0 } else { i + 1 };
        for j in 0..w {
            let v = mask[0] * img.get(up, j) + mask[1] * img.get(i, j) + mask[2] * img.get(down, j);
            out.set(i, j, v);
        }
    }
    out
}

/// Correlation with a centered 3-tap mask along axis 1 (columns), periodic wrap.
fn corr_axis1(img: &Image, mask: [f64; 3]) -> Image {
    let (h, w) = (img.height(), img.width());
    let mut out = Image::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let left = if j == 0 { w - 1 } else { j - 1 };
            let right = if j + 1 == w { 0 } else { j + 1 };
            let v =
                mask[0] * img.get(i, left) + mask[1] * img.get(i, j) + mask[2] * img.get(i, right);
            out.set(i, j, v);
        }
    }
    out
}

fn flipped(mask: [f64; 3]) -> [f64; 3] {
    [mask[2], mask[1], mask[0]]
}

/// Undecimated single-level framelet analysis: `Wx`.
pub fn framelet_analyze(img: &Image) -> FrameletCoeffs {
    let masks = FrameletMasks::bspline();
    let mut bands = Vec::with_capacity(9);
    for a in 0..3 {
        let rows_done = corr_axis0(img, masks.mask(a));
        for b in 0..3 {
            bands.push(corr_axis1(&rows_done, masks.mask(b)));
        }
    }
    FrameletCoeffs {
        height: img.height(),
        width: img.width(),
        bands,
    }
}

/// Adjoint of [`framelet_analyze`]: convolution with the same masks summed
/// over bands. Because the frame is Parseval, this inverts the analysis.
pub fn framelet_synthesize(coeffs: &FrameletCoeffs) -> Image {
    let masks = FrameletMasks::bspline();
    let mut out = Image::zeros(coeffs.height(), coeffs.width());
    for a in 0..3 {
        let mut acc = Image::zeros(coeffs.height(), coeffs.width());
        for b in 0..3 {
            let cols_done = corr_axis1(coeffs.band(a, b), flipped(masks.mask(b)));
            acc = acc.zip_map(&cols_done, |x, y| x + y);
        }
        let rows_done = corr_axis0(&acc, flipped(masks.mask(a)));
        out = out.zip_map(&rows_done, |x, y| x + y);
    }
    out
}
