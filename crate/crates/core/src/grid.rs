//! Dense 2D grids: real images, complex spectra, PSF kernels, and the
//! frequency-domain representation of circular-convolution operators.
//!
//! All grids are row-major with `height` rows and `width` columns. An entry
//! at row `i`, column `j` lives at index `i * width + j`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense 2D grid of real intensities.
///
/// Clean references and final restored outputs keep samples in `[0, 1]`;
/// solver intermediates and unclipped degraded observations may exceed
/// that range.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimension(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(Error::InvalidDimension(format!(
                "data length {} does not match {height}x{width}",
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "zero-sized image");
        Self { height, width, data: vec![0.0; height * width] }
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "zero-sized image");
        Self { height, width, data: vec![value; height * width] }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "zero-sized image");
        let mut data = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                data.push(f(i, j));
            }
        }
        Self { height, width, data }
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
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.width + j] = v;
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width
    }

    pub fn check_same_shape(&self, other: &Image, what: &str) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::InvalidDimension(format!(
                "{what}: {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination; panics on shape mismatch (internal use).
    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Image {
        assert!(self.same_shape(other), "shape mismatch in zip_map");
        Image {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Samples clamped to [0, 1].
    pub fn clamped01(&self) -> Image {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    pub fn norm_l2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Image) -> f64 {
        assert!(self.same_shape(other), "shape mismatch in dot");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        assert!(self.same_shape(other), "shape mismatch in max_abs_diff");
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for Image {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.width + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Image {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.width + j]
    }
}

/// Dense 2D grid of complex frequency-domain samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn new(height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimension(format!(
                "grid dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(Error::InvalidDimension(format!(
                "data length {} does not match {height}x{width}",
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "zero-sized grid");
        Self { height, width, data: vec![Complex64::new(0.0, 0.0); height * width] }
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        assert!(height > 0 && width > 0, "zero-sized grid");
        let mut data = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                data.push(f(i, j));
            }
        }
        Self { height, width, data }
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
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.width + j] = v;
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &ComplexGrid) -> bool {
        self.height == other.height && self.width == other.width
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexGrid {
        ComplexGrid {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(
        &self,
        other: &ComplexGrid,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> ComplexGrid {
        assert!(self.same_shape(other), "shape mismatch in zip_map");
        ComplexGrid {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// Small dense 2D kernel of blur weights.
///
/// Generated (unperturbed) PSFs are nonnegative and sum to 1; perturbed
/// kernels `k0 = k - e` carry no sign or sum guarantee.
#[derive(Debug, Clone, PartialEq)]
pub struct PsfKernel {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

impl PsfKernel {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "kernel dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if weights.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "weight length {} does not match {rows}x{cols}",
                weights.len()
            )));
        }
        Ok(Self { rows, cols, weights })
    }

    /// The 1x1 identity kernel.
    pub fn identity() -> Self {
        Self { rows: 1, cols: 1, weights: vec![1.0] }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.weights[u * self.cols + v]
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Elementwise difference, used for `k0 = k - e`.
    pub fn sub(&self, other: &PsfKernel) -> Result<PsfKernel> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidDimension(format!(
                "kernel shapes differ: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(PsfKernel {
            rows: self.rows,
            cols: self.cols,
            weights: self
                .weights
                .iter()
                .zip(other.weights.iter())
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// A circular-convolution operator stored as its frequency response under
/// the 2D DFT basis: applying the operator is `ifft2(response .* fft2(x))`
/// and the adjoint conjugates the response elementwise.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    response: ComplexGrid,
}

impl SpectralOperator {
    pub fn from_response(response: ComplexGrid) -> Self {
        Self { response }
    }

    /// Operator with response 1 everywhere (identity).
    pub fn identity(height: usize, width: usize) -> Self {
        Self {
            response: ComplexGrid::from_fn(height, width, |_, _| Complex64::new(1.0, 0.0)),
        }
    }

    /// Operator with response 0 everywhere.
    pub fn zero(height: usize, width: usize) -> Self {
        Self { response: ComplexGrid::zeros(height, width) }
    }

    #[inline]
    pub fn response(&self) -> &ComplexGrid {
        &self.response
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.response.height()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.response.width()
    }

    /// Sum of two operators on the same grid (e.g. `K0 + E`).
    pub fn add(&self, other: &SpectralOperator) -> Result<SpectralOperator> {
        if !self.response.same_shape(&other.response) {
            return Err(Error::InvalidDimension(
                "spectral operators live on different grids".into(),
            ));
        }
        Ok(SpectralOperator {
            response: self.response.zip_map(&other.response, |a, b| a + b),
        })
    }

    /// Squared magnitude of the response as a real grid.
    pub fn abs_sq(&self) -> Image {
        Image {
            height: self.response.height(),
            width: self.response.width(),
            data: self.response.data().iter().map(|c| c.norm_sqr()).collect(),
        }
    }

    /// Apply the operator to an image: `ifft2(response .* fft2(x))`.
    pub fn apply(&self, img: &Image) -> Result<Image> {
        let spec = crate::fft::fft2(img)?;
        if !spec.same_shape(&self.response) {
            return Err(Error::InvalidDimension(
                "image does not match operator grid".into(),
            ));
        }
        crate::fft::ifft2(&spec.zip_map(&self.response, |a, b| a * b))
    }

    /// Apply the adjoint: elementwise conjugated response.
    pub fn apply_adjoint(&self, img: &Image) -> Result<Image> {
        let spec = crate::fft::fft2(img)?;
        if !spec.same_shape(&self.response) {
            return Err(Error::InvalidDimension(
                "image does not match operator grid".into(),
            ));
        }
        crate::fft::ifft2(&spec.zip_map(&self.response, |a, b| a * b.conj()))
    }

    pub fn is_finite(&self) -> bool {
        self.response
            .data()
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}
