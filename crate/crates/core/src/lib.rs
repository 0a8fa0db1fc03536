//! Restoration of images degraded by an imprecisely known blur kernel plus
//! additive noise.
//!
//! The model estimates the image and a circulant kernel-error operator
//! jointly: a framelet sparsity term and a fractional-order total-variation
//! term regularize the image, a quadratic energy term regularizes the kernel
//! error, and a box constraint keeps intensities in [0, 1]. The image
//! sub-problem is solved by ADMM with exact frequency-domain x-steps under
//! periodic boundary conditions; the kernel-error sub-problem is closed-form
//! in frequency. See [`solver`] for the alternating scheme.
//!
//! Support modules: [`grid`]/[`fft`] for dense grids and spectral operators,
//! [`framelet`] for the tight-frame transform, [`fracgrad`] for the
//! Grunwald-Letnikov fractional gradient, [`degrade`] for the reproducible
//! degradation pipeline, and [`metrics`]/[`fsim`] for quality scores.

pub mod degrade;
pub mod error;
pub mod fft;
pub mod fracgrad;
pub mod framelet;
pub mod fsim;
pub mod grid;
pub mod metrics;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use fft::{conv_circular, fft2, ifft2, psf_to_spectral};
pub use fracgrad::{frac_adjoint, frac_gradient, frac_spectral_symbol, FracCoeffs, FracGradField};
pub use framelet::{framelet_analyze, framelet_synthesize, FrameletCoeffs, FrameletMasks};
pub use fsim::fsim;
pub use grid::{ComplexGrid, Image, PsfKernel, SpectralOperator};
pub use metrics::{psnr, relative_change, ssim, QualityReport};
pub use solver::{solve, Solution, Solver, SolverConfig, SolverState, Termination};
