//! Semi-blind restoration solver: joint minimization over the image and a
//! circulant kernel-error operator.
//!
//! The objective couples a data term `1/2 ||(K0+E)x - y||^2`, framelet and
//! fractional-TV sparsity terms, a kernel-error energy penalty and a box
//! constraint on the image. The image sub-problem is solved by ADMM with
//! three splits (framelet coefficients, fractional gradient, box projection),
//! each x-step being one exact frequency-domain division; the kernel-error
//! sub-problem has a closed-form frequency-domain solution. The two
//! sub-problems alternate until the relative change of the image iterate
//! falls below `tol`.

use crate::error::{Error, Result};
use crate::fft::{fft2, ifft2};
use crate::framelet::{framelet_analyze, framelet_synthesize, FrameletCoeffs};
use crate::fracgrad::{
    frac_adjoint, frac_gradient, frac_spectral_symbol, FracCoeffs, FracGradField,
};
use crate::fsim::fsim;
use crate::grid::{ComplexGrid, Image, PsfKernel, SpectralOperator};
use crate::metrics::{psnr, relative_change, ssim};

/// Parameter grids documented for experiment sweeps.
pub const GRID_LAMBDA: [f64; 6] = [1e-6, 1e-5, 1e-4, 1e-3, 1e3, 1e5];
pub const GRID_BETA_PROX: [f64; 3] = [0.1, 1.0, 10.0];
pub const GRID_BETA_PENALTY: [f64; 7] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];
pub const GRID_ALPHA: [f64; 6] = [0.25, 0.5, 0.75, 1.0, 1.5, 1.75];

/// Solver parameters. The defaults are the repository's tuned configuration
/// for the shipped experiments, chosen by sweeping the documented grids.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Framelet sparsity weight.
    pub lambda1: f64,
    /// Fractional-TV weight.
    pub lambda2: f64,
    /// Kernel-error energy weight.
    pub lambda3: f64,
    /// Proximal damping on the image between outer iterations.
    pub beta1: f64,
    /// Proximal damping on the kernel-error operator.
    pub beta2: f64,
    /// ADMM penalty.
    pub beta3: f64,
    /// Fractional derivative order.
    pub alpha: f64,
    /// Grunwald-Letnikov window length.
    pub q: usize,
    /// Outer stopping tolerance on the relative change of the image.
    pub tol: f64,
    /// Outer iteration cap.
    pub max_outer: usize,
    /// Inner ADMM iteration cap.
    pub inner_iters: usize,
    /// Inner stopping tolerance on the relative change of the image.
    pub inner_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda1: 1e-4,
            lambda2: 1e-4,
            lambda3: 1e3,
            beta1: 0.1,
            beta2: 1.0,
            beta3: 1e-2,
            alpha: 0.75,
            q: 15,
            tol: 1e-3,
            max_outer: 100,
            inner_iters: 10,
            inner_tol: 1e-4,
        }
    }
}

impl SolverConfig {
    /// Hard validation plus advisory warnings for values outside the
    /// documented sweep ranges. Warnings are recorded in the run metadata,
    /// never raised as errors.
    pub fn validate(&self) -> Result<Vec<String>> {
        let positives = [
            (self.lambda1, "lambda1"),
            (self.lambda2, "lambda2"),
            (self.lambda3, "lambda3"),
            (self.beta1, "beta1"),
            (self.beta2, "beta2"),
            (self.beta3, "beta3"),
            (self.alpha, "alpha"),
            (self.tol, "tol"),
            (self.inner_tol, "inner_tol"),
        ];
        for (value, name) in positives {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.q < 1 {
            return Err(Error::Domain("q must be >= 1".into()));
        }
        if self.max_outer < 1 || self.inner_iters < 1 {
            return Err(Error::Domain("iteration counts must be >= 1".into()));
        }

        let mut warnings = Vec::new();
        let mut range_check = |value: f64, lo: f64, hi: f64, name: &str| {
            if value < lo || value > hi {
                warnings.push(format!(
                    "{name} = {value:e} outside documented range [{lo:e}, {hi:e}]"
                ));
            }
        };
        range_check(self.lambda1, 1e-6, 1e5, "lambda1");
        range_check(self.lambda2, 1e-6, 1e5, "lambda2");
        range_check(self.lambda3, 1e-6, 1e5, "lambda3");
        range_check(self.beta1, 0.1, 10.0, "beta1");
        range_check(self.beta2, 0.1, 10.0, "beta2");
        range_check(self.beta3, 1e-6, 1.0, "beta3");
        range_check(self.alpha, 0.25, 1.75, "alpha");
        Ok(warnings)
    }
}

/// All iterate storage of one solve.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Current image estimate.
    pub x: Image,
    /// Current kernel-error operator (full-grid spectral response).
    pub e_op: SpectralOperator,
    /// Auxiliary split for the framelet coefficients.
    pub eta1: FrameletCoeffs,
    /// Auxiliary split for the fractional gradient.
    pub eta2: FracGradField,
    /// Auxiliary split for the box constraint; stays in [0, 1].
    pub eta3: Image,
    pub theta1: FrameletCoeffs,
    pub theta2: FracGradField,
    pub theta3: Image,
    pub outer_iter: usize,
    pub history: Vec<HistoryRow>,
}

/// One outer-iteration record: relative change plus quality metrics when a
/// clean reference is available (for convergence-curve exports).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub iter: usize,
    pub error: f64,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub fsim: Option<f64>,
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Relative change dropped below `tol`.
    Tolerance,
    /// The outer iteration cap was reached first.
    MaxOuter,
}

/// Result of a full solve.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Restored image, clamped to [0, 1].
    pub x: Image,
    /// Final kernel-error operator.
    pub e_op: SpectralOperator,
    pub history: Vec<HistoryRow>,
    /// Advisory configuration warnings (out-of-range parameters).
    pub warnings: Vec<String>,
    pub terminated: Termination,
}

/// The four addends of the objective, evaluated diagnostically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub data_term: f64,
    pub framelet_term: f64,
    pub fractv_term: f64,
    pub kernel_term: f64,
}

impl Objective {
    pub fn total(&self) -> f64 {
        self.data_term + self.framelet_term + self.fractv_term + self.kernel_term
    }
}

/// Scalar soft-threshold `sign(v) * max(|v| - t, 0)`.
#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Per-coefficient shrinkage of the framelet split:
/// `eta1 = soft(Wx + theta/beta3, lambda/beta3)`.
pub fn shrink_framelet(
    wx: &FrameletCoeffs,
    theta: &FrameletCoeffs,
    lambda: f64,
    beta3: f64,
) -> FrameletCoeffs {
    let threshold = lambda / beta3;
    wx.zip_map(theta, |w, t| soft_threshold(w + t / beta3, threshold))
}

/// Isotropic shrinkage of the gradient split: the (h, v) pair at each pixel
/// is scaled by `max(||v|| - lambda/beta3, 0) / ||v||`, zero at the origin.
pub fn shrink_gradient(
    gx: &FracGradField,
    theta: &FracGradField,
    lambda: f64,
    beta3: f64,
) -> FracGradField {
    let threshold = lambda / beta3;
    let vh = gx.horizontal.zip_map(&theta.horizontal, |g, t| g + t / beta3);
    let vv = gx.vertical.zip_map(&theta.vertical, |g, t| g + t / beta3);
    let mut out_h = Image::zeros(vh.height(), vh.width());
    let mut out_v = Image::zeros(vv.height(), vv.width());
    for idx in 0..vh.len() {
        let (h, v) = (vh.data()[idx], vv.data()[idx]);
        let mag = (h * h + v * v).sqrt();
        let factor = if mag > threshold { (mag - threshold) / mag } else { 0.0 };
        out_h.data_mut()[idx] = factor * h;
        out_v.data_mut()[idx] = factor * v;
    }
    FracGradField { horizontal: out_h, vertical: out_v }
}

/// Box projection of the third split: `clamp(x + theta3/beta3, 0, 1)`.
pub fn project_unit_interval(x: &Image, theta3: &Image, beta3: f64) -> Image {
    x.zip_map(theta3, |xv, tv| (xv + tv / beta3).clamp(0.0, 1.0))
}

fn ensure_finite(img: &Image, step: &str, outer: usize) -> Result<()> {
    if !img.is_finite() {
        return Err(Error::NonFinite(format!(
            "{step} produced a non-finite iterate at outer iteration {outer}"
        )));
    }
    Ok(())
}

/// Precomputed operators and parameters for one restoration problem.
pub struct Solver {
    config: SolverConfig,
    y: Image,
    k0_op: SpectralOperator,
    fy: ComplexGrid,
    frac: FracCoeffs,
    /// `|sym_h|^2 + |sym_v|^2`, the gradient part of the x-step denominator.
    frac_sym_sq: Image,
    warnings: Vec<String>,
}

impl Solver {
    pub fn new(y: Image, k0: &PsfKernel, config: SolverConfig) -> Result<Self> {
        let warnings = config.validate()?;
        if !y.is_finite() {
            return Err(Error::NonFinite("observed image contains NaN/Inf".into()));
        }
        let (h, w) = (y.height(), y.width());
        let k0_op = crate::fft::psf_to_spectral(k0, h, w)?;
        let frac = FracCoeffs::new(config.alpha, config.q)?;
        let (sym_h, sym_v) = frac_spectral_symbol(&frac, h, w)?;
        let frac_sym_sq = sym_h.abs_sq().zip_map(&sym_v.abs_sq(), |a, b| a + b);
        let fy = fft2(&y)?;
        Ok(Self { config, y, k0_op, fy, frac, frac_sym_sq, warnings })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn k0_op(&self) -> &SpectralOperator {
        &self.k0_op
    }

    pub fn frac_coeffs(&self) -> &FracCoeffs {
        &self.frac
    }

    /// Starting state: `x0 = clamp(y)`, `E0 = 0`, multipliers zero, splits
    /// at their constraint values `eta_i = w_i x0`.
    pub fn initial_state(&self) -> Result<SolverState> {
        let x0 = self.y.clamped01();
        let eta1 = framelet_analyze(&x0);
        let eta2 = frac_gradient(&x0, &self.frac)?;
        let eta3 = x0.clone();
        let (h, w) = (x0.height(), x0.width());
        Ok(SolverState {
            e_op: SpectralOperator::zero(h, w),
            eta1,
            eta2,
            eta3: eta3.clone(),
            theta1: FrameletCoeffs::zeros(h, w),
            theta2: FracGradField::zeros(h, w),
            theta3: Image::zeros(h, w),
            x: x0,
            outer_iter: 0,
            history: Vec::new(),
        })
    }

    /// One exact x-step (the frequency-domain division), using `state.x` as
    /// the proximal anchor.
    pub fn x_update(&self, state: &SolverState) -> Result<Image> {
        self.x_update_anchored(state, &state.x)
    }

    fn x_update_anchored(&self, state: &SolverState, anchor: &Image) -> Result<Image> {
        let cfg = &self.config;
        let b3 = cfg.beta3;

        // Spatial part of the numerator:
        // beta1 x^k + W^T(b3 eta1 - th1) + grad^*(b3 eta2 - th2) + (b3 eta3 - th3).
        let combo1 = state.eta1.zip_map(&state.theta1, |e, t| b3 * e - t);
        let combo2 = state.eta2.zip_map(&state.theta2, |e, t| b3 * e - t);
        let combo3 = state.eta3.zip_map(&state.theta3, |e, t| b3 * e - t);
        let mut spatial = framelet_synthesize(&combo1);
        spatial = spatial.zip_map(&frac_adjoint(&combo2, &self.frac)?, |a, b| a + b);
        spatial = spatial.zip_map(&combo3, |a, b| a + b);
        spatial = spatial.zip_map(anchor, |a, xk| a + cfg.beta1 * xk);

        let spatial_spec = fft2(&spatial)?;
        let h_resp = self.k0_op.response().zip_map(state.e_op.response(), |a, b| a + b);

        // Elementwise frequency-domain division. The 2*beta3 covers the
        // identity split and W^T W = I.
        let base = cfg.beta1 + 2.0 * b3;
        let mut out = ComplexGrid::zeros(spatial_spec.height(), spatial_spec.width());
        for idx in 0..out.data().len() {
            let h = h_resp.data()[idx];
            let denom = h.norm_sqr() + base + b3 * self.frac_sym_sq.data()[idx];
            if denom.is_nan() || denom <= 0.0 {
                return Err(Error::NumericConsistency(format!(
                    "x-step denominator {denom} not positive at bin {idx}"
                )));
            }
            let numerator = h.conj() * self.fy.data()[idx] + spatial_spec.data()[idx];
            out.data_mut()[idx] = numerator / denom;
        }
        ifft2(&out)
    }

    /// Multiplier ascent for all three splits.
    pub fn theta_update(
        &self,
        state: &mut SolverState,
        wx: &FrameletCoeffs,
        gx: &FracGradField,
        x: &Image,
    ) {
        let b3 = self.config.beta3;
        state.theta1 = state
            .theta1
            .zip_map(&wx.zip_map(&state.eta1, |a, b| a - b), |t, r| t + b3 * r);
        state.theta2 = state
            .theta2
            .zip_map(&gx.zip_map(&state.eta2, |a, b| a - b), |t, r| t + b3 * r);
        state.theta3 = state
            .theta3
            .zip_map(&x.zip_map(&state.eta3, |a, b| a - b), |t, r| t + b3 * r);
    }

    /// Inner ADMM loop for the image sub-problem: repeats x-step, shrinkage,
    /// projection and multiplier ascent until the image stalls or the
    /// iteration cap is hit. Leaves `state.x` at the sub-problem solution.
    pub fn inner_solve(&self, state: &mut SolverState) -> Result<Image> {
        let cfg = &self.config;
        let anchor = state.x.clone();
        let mut current = state.x.clone();
        for _ in 0..cfg.inner_iters {
            let x_new = self.x_update_anchored(state, &anchor)?;
            ensure_finite(&x_new, "x-update", state.outer_iter)?;

            let wx = framelet_analyze(&x_new);
            let gx = frac_gradient(&x_new, &self.frac)?;
            state.eta1 = shrink_framelet(&wx, &state.theta1, cfg.lambda1, cfg.beta3);
            state.eta2 = shrink_gradient(&gx, &state.theta2, cfg.lambda2, cfg.beta3);
            state.eta3 = project_unit_interval(&x_new, &state.theta3, cfg.beta3);
            if !state.eta1.is_finite() || !state.eta2.is_finite() || !state.eta3.is_finite() {
                return Err(Error::NonFinite(format!(
                    "shrinkage produced a non-finite split at outer iteration {}",
                    state.outer_iter
                )));
            }
            self.theta_update(state, &wx, &gx, &x_new);
            if !state.theta1.is_finite() || !state.theta2.is_finite() || !state.theta3.is_finite()
            {
                return Err(Error::NonFinite(format!(
                    "multiplier ascent produced a non-finite value at outer iteration {}",
                    state.outer_iter
                )));
            }

            let change = relative_change(&x_new, &current)?;
            current = x_new;
            if change <= cfg.inner_tol {
                break;
            }
        }
        state.x = current.clone();
        Ok(current)
    }

    /// Closed-form kernel-error step, elementwise in frequency:
    /// `E = (conj(Fx) (Fy - K0 Fx) + beta2 E_prev) / (|Fx|^2 + lambda3 + beta2)`.
    pub fn e_update(&self, state: &SolverState, x_new: &Image) -> Result<SpectralOperator> {
        let cfg = &self.config;
        let fx = fft2(x_new)?;
        let mut resp = ComplexGrid::zeros(fx.height(), fx.width());
        for idx in 0..resp.data().len() {
            let xf = fx.data()[idx];
            let residual = self.fy.data()[idx] - self.k0_op.response().data()[idx] * xf;
            let numerator = xf.conj() * residual + cfg.beta2 * state.e_op.response().data()[idx];
            let denom = xf.norm_sqr() + cfg.lambda3 + cfg.beta2;
            resp.data_mut()[idx] = numerator / denom;
        }
        Ok(SpectralOperator::from_response(resp))
    }

    /// Diagnostic evaluation of the four objective addends at `(x, E)`.
    /// The kernel energy is the spatial-kernel 2-norm of the circulant
    /// operator, `sum |E_hat|^2 / (n m)`.
    pub fn objective(&self, x: &Image, e_op: &SpectralOperator) -> Result<Objective> {
        let cfg = &self.config;
        let fx = fft2(x)?;
        let h_resp = self.k0_op.response().zip_map(e_op.response(), |a, b| a + b);
        let blurred = ifft2(&fx.zip_map(&h_resp, |a, b| a * b))?;
        let data_term = 0.5
            * blurred
                .data()
                .iter()
                .zip(self.y.data().iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        let wx = framelet_analyze(x);
        let framelet_term =
            cfg.lambda1 * wx.bands().iter().map(|b| b.data().iter().map(|v| v.abs()).sum::<f64>()).sum::<f64>();
        let gx = frac_gradient(x, &self.frac)?;
        let fractv_term = cfg.lambda2
            * gx.horizontal
                .data()
                .iter()
                .zip(gx.vertical.data().iter())
                .map(|(h, v)| (h * h + v * v).sqrt())
                .sum::<f64>();
        let n = (x.height() * x.width()) as f64;
        let kernel_energy =
            e_op.response().data().iter().map(|c| c.norm_sqr()).sum::<f64>() / n;
        Ok(Objective {
            data_term,
            framelet_term,
            fractv_term,
            kernel_term: 0.5 * cfg.lambda3 * kernel_energy,
        })
    }

    /// Full alternating solve; per-iteration metrics are recorded against
    /// `reference` when one is supplied (and its size admits each metric).
    pub fn solve(&self, reference: Option<&Image>) -> Result<Solution> {
        let cfg = &self.config;
        let mut state = self.initial_state()?;
        let mut terminated = Termination::MaxOuter;
        for outer in 0..cfg.max_outer {
            state.outer_iter = outer;
            let x_prev = state.x.clone();
            self.inner_solve(&mut state)?;
            let e_new = self.e_update(&state, &state.x)?;
            if !e_new.is_finite() {
                return Err(Error::NonFinite(format!(
                    "kernel-error step produced non-finite response at outer iteration {outer}"
                )));
            }
            state.e_op = e_new;

            let error = relative_change(&state.x, &x_prev)?;
            state.outer_iter = outer + 1;
            state.history.push(self.history_row(outer + 1, error, &state.x, reference)?);
            if error <= cfg.tol {
                terminated = Termination::Tolerance;
                break;
            }
        }
        Ok(Solution {
            x: state.x.clamped01(),
            e_op: state.e_op,
            history: state.history,
            warnings: self.warnings.clone(),
            terminated,
        })
    }

    fn history_row(
        &self,
        iter: usize,
        error: f64,
        x: &Image,
        reference: Option<&Image>,
    ) -> Result<HistoryRow> {
        let mut row = HistoryRow { iter, error, psnr: None, ssim: None, fsim: None };
        if let Some(reference) = reference {
            let clamped = x.clamped01();
            row.psnr = Some(psnr(&clamped, reference)?);
            row.ssim = ssim(&clamped, reference).ok();
            row.fsim = fsim(&clamped, reference).ok();
        }
        Ok(row)
    }
}

/// Restore `y` with observed kernel `k0`: build a [`Solver`] and run it.
pub fn solve(
    y: &Image,
    k0: &PsfKernel,
    config: &SolverConfig,
    reference: Option<&Image>,
) -> Result<Solution> {
    Solver::new(y.clone(), k0, config.clone())?.solve(reference)
}
