//! The degrade -> deblur -> evaluate pipeline and the sweep runner.
//!
//! `degrade` writes the observation artifacts into the output directory;
//! `deblur` consumes them and emits the restored image plus convergence
//! curves; `sweep` fans out independent degrade+solve runs over a parameter
//! grid and joins them into a PSNR-sorted leaderboard; `metrics` scores an
//! arbitrary image pair. All CSV output is byte-deterministic for a fixed
//! manifest and seed.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use deframe_core::degrade::degrade;
use deframe_core::metrics::PSNR_CAP_DB;
use deframe_core::{
    fsim, psnr, ssim, solve, Image, PsfKernel, Solution, SolverConfig, Termination,
};

use crate::errors::{CliError, CliResult};
use crate::imageio::{atomic_write_text, load_f64, load_image, save_f64, save_png16};
use crate::manifest::Manifest;

pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn out_dir(manifest: &Manifest, overrides: &Overrides) -> PathBuf {
    overrides
        .out
        .clone()
        .unwrap_or_else(|| manifest.outputs.dir.clone())
}

fn fmt_opt(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.6}", v.min(PSNR_CAP_DB)),
        None => String::new(),
    }
}

/// Metrics that apply at the pair's size: PSNR always, SSIM from 11 px,
/// FSIM from 32 px.
fn quality_row(img: &Image, reference: &Image) -> CliResult<(f64, Option<f64>, Option<f64>)> {
    let p = psnr(img, reference)?;
    let s = ssim(img, reference).ok();
    let f = fsim(img, reference).ok();
    Ok((p, s, f))
}

pub fn run_degrade(manifest: &Manifest, overrides: &Overrides) -> CliResult<()> {
    let dir = out_dir(manifest, overrides);
    let clean = load_image(&manifest.input.image, manifest.input.resize)?;
    let spec = manifest.degradation()?.to_spec(overrides.seed);
    let result = degrade(&clean, &spec)?;

    save_png16(&result.observed, &dir.join("y.png"))?;
    save_f64(&result.observed, &dir.join("y.f64"))?;
    save_kernel(&result.k0, &dir.join("k0.f64"))?;
    if manifest.outputs.truth_dump {
        let truth_dir = dir.join("truth");
        save_kernel(&result.truth.kernel, &truth_dir.join("kernel.f64"))?;
        save_kernel(&result.truth.kernel_error, &truth_dir.join("kernel_error.f64"))?;
        if let Some(noise) = &result.truth.noise {
            save_f64(noise, &truth_dir.join("noise.f64"))?;
        }
    }
    eprintln!(
        "degraded {} ({}x{}) -> {}",
        manifest.input.image,
        clean.height(),
        clean.width(),
        dir.display()
    );
    Ok(())
}

fn save_kernel(kernel: &PsfKernel, path: &Path) -> CliResult<()> {
    let as_image = Image::new(kernel.rows(), kernel.cols(), kernel.weights().to_vec())?;
    save_f64(&as_image, path)
}

fn load_kernel(path: &Path) -> CliResult<PsfKernel> {
    let as_image = load_f64(path)?;
    PsfKernel::new(as_image.height(), as_image.width(), as_image.data().to_vec())
        .map_err(CliError::from)
}

fn load_reference(manifest: &Manifest) -> CliResult<Image> {
    let source = manifest
        .input
        .reference
        .as_deref()
        .unwrap_or(&manifest.input.image);
    load_image(source, manifest.input.resize)
}

pub fn run_deblur(manifest: &Manifest, overrides: &Overrides) -> CliResult<()> {
    let dir = out_dir(manifest, overrides);
    let observed = load_f64(&dir.join("y.f64"))?;
    let k0 = load_kernel(&dir.join("k0.f64"))?;
    let reference = load_reference(manifest)?;
    let config = manifest.solver_config();

    let started = Instant::now();
    let solution = solve(&observed, &k0, &config, Some(&reference))?;
    let wall = started.elapsed();

    for warning in &solution.warnings {
        eprintln!("warning: {warning}");
    }
    if manifest.outputs.restored_png {
        save_png16(&solution.x, &dir.join("x.png"))?;
    }
    save_f64(&solution.x, &dir.join("x.f64"))?;
    if manifest.outputs.curves_csv {
        atomic_write_text(&dir.join("curves.csv"), &curves_csv(&solution))?;
    }
    if manifest.outputs.report_csv {
        let degraded_row = quality_row(&observed.clamped01(), &reference)?;
        let restored_row = quality_row(&solution.x, &reference)?;
        let final_error = solution.history.last().map(|r| r.error).unwrap_or(0.0);
        let mut report = String::from("label,psnr,ssim,fsim,iterations,final_error\n");
        report.push_str(&format!(
            "degraded,{},{},{},,\n",
            fmt_opt(Some(degraded_row.0)),
            fmt_opt(degraded_row.1),
            fmt_opt(degraded_row.2),
        ));
        report.push_str(&format!(
            "restored,{},{},{},{},{:.6}\n",
            fmt_opt(Some(restored_row.0)),
            fmt_opt(restored_row.1),
            fmt_opt(restored_row.2),
            solution.history.len(),
            final_error,
        ));
        atomic_write_text(&dir.join("report.csv"), &report)?;
    }
    eprintln!(
        "restored in {} outer iterations ({}) in {wall:.1?}",
        solution.history.len(),
        match solution.terminated {
            Termination::Tolerance => "converged",
            Termination::MaxOuter => "iteration cap",
        }
    );
    Ok(())
}

fn curves_csv(solution: &Solution) -> String {
    let mut text = String::from("iter,error,psnr,ssim,fsim\n");
    for row in &solution.history {
        text.push_str(&format!(
            "{},{:.6},{},{},{}\n",
            row.iter,
            row.error,
            fmt_opt(row.psnr),
            fmt_opt(row.ssim),
            fmt_opt(row.fsim),
        ));
    }
    text
}

/// FNV-1a of the run's identity, for collision-free run directories.
fn run_hash(config: &SolverConfig, seed: u64) -> String {
    let text = format!("{config:?}|{seed}");
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in text.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

struct SweepRun {
    index: usize,
    config: SolverConfig,
    seed: u64,
    psnr: f64,
    ssim: Option<f64>,
    fsim: Option<f64>,
    iterations: usize,
    final_error: f64,
    terminated: Termination,
    dir_name: String,
}

pub fn run_sweep(manifest: &Manifest, overrides: &Overrides) -> CliResult<()> {
    let dir = out_dir(manifest, overrides);
    let sweep = manifest
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("manifest has no [sweep] section".into()))?;
    let base = manifest.solver_config();
    let configs = sweep.enumerate(&base)?;
    let clean = load_image(&manifest.input.image, manifest.input.resize)?;
    let degradation = manifest.degradation()?;
    let base_seed = overrides.seed.unwrap_or(degradation.seed);

    let started = Instant::now();
    // Each run owns an independent seeded degradation: seed = base + index.
    let results: CliResult<Vec<SweepRun>> = configs
        .into_par_iter()
        .enumerate()
        .map(|(index, config)| {
            let seed = base_seed + index as u64;
            let spec = degradation.to_spec(Some(seed));
            let degraded = degrade(&clean, &spec)?;
            let solution = solve(&degraded.observed, &degraded.k0, &config, None)?;
            let (p, s, f) = quality_row(&solution.x, &clean)?;
            let dir_name = run_hash(&config, seed);
            if manifest.outputs.restored_png {
                save_png16(&solution.x, &dir.join("runs").join(&dir_name).join("x.png"))?;
            }
            Ok(SweepRun {
                index,
                config,
                seed,
                psnr: p,
                ssim: s,
                fsim: f,
                iterations: solution.history.len(),
                final_error: solution.history.last().map(|r| r.error).unwrap_or(0.0),
                terminated: solution.terminated,
                dir_name,
            })
        })
        .collect();
    let mut results = results?;
    let wall = started.elapsed();

    // PSNR descending, manifest order as the deterministic tie-break.
    results.sort_by(|a, b| {
        b.psnr
            .partial_cmp(&a.psnr)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.index.cmp(&b.index))
    });

    let mut text = String::from(
        "rank,psnr,ssim,fsim,lambda1,lambda2,lambda3,beta1,beta2,beta3,alpha,q,iterations,final_error,terminated,seed,run_dir\n",
    );
    for (rank, run) in results.iter().enumerate() {
        let c = &run.config;
        text.push_str(&format!(
            "{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{:.6},{},{},{}\n",
            rank + 1,
            fmt_opt(Some(run.psnr)),
            fmt_opt(run.ssim),
            fmt_opt(run.fsim),
            c.lambda1,
            c.lambda2,
            c.lambda3,
            c.beta1,
            c.beta2,
            c.beta3,
            c.alpha,
            c.q,
            run.iterations,
            run.final_error,
            match run.terminated {
                Termination::Tolerance => "tolerance",
                Termination::MaxOuter => "max_outer",
            },
            run.seed,
            run.dir_name,
        ));
    }
    atomic_write_text(&dir.join("leaderboard.csv"), &text)?;
    eprintln!(
        "swept {} configurations in {wall:.1?}; best PSNR {}",
        results.len(),
        fmt_opt(results.first().map(|r| r.psnr)),
    );
    Ok(())
}

pub fn run_metrics(manifest: &Manifest, overrides: &Overrides) -> CliResult<()> {
    let dir = out_dir(manifest, overrides);
    let section = manifest
        .metrics
        .as_ref()
        .ok_or_else(|| CliError::Config("manifest has no [metrics] section".into()))?;
    let image = load_image(&section.image, None)?;
    let reference = load_image(&section.reference, None)?;
    let (p, s, f) = quality_row(&image, &reference)?;
    let mut text = String::from("psnr,ssim,fsim\n");
    let row = format!("{},{},{}\n", fmt_opt(Some(p)), fmt_opt(s), fmt_opt(f));
    text.push_str(&row);
    atomic_write_text(&dir.join("metrics.csv"), &text)?;
    print!("{row}");
    Ok(())
}
