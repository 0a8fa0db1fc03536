//! TOML experiment manifests: one file pins the input image, the
//! degradation, the solver configuration (or a sweep grid), and the output
//! artifacts of a run.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use deframe_core::degrade::{DegradationSpec, PsfSpec};
use deframe_core::SolverConfig;

use crate::errors::{CliError, CliResult};

pub const DEFAULT_SWEEP_CAP: usize = 500;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub input: InputSection,
    #[serde(default)]
    pub degradation: Option<DegradationSection>,
    #[serde(default)]
    pub solver: Option<SolverSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    pub outputs: OutputsSection,
    #[serde(default)]
    pub metrics: Option<MetricsSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// File path (PNG/PGM) or a `synth:` URI, e.g. `synth:scene:256x256`
    /// or `synth:checker:64x64:8`.
    pub image: String,
    /// Optional bilinear resize `[height, width]` applied after loading.
    #[serde(default)]
    pub resize: Option<[usize; 2]>,
    /// Clean reference for metric curves; defaults to the input image.
    #[serde(default)]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegradationSection {
    pub seed: u64,
    #[serde(default)]
    pub std: f64,
    /// Noise power in dBm; omit to disable noise.
    #[serde(default)]
    pub noise_power_dbm: Option<f64>,
    pub psf: PsfSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PsfSection {
    Gaussian { rows: usize, cols: usize, sigma: f64 },
    Motion { len: f64, theta_deg: f64 },
}

impl PsfSection {
    pub fn to_spec(&self) -> PsfSpec {
        match *self {
            PsfSection::Gaussian { rows, cols, sigma } => PsfSpec::Gaussian { rows, cols, sigma },
            PsfSection::Motion { len, theta_deg } => PsfSpec::Motion { len, theta_deg },
        }
    }
}

impl DegradationSection {
    pub fn to_spec(&self, seed_override: Option<u64>) -> DegradationSpec {
        DegradationSpec {
            psf: self.psf.to_spec(),
            std: self.std,
            noise_power_dbm: self.noise_power_dbm,
            seed: seed_override.unwrap_or(self.seed),
        }
    }
}

/// Solver parameters; omitted fields fall back to the library defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub beta3: Option<f64>,
    pub alpha: Option<f64>,
    pub q: Option<usize>,
    pub tol: Option<f64>,
    pub max_outer: Option<usize>,
    pub inner_iters: Option<usize>,
    pub inner_tol: Option<f64>,
}

impl SolverSection {
    pub fn to_config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            lambda1: self.lambda1.unwrap_or(d.lambda1),
            lambda2: self.lambda2.unwrap_or(d.lambda2),
            lambda3: self.lambda3.unwrap_or(d.lambda3),
            beta1: self.beta1.unwrap_or(d.beta1),
            beta2: self.beta2.unwrap_or(d.beta2),
            beta3: self.beta3.unwrap_or(d.beta3),
            alpha: self.alpha.unwrap_or(d.alpha),
            q: self.q.unwrap_or(d.q),
            tol: self.tol.unwrap_or(d.tol),
            max_outer: self.max_outer.unwrap_or(d.max_outer),
            inner_iters: self.inner_iters.unwrap_or(d.inner_iters),
            inner_tol: self.inner_tol.unwrap_or(d.inner_tol),
        }
    }
}

/// Cartesian sweep grid; each omitted axis uses the default singleton.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambda1: Option<Vec<f64>>,
    pub lambda2: Option<Vec<f64>>,
    pub lambda3: Option<Vec<f64>>,
    pub beta1: Option<Vec<f64>>,
    pub beta2: Option<Vec<f64>>,
    pub beta3: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub q: Option<Vec<usize>>,
    /// Refusal threshold on the grid size (default 500).
    pub cap: Option<usize>,
}

impl SweepSection {
    /// Enumerate the Cartesian product, base solver settings taken from the
    /// optional `[solver]` section.
    pub fn enumerate(&self, base: &SolverConfig) -> CliResult<Vec<SolverConfig>> {
        let axis_f = |values: &Option<Vec<f64>>, default: f64, name: &str| -> CliResult<Vec<f64>> {
            match values {
                Some(v) if v.is_empty() => {
                    Err(CliError::Config(format!("sweep axis {name} is empty")))
                }
                Some(v) => Ok(v.clone()),
                None => Ok(vec![default]),
            }
        };
        let lambda1 = axis_f(&self.lambda1, base.lambda1, "lambda1")?;
        let lambda2 = axis_f(&self.lambda2, base.lambda2, "lambda2")?;
        let lambda3 = axis_f(&self.lambda3, base.lambda3, "lambda3")?;
        let beta1 = axis_f(&self.beta1, base.beta1, "beta1")?;
        let beta2 = axis_f(&self.beta2, base.beta2, "beta2")?;
        let beta3 = axis_f(&self.beta3, base.beta3, "beta3")?;
        let alpha = axis_f(&self.alpha, base.alpha, "alpha")?;
        let q = match &self.q {
            Some(v) if v.is_empty() => {
                return Err(CliError::Config("sweep axis q is empty".into()))
            }
            Some(v) => v.clone(),
            None => vec![base.q],
        };

        let total = lambda1.len()
            * lambda2.len()
            * lambda3.len()
            * beta1.len()
            * beta2.len()
            * beta3.len()
            * alpha.len()
            * q.len();
        let cap = self.cap.unwrap_or(DEFAULT_SWEEP_CAP);
        if total > cap {
            return Err(CliError::Config(format!(
                "sweep grid enumerates {total} runs, above the cap of {cap}; select a smaller subset or raise `cap`"
            )));
        }

        let mut configs = Vec::with_capacity(total);
        for &l1 in &lambda1 {
            for &l2 in &lambda2 {
                for &l3 in &lambda3 {
                    for &b1 in &beta1 {
                        for &b2 in &beta2 {
                            for &b3 in &beta3 {
                                for &a in &alpha {
                                    for &qv in &q {
                                        configs.push(SolverConfig {
                                            lambda1: l1,
                                            lambda2: l2,
                                            lambda3: l3,
                                            beta1: b1,
                                            beta2: b2,
                                            beta3: b3,
                                            alpha: a,
                                            q: qv,
                                            ..base.clone()
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(configs)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub dir: PathBuf,
    #[serde(default = "default_true")]
    pub restored_png: bool,
    #[serde(default = "default_true")]
    pub curves_csv: bool,
    #[serde(default = "default_true")]
    pub report_csv: bool,
    #[serde(default)]
    pub truth_dump: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub image: String,
    pub reference: String,
}

fn default_true() -> bool {
    true
}

impl Manifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read manifest {}: {e}", path.display())))?;
        let manifest: Manifest = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("manifest {}: {e}", path.display())))?;
        Ok(manifest)
    }

    pub fn degradation(&self) -> CliResult<&DegradationSection> {
        self.degradation
            .as_ref()
            .ok_or_else(|| CliError::Config("manifest has no [degradation] section".into()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver
            .as_ref()
            .map(|s| s.to_config())
            .unwrap_or_default()
    }
}
