//! End-to-end tests of the CLI harness: manifest handling, the
//! degrade/deblur pipeline, sweeps, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn deframe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deframe"))
}

fn write_manifest(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn smoke_manifest(out_dir: &Path) -> String {
    format!(
        r#"
[input]
image = "synth:checker:64x64:8"

[degradation]
seed = 42
std = 0.001
noise_power_dbm = -40.0

[degradation.psf]
kind = "gaussian"
rows = 9
cols = 9
sigma = 1.5

[outputs]
dir = "{}"
truth_dump = true
"#,
        out_dir.display()
    )
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn csv_field(rows: &[Vec<String>], label: &str, column: usize) -> f64 {
    rows.iter()
        .find(|r| r[0] == label)
        .unwrap_or_else(|| panic!("row {label} missing"))[column]
        .parse()
        .unwrap()
}

#[test]
fn degrade_then_deblur_improves_psnr() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let manifest = write_manifest(tmp.path(), "smoke.toml", &smoke_manifest(&out));

    let status = deframe().arg("degrade").arg(&manifest).status().unwrap();
    assert!(status.success());
    for artifact in ["y.png", "y.f64", "k0.f64", "truth/kernel.f64", "truth/noise.f64"] {
        assert!(out.join(artifact).exists(), "{artifact} missing");
    }

    let status = deframe().arg("deblur").arg(&manifest).status().unwrap();
    assert!(status.success());

    let report = read_csv(&out.join("report.csv"));
    assert_eq!(report[0], vec!["label", "psnr", "ssim", "fsim", "iterations", "final_error"]);
    let degraded_psnr = csv_field(&report, "degraded", 1);
    let restored_psnr = csv_field(&report, "restored", 1);
    assert!(
        restored_psnr > degraded_psnr,
        "no improvement: {degraded_psnr} -> {restored_psnr}"
    );

    // Curves row count equals iterations performed, and the final curve PSNR
    // equals the report PSNR.
    let curves = read_csv(&out.join("curves.csv"));
    let iterations: usize = csv_field(&report, "restored", 4) as usize;
    assert_eq!(curves.len() - 1, iterations);
    let last = curves.last().unwrap();
    assert_eq!(last[2], report[2][1]);
}

#[test]
fn degrade_is_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let manifest = write_manifest(tmp.path(), "smoke.toml", &smoke_manifest(&out_a));

    assert!(deframe().arg("degrade").arg(&manifest).status().unwrap().success());
    assert!(deframe()
        .arg("degrade")
        .arg(&manifest)
        .arg("--out")
        .arg(&out_b)
        .status()
        .unwrap()
        .success());

    for name in ["y.png", "y.f64", "k0.f64"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn seed_override_changes_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let manifest = write_manifest(tmp.path(), "smoke.toml", &smoke_manifest(&out_a));

    assert!(deframe().arg("degrade").arg(&manifest).status().unwrap().success());
    assert!(deframe()
        .arg("degrade")
        .arg(&manifest)
        .arg("--seed")
        .arg("43")
        .arg("--out")
        .arg(&out_b)
        .status()
        .unwrap()
        .success());
    let a = std::fs::read(out_a.join("y.f64")).unwrap();
    let b = std::fs::read(out_b.join("y.f64")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn identity_kernel_degrade_roundtrips_through_png() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let manifest = write_manifest(
        tmp.path(),
        "identity.toml",
        &format!(
            r#"
[input]
image = "synth:scene:48x48"

[degradation]
seed = 1
std = 0.0

[degradation.psf]
kind = "gaussian"
rows = 1
cols = 1
sigma = 1.0

[outputs]
dir = "{}"
"#,
            out.display()
        ),
    );
    assert!(deframe().arg("degrade").arg(&manifest).status().unwrap().success());

    // y must equal the input within 16-bit quantization.
    let y = std::fs::read(out.join("y.f64")).unwrap();
    let clean = deframe_core::degrade::synthetic_scene(48, 48);
    let quantum = 1.0 / 65535.0;
    let mut offset = 16;
    for (idx, want) in clean.data().iter().enumerate() {
        let got = f64::from_le_bytes(y[offset..offset + 8].try_into().unwrap());
        assert!((got - want).abs() <= quantum, "pixel {idx}");
        offset += 8;
    }
}

#[test]
fn unperturbed_kernel_dump_is_normalized() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let manifest = write_manifest(
        tmp.path(),
        "gauss15.toml",
        &format!(
            r#"
[input]
image = "synth:scene:64x64"

[degradation]
seed = 3
std = 0.0

[degradation.psf]
kind = "gaussian"
rows = 15
cols = 15
sigma = 1.5

[outputs]
dir = "{}"
"#,
            out.display()
        ),
    );
    assert!(deframe().arg("degrade").arg(&manifest).status().unwrap().success());

    let raw = std::fs::read(out.join("k0.f64")).unwrap();
    let rows = u64::from_le_bytes(raw[0..8].try_into().unwrap());
    let cols = u64::from_le_bytes(raw[8..16].try_into().unwrap());
    assert_eq!((rows, cols), (15, 15));
    let sum: f64 = raw[16..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .sum();
    assert!((sum - 1.0).abs() <= 1e-12, "kernel sums to {sum}");
}

#[test]
fn nan_observation_fails_with_numeric_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let manifest = write_manifest(tmp.path(), "smoke.toml", &smoke_manifest(&out));
    assert!(deframe().arg("degrade").arg(&manifest).status().unwrap().success());

    // Poison one observation sample and expect a numeric failure (exit 3).
    let y_path = out.join("y.f64");
    let mut raw = std::fs::read(&y_path).unwrap();
    raw[16..24].copy_from_slice(&f64::NAN.to_le_bytes());
    std::fs::write(&y_path, raw).unwrap();
    let status = deframe().arg("deblur").arg(&manifest).status().unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn deblur_without_artifacts_fails_with_io_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never-created");
    let manifest = write_manifest(tmp.path(), "smoke.toml", &smoke_manifest(&out));
    let status = deframe().arg("deblur").arg(&manifest).status().unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn malformed_manifest_fails_with_config_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_manifest(tmp.path(), "bad.toml", "[input]\nimage = 42\n");
    let status = deframe().arg("degrade").arg(&manifest).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_manifest_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let text = smoke_manifest(&out) + "\n[solver]\nlambda9 = 1.0\n";
    let manifest = write_manifest(tmp.path(), "typo.toml", &text);
    let status = deframe().arg("degrade").arg(&manifest).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

fn sweep_manifest(out_dir: &Path, sweep_section: &str) -> String {
    format!(
        r#"
[input]
image = "synth:checker:48x48:6"

[degradation]
seed = 7
std = 0.001
noise_power_dbm = -40.0

[degradation.psf]
kind = "gaussian"
rows = 7
cols = 7
sigma = 1.2

{sweep_section}

[outputs]
dir = "{}"
restored_png = false
"#,
        out_dir.display()
    )
}

#[test]
fn sweep_cap_refuses_oversized_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    // The full documented ranges enumerate 6*6*6*3*3*7*6 combinations,
    // far above the default cap.
    let sweep = r#"
[sweep]
lambda1 = [1e-6, 1e-5, 1e-4, 1e-3, 1e3, 1e5]
lambda2 = [1e-6, 1e-5, 1e-4, 1e-3, 1e3, 1e5]
lambda3 = [1e-6, 1e-5, 1e-4, 1e-3, 1e3, 1e5]
beta1 = [0.1, 1.0, 10.0]
beta2 = [0.1, 1.0, 10.0]
beta3 = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0]
alpha = [0.25, 0.5, 0.75, 1.0, 1.5, 1.75]
"#;
    let manifest = write_manifest(tmp.path(), "sweep.toml", &sweep_manifest(&out, sweep));
    let output = deframe().arg("sweep").arg(&manifest).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("81648"), "refusal must state the count: {stderr}");
}

#[test]
fn singleton_sweep_matches_deblur() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let manifest = write_manifest(
        tmp.path(),
        "sweep.toml",
        &sweep_manifest(&out, "[sweep]\nlambda2 = [1e-4]\n"),
    );
    assert!(deframe().arg("degrade").arg(&manifest).status().unwrap().success());
    assert!(deframe().arg("deblur").arg(&manifest).status().unwrap().success());
    assert!(deframe().arg("sweep").arg(&manifest).status().unwrap().success());

    let report = read_csv(&out.join("report.csv"));
    let restored_psnr = csv_field(&report, "restored", 1);
    let leaderboard = read_csv(&out.join("leaderboard.csv"));
    assert_eq!(leaderboard.len(), 2, "singleton sweep must have one row");
    let sweep_psnr: f64 = leaderboard[1][1].parse().unwrap();
    assert!((sweep_psnr - restored_psnr).abs() <= 1e-6);
}

#[test]
fn sweep_leaderboard_is_sorted_and_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let sweep = r#"
[sweep]
lambda2 = [1e-4, 1e-3]
alpha = [0.75, 1.0]
"#;
    let manifest = write_manifest(tmp.path(), "sweep.toml", &sweep_manifest(&out, sweep));
    assert!(deframe().arg("sweep").arg(&manifest).status().unwrap().success());
    let first = std::fs::read(out.join("leaderboard.csv")).unwrap();

    let rows = read_csv(&out.join("leaderboard.csv"));
    assert_eq!(rows.len(), 5);
    let psnrs: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    for pair in psnrs.windows(2) {
        assert!(pair[0] >= pair[1], "not sorted: {psnrs:?}");
    }

    assert!(deframe()
        .arg("sweep")
        .arg(&manifest)
        .arg("--threads")
        .arg("2")
        .status()
        .unwrap()
        .success());
    let second = std::fs::read(out.join("leaderboard.csv")).unwrap();
    assert_eq!(first, second, "leaderboard differs across runs");
}

#[test]
fn metrics_command_scores_pairs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let manifest = write_manifest(
        tmp.path(),
        "metrics.toml",
        &format!(
            r#"
[input]
image = "synth:scene:64x64"

[metrics]
image = "synth:scene:64x64"
reference = "synth:scene:64x64"

[outputs]
dir = "{}"
"#,
            out.display()
        ),
    );
    let output = deframe().arg("metrics").arg(&manifest).output().unwrap();
    assert!(output.status.success());
    let rows = read_csv(&out.join("metrics.csv"));
    assert_eq!(rows[0], vec!["psnr", "ssim", "fsim"]);
    assert_eq!(rows[1][0], "999.000000");
    assert_eq!(rows[1][1], "1.000000");
    assert_eq!(rows[1][2], "1.000000");
}
