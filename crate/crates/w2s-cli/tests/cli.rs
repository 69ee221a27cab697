//! End-to-end tests of the `w2s` binary: exit codes, file outputs, and the
//! gen → metric → sweep → report pipeline on desk-scale configs.

use std::path::Path;
use std::process::{Command, Output};

fn w2s(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_w2s"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn w2s")
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = w2s(&[], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = w2s(&["frobnicate", "--config", "x.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = w2s(&["validate", "--config", "x.toml"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(1),
        "validate without subcommand is a usage error"
    );
}

#[test]
fn missing_config_file_exits_2_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = w2s(&["gen", "--config", "does_not_exist.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("does_not_exist.toml"), "stderr: {stderr}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        r#"
[generator]
kind = "toy"
eta_w = 0.5
eta_s = 1.0
d = 64
sigma2 = 1.0
n_hat = 16
n_tilde = 16
seed = 1
not_a_real_key = 7

[io]
out_weak = "w.bin"
out_strong = "s.bin"
"#,
    );
    let out = w2s(&["gen", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not_a_real_key"), "stderr: {stderr}");
}

const SMALL_TOY: &str = r#"
[generator]
kind = "toy"
eta_w = 0.6
eta_s = 1.0
d = 1500
sigma2 = 2.0
n_hat = 48
n_tilde = 48
n_test = 64
seed = 7

[beta]
beta_w = 4.2e-7
beta_s = 4.2e-7
beta_eff_w = 0.042
beta_eff_s = 0.042

[projection]
mode = "pca"
alpha_w = 0.1
alpha_s = 0.1

[seeds]
master = 7
count = 2

[io]
out_weak = "weak.bin"
out_strong = "strong.bin"
in_weak = "weak.bin"
in_strong = "strong.bin"
out_json = "report.json"
"#;

#[test]
fn gen_then_metric_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "toy.toml", SMALL_TOY);
    let out = w2s(&["gen", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "gen failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("weak.bin").exists());
    assert!(dir.path().join("strong.bin").exists());

    let out = w2s(&["metric", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "metric failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    for key in [
        "theory_rhs",
        "norm_ps_ipw",
        "norm_ps_ipw_ps",
        "bound1",
        "c",
        "err_w",
        "err_w2s",
        "err_sc",
    ] {
        let v = json[key].as_f64().unwrap_or(f64::NAN);
        assert!(v.is_finite(), "field {key} = {v}");
    }
    assert!(json["predgap"]["value"].as_f64().unwrap().is_finite());
}

#[test]
fn fit_emits_eval_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "toy.toml", SMALL_TOY);
    assert!(w2s(&["gen", "--config", &cfg], dir.path()).status.success());
    let out = w2s(&["fit", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "fit failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    // ceiling head fits the true labels at interpolation scale: tiny test error
    let sc_test = json["ceiling"]["eval"]["err_test"].as_f64().unwrap();
    assert!(sc_test < 0.1, "ceiling test error {sc_test}");
    assert!(json["w2s"]["eval"]["err_train"].as_f64().unwrap() < 1e-4);
}

#[test]
fn metric_without_inputs_generates_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "gen_metric.toml",
        &SMALL_TOY.replace("in_weak = \"weak.bin\"\nin_strong = \"strong.bin\"\n", ""),
    );
    let out = w2s(&["metric", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn validate_benign_reports_expected_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "benign.toml",
        r#"
[generator]
kind = "toy"
eta_w = 0.6
eta_s = 1.0
d = 10000
sigma2 = 2.0
n_hat = 96
n_tilde = 96
seed = 0

[beta]
beta_w = 2.0e-8
beta_s = 2.0e-8

[seeds]
master = 1
count = 15

[io]
out_json = "benign.json"
"#,
    );
    let out = w2s(&["validate", "benign", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("benign.json")).unwrap())
            .unwrap();
    let mean_err_w = json["mean_err_w"].as_f64().unwrap();
    assert!(
        (0.35..=0.45).contains(&mean_err_w),
        "mean_err_w = {mean_err_w}"
    );
    let max_train = json["max_train_mse_w2s"].as_f64().unwrap();
    assert!(max_train <= 0.02);
}

#[test]
fn sweep_and_report_produce_csv_json_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        r#"
[generator]
kind = "toy"
eta_w = 0.5
eta_s = 1.0
d = 2500
sigma2 = 2.0
n_hat = 48
n_tilde = 48
seed = 0

[beta]
beta_w = 4.2e-7
beta_s = 4.2e-7
beta_eff_w = 0.042
beta_eff_s = 0.042

[projection]
mode = "pca"
alpha_w = 0.1
alpha_s = 0.1

[seeds]
master = 3
count = 3

[sweep]
eta_grid = [0.1, 0.3, 0.5, 0.7, 0.9]

[io]
out_csv = "sweep.csv"
out_json = "sweep.json"
in_csv = "sweep.csv"
out_svg = "scatter.svg"

[report]
metric = "norm_ps_ipw"
"#,
    );
    let out = w2s(&["sweep", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 3, "header + grid x seeds rows");

    let out = w2s(&["report", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = std::fs::read_to_string(dir.path().join("scatter.svg")).unwrap();
    assert_eq!(
        svg.matches("<circle").count(),
        5,
        "one point per aggregate row"
    );
    assert!(svg.contains("norm_ps_ipw"));
    assert!(svg.contains("rho="));

    // missing metric column exits 3
    let bad = write(
        dir.path(),
        "bad_report.toml",
        r#"
[io]
in_csv = "sweep.csv"
out_svg = "bad.svg"

[report]
metric = "no_such_column"
"#,
    );
    let out = w2s(&["report", "--config", &bad], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_title_shows_perfect_rho_for_monotone_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from(w2s_core::harness::SWEEP_CSV_HEADER);
    csv.push('\n');
    for i in 0..10 {
        let x = i as f64 * 0.1;
        csv.push_str(&format!(
            "cfg{i},0,{x},{x},0.0,{x},{x},{x},{x},{x},{x},0.0\n"
        ));
    }
    std::fs::write(dir.path().join("mono.csv"), csv).unwrap();
    let cfg = write(
        dir.path(),
        "mono.toml",
        r#"
[io]
in_csv = "mono.csv"
out_svg = "mono.svg"

[report]
metric = "norm_ps_ipw"
"#,
    );
    let out = w2s(&["report", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = std::fs::read_to_string(dir.path().join("mono.svg")).unwrap();
    assert!(svg.contains("rho=1.000"), "svg title: {svg}");
    assert_eq!(svg.matches("<circle").count(), 10);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_seed_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "toy.toml", SMALL_TOY);
    assert!(w2s(&["gen", "--config", &cfg], dir.path()).status.success());
    let first = std::fs::read(dir.path().join("weak.bin")).unwrap();
    assert!(w2s(&["gen", "--config", &cfg], dir.path()).status.success());
    let second = std::fs::read(dir.path().join("weak.bin")).unwrap();
    assert_eq!(first, second, "same config + seed must be byte-identical");

    let out = Command::new(env!("CARGO_BIN_EXE_w2s"))
        .args(["gen", "--config", &cfg])
        .env("W2S_SEED", "12345")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let overridden = std::fs::read(dir.path().join("weak.bin")).unwrap();
    assert_ne!(first, overridden, "W2S_SEED must override the config seed");
}

#[test]
fn csv_format_round_trips_through_gen() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "csv.toml",
        r#"
[generator]
kind = "spiked"
k = 2
d = 6
sigma2 = 1.0
n_hat = 10
n_tilde = 4
tail_family = "gaussian"
label_coupling = [0.5, 0.2]
seed = 3

[io]
out = "data.csv"
format = "csv"
"#,
    );
    let out = w2s(&["gen", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert_eq!(text.lines().count(), 10, "hat split rows");
    assert_eq!(
        text.lines().next().unwrap().split(',').count(),
        7,
        "6 features + label"
    );
}

#[test]
fn json_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "toy.toml", SMALL_TOY);
    assert!(w2s(&["gen", "--config", &cfg], dir.path()).status.success());
    assert!(w2s(&["metric", "--config", &cfg], dir.path())
        .status
        .success());
    let first = std::fs::read(dir.path().join("report.json")).unwrap();
    assert!(w2s(&["metric", "--config", &cfg], dir.path())
        .status
        .success());
    let second = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(first, second);
    // floats carry 17 significant digits
    let text = String::from_utf8(first).unwrap();
    assert!(
        text.contains("e0") || text.contains("e-") || text.contains("e1"),
        "{text}"
    );
}

#[test]
fn numerical_failures_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    // alpha above 1 keeps no principal directions -> numerical failure class
    let cfg = write(
        dir.path(),
        "empty_subspace.toml",
        &SMALL_TOY.replace("alpha_w = 0.1", "alpha_w = 1.5"),
    );
    assert!(w2s(&["gen", "--config", &cfg], dir.path()).status.success());
    let out = w2s(&["metric", "--config", &cfg], dir.path());
    assert_eq!(
        out.status.code(),
        Some(4),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}
