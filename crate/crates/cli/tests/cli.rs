//! End-to-end tests of the scenario pipeline: exit-code taxonomy, fixed
//! CSV headers, JSON structure, and byte-level determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tanklab"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const NONLINEAR_BASE: &str = r#"
name = "demo"
mode = "simulate-nonlinear"

[params]
g = 1.0
mu = 0.02
sigma = 0.0
length = 1.0
liquid_mass = 1.0
wall_height = 2.0

[grid]
n_cells = 48

[gains]
zeta = 10.0
k = 0.15
q = 50.0
delta = 1.0

[run]
t_end = 0.5
cadence = 20

[ic]
h_modes = [[2, 0.01]]
xi0 = 0.01
"#;

#[test]
fn nonlinear_run_produces_deterministic_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(tmp.path(), "demo.toml", NONLINEAR_BASE);
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        let status = bin()
            .arg("run")
            .arg(&scenario)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let csv_a = std::fs::read(out_a.join("demo_timeseries.csv")).unwrap();
    let csv_b = std::fs::read(out_b.join("demo_timeseries.csv")).unwrap();
    assert_eq!(
        csv_a, csv_b,
        "CSV output must be byte-identical across reruns"
    );

    let text = String::from_utf8(csv_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,xi,w,f,V,E,W,h_min,h_max,mass,norm_X"
    );
    let first = lines.next().unwrap();
    assert_eq!(first.split(',').count(), 11);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("demo_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["outcome"], "completed");
}

#[test]
fn spill_violation_yields_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    // Walls barely above the equilibrium level; the ripple tops them.
    let body = NONLINEAR_BASE
        .replace("name = \"demo\"", "name = \"spill\"")
        .replace("wall_height = 2.0", "wall_height = 1.05")
        .replace("[[2, 0.01]]", "[[2, 0.08]]");
    let scenario = write(tmp.path(), "spill.toml", &body);
    let out = tmp.path().join("out");
    let status = bin()
        .arg("run")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("spill_summary.json")).unwrap())
            .unwrap();
    assert!(summary["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["kind"] == "Spill"));
}

#[test]
fn blowup_yields_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    // A violent velocity field drives the level negative within the run.
    let body = NONLINEAR_BASE.replace(
        "h_modes = [[2, 0.01]]",
        "h_modes = [[2, 0.9]]\nv_modes = [[1, 40.0]]",
    );
    let scenario = write(tmp.path(), "crash.toml", &body);
    let out = tmp.path().join("out");
    let status = bin()
        .arg("run")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn config_errors_yield_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    // Unknown key.
    let body = NONLINEAR_BASE.replace("[run]", "[run]\nbanana = 1.0");
    let scenario = write(tmp.path(), "bad.toml", &body);
    let output = bin().arg("run").arg(&scenario).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("banana"),
        "stderr must name the offending key: {stderr}"
    );
    assert!(
        stderr.contains("t_end"),
        "stderr must list valid keys: {stderr}"
    );

    // Contradictory redundant h_star.
    let body = NONLINEAR_BASE.replace("liquid_mass = 1.0", "liquid_mass = 1.0\nh_star = 0.9");
    let scenario = write(tmp.path(), "bad2.toml", &body);
    let output = bin().arg("run").arg(&scenario).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("h_star"));

    // Equilibrium above the walls.
    let body = NONLINEAR_BASE.replace("wall_height = 2.0", "wall_height = 0.5");
    let scenario = write(tmp.path(), "bad3.toml", &body);
    let output = bin().arg("run").arg(&scenario).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn gains_check_pass_and_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let good = r#"
name = "cert"
mode = "gains-check"

[params]
g = 1.0
mu = 0.02
length = 1.0
liquid_mass = 1.0
wall_height = 2.0

[grid]
n_cells = 16

[gains]
zeta = 10.0
k = 0.15
q = 50.0
delta = 1.0

[gains_check]
law = "level-bounded-friction"
r = 2e-4
"#;
    let scenario = write(tmp.path(), "cert.toml", good);
    let out = tmp.path().join("out");
    let status = bin()
        .arg("check-gains")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("cert_certificate.json")).unwrap())
            .unwrap();
    assert_eq!(report["certificate"]["passed"], true);
    assert_eq!(report["certificate"]["law"], "frictionless");

    // The same scenario with an oversized k must fail with exit 5.
    let bad = good.replace("k = 0.15", "k = 40.0");
    let scenario = write(tmp.path(), "cert_bad.toml", &bad);
    let status = bin()
        .arg("check-gains")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(5));
}

#[test]
fn spectrum_mode_emits_mode_table() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
name = "spec"
mode = "spectrum"

[params]
g = 1.0
mu = 2.0
sigma = 1.0
length = 3.141592653589793
liquid_mass = 3.141592653589793
wall_height = 3.0

[grid]
n_cells = 100

[spectrum]
n_modes = 3
"#;
    let scenario = write(tmp.path(), "spec.toml", body);
    let out = tmp.path().join("out");
    let status = bin()
        .arg("spectrum")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("spec_spectrum.json")).unwrap())
            .unwrap();
    let modes = report["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 3);
    for (i, m) in modes.iter().enumerate() {
        assert_eq!(m["n"], i as u64 + 1);
        assert!(m["rel_error"].as_f64().unwrap() < 0.05);
        for key in ["analytic_re", "analytic_im", "discrete_re", "discrete_im"] {
            assert!(m[key].is_number(), "missing {key}");
        }
    }
}

#[test]
fn linear_run_and_resolvent_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let linear = r#"
name = "lin"
mode = "simulate-linear"

[params]
g = 1.0
mu = 0.3
sigma = 0.002
length = 1.0
liquid_mass = 1.0
wall_height = 2.0

[grid]
n_cells = 32

[linear_gains]
big_k = 10.0
k3 = 0.2
k4 = 0.02
k5 = 0.78

[run]
t_end = 1.0
control = "closed-loop"
cadence = 500

[ic]
phi_modes = [[1, -0.078]]
xi0 = 0.012
"#;
    let scenario = write(tmp.path(), "lin.toml", linear);
    let out = tmp.path().join("out");
    let status = bin()
        .arg("run")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("lin_timeseries.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "t,xi,w,f,P,Wtilde,phi_mean,phit_mean"
    );

    let resolvent = r#"
name = "res"
mode = "resolvent-check"

[params]
g = 1.0
mu = 0.4
sigma = 0.3
length = 2.0
liquid_mass = 2.0
wall_height = 3.0
kappa_bar = 0.2

[grid]
n_cells = 16

[resolvent]
q_bar = 0.5
n_terms = 128
rhs = { kind = "exp-cos", amplitude = 1.0 }
"#;
    let scenario = write(tmp.path(), "res.toml", resolvent);
    let status = bin()
        .arg("run")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("res_resolvent.json")).unwrap())
            .unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn multi_scenario_run_returns_worst_code() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = write(tmp.path(), "ok.toml", NONLINEAR_BASE);
    let bad_body = NONLINEAR_BASE.replace("[run]", "[run]\nbanana = 1");
    let bad = write(tmp.path(), "bad.toml", &bad_body);
    let out = tmp.path().join("out");
    let status = bin()
        .arg("run")
        .arg(&ok)
        .arg(&bad)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
