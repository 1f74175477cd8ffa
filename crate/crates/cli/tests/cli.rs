use std::path::{Path, PathBuf};
use std::process::Command;

use critwave_cli::config::{Command as Cmd, ExperimentConfig, ForcingConfig};
use critwave_core::radial_wave::{homogeneous_solution, InitialData, Profile};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_critwave"))
}

fn run_config(dir: &Path, text: &str) -> (Option<i32>, PathBuf, String) {
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, text).unwrap();
    let out = dir.join("out");
    let result = bin()
        .arg("--config")
        .arg(&cfg_path)
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    (
        result.status.code(),
        out,
        String::from_utf8_lossy(&result.stderr).into_owned(),
    )
}

#[test]
fn minimal_config_fills_documented_defaults() {
    let cfg = ExperimentConfig::parse(
        r#"{"command":"classify","modulus":{"family":"iterated_log","k":2}}"#,
    )
    .unwrap();
    assert_eq!(cfg.command, Cmd::Classify);
    assert_eq!(cfg.grid.h, 0.01);
    assert_eq!(cfg.grid.u_max, 1e8);
    assert_eq!(cfg.testfunc.quad_tol, 1e-8);
    assert_eq!(cfg.testfunc.k, 1);
    assert_eq!(cfg.data.epsilon, 1.0);
    assert_eq!(cfg.data.support_radius, 1.0);
    assert_eq!(cfg.data.u0.0, Profile::Zero);
    assert_eq!(cfg.data.u1.0, Profile::Bump { amplitude: 1.0 });
    assert_eq!(cfg.forcing, ForcingConfig::Critical);
    assert!(cfg.output_dir.is_none());
}

#[test]
fn config_round_trip_is_identity() {
    let texts = [
        r#"{"command":"classify","modulus":{"family":"iterated_log","k":2}}"#,
        r#"{"command":"solve","modulus":{"family":"power_log","gamma":0.7,"c_l":1.3},
            "data":{"u0":{"profile":"poly_bump","amplitude":0.25},
                    "u1":{"profile":"bump","amplitude":2.0},
                    "support_radius":0.8,"epsilon":3.5},
            "grid":{"h":0.02,"t_max":2.0,"r_max":3.0,"u_max":1e6},
            "testfunc":{"k":2,"quad_tol":1e-9},
            "forcing":"none","output_dir":"artifacts"}"#,
    ];
    for text in texts {
        let first = ExperimentConfig::parse(text).unwrap();
        let wire = serde_json::to_string(&first).unwrap();
        let second = ExperimentConfig::parse(&wire).unwrap();
        assert_eq!(second, first);
        assert_eq!(serde_json::to_string(&second).unwrap(), wire);
    }
}

#[test]
fn config_rejects_out_of_range_and_unknown_fields() {
    let cases = [
        (
            r#"{"command":"classify","modulus":{"family":"iterated_log","k":0}}"#,
            "depth",
        ),
        (
            r#"{"command":"classify","modulus":{"family":"iterated_log","k":1},"surprise":1}"#,
            "unknown field",
        ),
        (
            r#"{"command":"classify","modulus":{"family":"iterated_log","k":1},"testfunc":{"k":0}}"#,
            "testfunc.k",
        ),
        (
            r#"{"command":"classify","modulus":{"family":"iterated_log","k":1},"grid":{"h":-0.01}}"#,
            "grid.h",
        ),
        (
            r#"{"command":"functional","modulus":{"family":"iterated_log","k":1},
                "data":{"u0":{"profile":"const","value":1.0}}}"#,
            "u0",
        ),
        (
            r#"{"command":"solve","modulus":{"family":"iterated_log","k":1},
                "grid":{"t_max":2.0,"r_max":1.5}}"#,
            "light cone",
        ),
        (
            r#"{"command":"iterate","modulus":{"family":"power_log","gamma":1.0,"c_l":1.0}}"#,
            "iterated-log",
        ),
        (
            r#"{"command":"iterate","modulus":{"family":"iterated_log","k":2}}"#,
            "log depth",
        ),
        (
            r#"{"command":"solve","modulus":{"family":"iterated_log","k":1},
                "data":{"u1":{"profile":"bump","value":1.0}}}"#,
            "does not apply",
        ),
    ];
    for (text, needle) in cases {
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert!(
            err.contains(needle),
            "error for {text} should mention `{needle}`, got: {err}"
        );
    }
}

#[test]
fn classify_writes_the_documented_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, stderr) = run_config(
        dir.path(),
        r#"{"command":"classify","modulus":{"family":"iterated_log","k":1}}"#,
    );
    assert_eq!(code, Some(0), "stderr: {stderr}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("classify.json")).unwrap()).unwrap();
    assert_eq!(report["classification"], "divergent");
    let partials = report["partial_values"].as_array().unwrap();
    let deepest = partials
        .iter()
        .min_by(|a, b| {
            a["floor"]
                .as_f64()
                .unwrap()
                .partial_cmp(&b["floor"].as_f64().unwrap())
                .unwrap()
        })
        .unwrap();
    assert!((deepest["floor"].as_f64().unwrap() - (-100f64).exp()).abs() < 1e-60);
    assert!((deepest["value"].as_f64().unwrap() - 50f64.ln()).abs() < 1e-6);
    assert_eq!(report["c_str"]["kind"], "finite");
    assert!((report["c_str"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(report["decay"].is_object());
}

#[test]
fn linear_solve_csv_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, stderr) = run_config(
        dir.path(),
        r#"{"command":"solve","modulus":{"family":"iterated_log","k":1},
            "forcing":"none","grid":{"h":0.04,"t_max":1.0,"r_max":2.5}}"#,
    );
    assert_eq!(code, Some(0), "stderr: {stderr}");
    let csv = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    assert!(csv.contains("# scheme = leapfrog"));
    let data = InitialData::new(Profile::Zero, Profile::Bump { amplitude: 1.0 }, 1.0, 1.0).unwrap();
    let mut sup = 0.0f64;
    let mut sup_axis = 0.0f64;
    let mut rows = 0usize;
    for line in csv.lines().filter(|l| !l.starts_with('#') && !l.starts_with('t')) {
        let mut parts = line.split(',');
        let t: f64 = parts.next().unwrap().parse().unwrap();
        let r: f64 = parts.next().unwrap().parse().unwrap();
        let u: f64 = parts.next().unwrap().parse().unwrap();
        let exact = homogeneous_solution(&data, t, r).unwrap();
        let err = (u - exact).abs();
        if r >= 0.1 {
            sup = sup.max(err);
        } else {
            sup_axis = sup_axis.max(err);
        }
        rows += 1;
    }
    assert!(rows > 1000, "csv carries the whole field, got {rows} rows");
    assert!(sup < 5e-3, "sup deviation {sup:e} from the closed form");
    // u = w/r amplifies the constant right next to the axis; still O(h²).
    assert!(sup_axis < 2e-2, "near-axis deviation {sup_axis:e}");
    assert!(!out.join("blowup.json").exists());
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();

    let (code, out, _) = run_config(
        dir.path(),
        r#"{"command":"classify","modulus":{"family":"iterated_log","k":1},"bogus":true}"#,
    );
    assert_eq!(code, Some(1));
    assert!(!out.exists(), "config errors must not create artifacts");

    let blow = tempfile::tempdir().unwrap();
    let (code, out, stderr) = run_config(
        blow.path(),
        r#"{"command":"functional","modulus":{"family":"iterated_log","k":1},
            "data":{"u1":{"profile":"bump","amplitude":2.0},"epsilon":200.0},
            "grid":{"h":0.05,"t_max":3.0}}"#,
    );
    assert_eq!(code, Some(2), "stderr: {stderr}");
    let leftovers: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
    assert!(leftovers.is_empty(), "failed run left artifacts: {leftovers:?}");

    let missing = bin()
        .arg("--config")
        .arg(dir.path().join("nope.json"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let badflag = bin().arg("--frobnicate").output().unwrap();
    assert_eq!(badflag.status.code(), Some(1));
}

#[test]
fn verify_suite_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, stderr) = run_config(
        dir.path(),
        r#"{"command":"verify","modulus":{"family":"iterated_log","k":1}}"#,
    );
    assert_eq!(code, Some(0), "stderr: {stderr}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["failed"], 0);
    assert!(report["passed"].as_u64().unwrap() >= 7);
}

#[test]
fn output_dir_resolution_prefers_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let from_config = dir.path().join("from_config");
    let text = format!(
        r#"{{"command":"classify","modulus":{{"family":"iterated_log","k":1}},
            "output_dir":{}}}"#,
        serde_json::to_string(&from_config).unwrap()
    );
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, &text).unwrap();

    let status = bin().arg("--config").arg(&cfg_path).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(from_config.join("classify.json").exists());

    let flagged = dir.path().join("flagged");
    let status = bin()
        .arg("--config")
        .arg(&cfg_path)
        .arg("--output")
        .arg(&flagged)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(flagged.join("classify.json").exists());
}
