use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use itd_core::ite::{self, IteOptions};
use itd_core::medium::{Dimension, RadialMedium};
use itd_core::radial::{self, Problem};

const DISK: &str = r#""dimension": 2, "outer_radius": 1.0, "layers": [{"r": 1.0, "n": 4.0}]"#;
const FLAT: &str = r#""dimension": 2, "outer_radius": 1.0, "layers": [{"r": 1.0, "n": 1.0}]"#;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, format!("{{{body}}}")).unwrap();
    path
}

fn itd(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_itd"));
    cmd.args(args)
        .env_remove("ITD_INJECT_FAULT")
        .env_remove("ITD_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run(dir: &Path, command: &str, body: &str, extra: &[&str]) -> Output {
    let cfg = write_config(dir, body);
    let out = dir.join("out");
    let mut args = vec![
        command,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    itd(&args, &[])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn ite_scan_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        "ite-scan",
        &format!(r#"{DISK}, "lambda_max": 40"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        first_line(&dir.path().join("out/ites.csv")),
        "lambda_T,mode,multiplicity,singular,sigma_traj,sigma_flow,sigma_sig"
    );
    assert!(dir.path().join("out/ites.json").exists());
}

#[test]
fn unit_index_exits_2() {
    for command in [
        "ite-scan",
        "duality-trace",
        "flow-sweep",
        "weyl-report",
        "signature-check",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(
            dir.path(),
            command,
            &format!(r#"{FLAT}, "lambda_max": 40"#),
            &[],
        );
        assert_eq!(o.status.code(), Some(2), "{command}");
        assert!(
            stderr(&o).contains("degenerate"),
            "{command}: {}",
            stderr(&o)
        );
    }
}

#[test]
fn missing_field_exits_3_and_names_it() {
    for command in ["ite-scan", "weyl-report"] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(dir.path(), command, DISK, &[]);
        assert_eq!(o.status.code(), Some(3));
        assert!(stderr(&o).contains("lambda_max"), "{}", stderr(&o));
    }
}

#[test]
fn duality_trace_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{DISK}, "lambda_max": 40, "k_windows": [{{"mode": 1, "k_min": 0.5, "k_max": 6.0}}], "emit": ["csv", "json", "plotdata"]"#
    );
    let o = run(dir.path(), "duality-trace", &body, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        first_line(&dir.path().join("out/trajectory.csv")),
        "k,mode,re_z,im_z,arg_z"
    );
    let events: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/crossings.json")).unwrap(),
    )
    .unwrap();
    // first ITE of mode 1 sits at λ ≈ 8.43, k ≈ 2.90
    assert!(!events.as_array().unwrap().is_empty());
    let plot = std::fs::read_to_string(dir.path().join("out/trajectory_l1.dat")).unwrap();
    assert!(plot.lines().all(|l| l.split_whitespace().count() == 2));
}

#[test]
fn bad_window_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{DISK}, "lambda_max": 40, "k_windows": [{{"mode": 1, "k_min": 6.0, "k_max": 2.0}}]"#
    );
    let o = run(dir.path(), "duality-trace", &body, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("k_windows[0]"));
}

#[test]
fn flow_sweep_records_conservation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        "flow-sweep",
        &format!(r#"{DISK}, "lambda_max": 60"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("out/ledger.json")).unwrap();
    assert!(text.contains(r#""n_minus_end - n_minus_start == n1 + n2": true"#));
}

#[test]
fn alpha_ref_above_first_event_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        "flow-sweep",
        &format!(r#"{DISK}, "lambda_max": 60, "alpha_ref": 20.0"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("alpha"));
}

/// `t` equal to the common DtN value at an ITE puts an impedance
/// eigenvalue of both problems on top of it.
#[test]
fn forced_collision_exits_4_and_logs_new_t() {
    let m = RadialMedium::homogeneous(Dimension::Two, 1.0, 4.0).unwrap();
    let scan = ite::collect_ites(&m, 20.0, IteOptions::default()).unwrap();
    let rec = &scan.records[0];
    let v = radial::boundary_data(&m, Problem::Medium, rec.mode, rec.lambda_t).unwrap();
    let t = v.derivative / v.value;

    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        "flow-sweep",
        &format!(r#"{DISK}, "lambda_max": 20, "t": {t:e}"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("re-chosen t"), "{}", stderr(&o));
    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/ledger.json")).unwrap())
            .unwrap();
    assert_ne!(ledger["t"].as_f64().unwrap(), t);
    assert_eq!(ledger["t_rejected"][0].as_f64().unwrap(), t);
}

#[test]
fn weyl_report_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        "weyl-report",
        &format!(r#"{DISK}, "lambda_max": 60"#),
        &["--source", "signature"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        first_line(&dir.path().join("out/weyl.csv")),
        "lambda,signed_count,prediction,ratio"
    );
    let s: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/weyl_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(s["source"], "signature");
    assert!(s["ratio_pass"].is_boolean() && s["exponent_pass"].is_boolean());
}

#[test]
fn signature_check_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        "signature-check",
        &format!(r#"{DISK}, "lambda_max": 40"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("out/signature.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda_T,mode,a_value,sigma_signature,agree_all"
    );
    assert!(lines.all(|l| l.ends_with(",-1,true")));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        "ite-scan",
        &format!(r#"{DISK}, "lambda_max": 400"#),
        &["--lambda-max", "15", "--t", "-2", "--emit", "json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!dir.path().join("out/ites.csv").exists());
    let j: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/ites.json")).unwrap())
            .unwrap();
    assert_eq!(j["lambda_max"], 15.0);
    assert_eq!(j["medium"]["t"], -2.0);
}

#[test]
fn outputs_are_deterministic() {
    let body = format!(r#"{DISK}, "lambda_max": 50, "emit": ["csv", "json", "plotdata"]"#);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for command in ["ite-scan", "flow-sweep", "weyl-report"] {
        assert_eq!(run(a.path(), command, &body, &[]).status.code(), Some(0));
        let cfg = write_config(b.path(), &body);
        let out = b.path().join("out");
        let o = itd(
            &[
                command,
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--threads",
                "2",
            ],
            &[],
        );
        assert_eq!(o.status.code(), Some(0));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 9);
    for n in names {
        let x = std::fs::read(a.path().join("out").join(&n)).unwrap();
        let y = std::fs::read(b.path().join("out").join(&n)).unwrap();
        assert_eq!(x, y, "{n:?}");
    }
}

#[test]
fn selftest_passes_and_lists() {
    let o = itd(&["selftest"], &[("ITD_THREADS", "2")]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let o = itd(&["selftest", "--list"], &[]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(
        text.lines().collect::<Vec<_>>(),
        [
            "wronskian",
            "unitarity",
            "monotonicity",
            "conservation",
            "triple-sigma"
        ]
    );
}

#[test]
fn injected_fault_names_the_suite() {
    for suite in ["wronskian", "conservation", "triple-sigma"] {
        let o = itd(&["selftest"], &[("ITD_INJECT_FAULT", suite)]);
        assert_eq!(o.status.code(), Some(1));
        assert!(
            stderr(&o).contains(&format!("selftest failed: {suite}")),
            "{}",
            stderr(&o)
        );
    }
}

#[test]
fn unknown_flag_is_a_config_error() {
    let o = itd(&["ite-scan", "--bogus"], &[]);
    assert_eq!(o.status.code(), Some(3));
}
