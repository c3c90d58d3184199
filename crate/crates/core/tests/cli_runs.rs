use std::path::Path;
use std::process::Command;

use kscal::catalog::{perturbed_constant_hsc, save_tensor};
use kscal::cli::RunReport;

fn kscal(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kscal")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_dirs(out: &Path) -> Vec<std::path::PathBuf> {
    let mut dirs: Vec<_> = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    dirs.sort();
    dirs
}

fn load(dir: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn certify_space_form_exits_zero_with_nonnegative_slacks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let (code, stdout, stderr) =
        kscal(&["certify", "--model", "constant_hsc:m=4,c=1", "--k", "2", "--p", "2,3,4", "--samples", "50", "--out", out]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let dirs = run_dirs(tmp.path());
    assert_eq!(dirs.len(), 1);
    let report = load(&dirs[0]);
    assert_eq!(report.body.schema, "kscal-report/1");
    assert_eq!(report.body.certifications.iter().filter_map(|c| c.p).collect::<Vec<_>>(), vec![2, 3, 4]);
    let mut csv = csv::Reader::from_path(dirs[0].join("summary.csv")).unwrap();
    assert_eq!(
        csv.headers().unwrap().iter().collect::<Vec<_>>(),
        ["model", "k", "p", "check", "anchor", "value", "bound", "slack", "pass"]
    );
    let mut rows = 0;
    for rec in csv.records() {
        let rec = rec.unwrap();
        let slack: f64 = rec[7].parse().unwrap();
        assert!(slack >= -1e-8, "{rec:?}");
        assert_eq!(&rec[8], "true");
        rows += 1;
    }
    assert_eq!(rows, report.body.rows().len());
}

#[test]
fn sign_mismatch_is_an_error_entry_with_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, stdout, _) = kscal(&[
        "certify",
        "--model",
        "constant_hsc:m=3,c=-1",
        "--sign",
        "positive",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stdout.contains("precondition"));
    let report = load(&run_dirs(tmp.path())[0]);
    assert_eq!(report.body.errors[0].kind, "precondition");
    assert!(!report.body.all_passed);
}

#[test]
fn invalid_configurations_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"model": {"kind": "flat", "m": 3}, "tolerances": {"slack": -1}}"#).unwrap();
    let out = tmp.path().join("runs");
    let out = out.to_str().unwrap();
    for args in [
        vec!["certify", "--config", cfg.to_str().unwrap(), "--out", out],
        vec!["scan", "--model", "flat:m=3", "--k", "4", "--out", out],
        vec!["certify", "--model", "flat:m=3", "--k", "3", "--p", "2", "--out", out],
        vec!["minimize", "--model", "nonsense:m=2", "--out", out],
        vec!["scan", "--tensor-file", "/nonexistent/tensor.json", "--out", out],
        vec!["minimize", "--out", out],
    ] {
        let (code, _, stderr) = kscal(&args);
        assert_eq!(code, 2, "{args:?}: {stderr}");
        assert!(stderr.contains("error"), "{stderr}");
    }
    assert!(!Path::new(out).exists());
}

#[test]
fn flags_override_config_and_runs_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"kind": "perturbed", "m": 4, "epsilon": 0.05, "seed": 3}, "k": [3], "seed": 1,
            "samples": {"probes": 30, "restarts": 3, "planes": 32}}"#,
    )
    .unwrap();
    let out = tmp.path().join("runs");
    let args = ["certify", "--config", cfg.to_str().unwrap(), "--k", "2", "--seed", "5", "--out", out.to_str().unwrap()];
    let (c1, s1, _) = kscal(&args);
    let (c2, _, _) = kscal(&args);
    assert_eq!((c1, c2), (0, 0), "{s1}");
    let dirs = run_dirs(&out);
    assert_eq!(dirs.len(), 2);
    let (a, b) = (load(&dirs[0]), load(&dirs[1]));
    assert_eq!(a.canonical_hash, b.canonical_hash);
    assert_eq!(serde_json::to_string(&a.body).unwrap(), serde_json::to_string(&b.body).unwrap());
    assert_eq!(a.body.config.k, vec![2]);
    assert_eq!(a.body.config.seed, 5);
    assert_eq!(a.body.config.samples.restarts, 3);
    assert!(a.body.certifications.iter().all(|c| c.k == 2));
}

#[test]
fn tensor_file_model_scan_and_minimize() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("tensor.json");
    save_tensor(&perturbed_constant_hsc(3, 2.0, 0.05, 9), &path).unwrap();
    let out = tmp.path().join("runs");
    let out = out.to_str().unwrap();
    let (code, stdout, _) = kscal(&["scan", "--tensor-file", path.to_str().unwrap(), "--k", "1,2", "--samples", "64", "--out", out]);
    assert_eq!(code, 0, "{stdout}");
    let (code, stdout, _) = kscal(&["minimize", "--tensor-file", path.to_str().unwrap(), "--k", "1,2", "--out", out]);
    assert_eq!(code, 0, "{stdout}");
    let reports: Vec<RunReport> = run_dirs(Path::new(out)).iter().map(|d| load(d)).collect();
    let scan = reports.iter().find(|r| r.body.command == "scan").unwrap();
    let min = reports.iter().find(|r| r.body.command == "minimize").unwrap();
    assert_eq!(scan.body.scans[0].scan.plane_samples, 64);
    for (s, cp) in scan.body.scans.iter().zip(&min.body.critical_planes) {
        assert!(cp.plane.value <= s.scan.min_value + 1e-12);
        assert!(cp.plane.gradient_norm < 1e-8);
    }
}

#[test]
fn moments_table_prints_exact_and_monte_carlo_columns() {
    let (code, stdout, _) = kscal(&["moments", "--k", "2", "--max-order", "4", "--samples", "20000"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("1/3") && stdout.contains("1/6"), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.trim_end().ends_with("yes")).count(), 3, "{stdout}");
    let (code, stdout, _) = kscal(&["moments", "--k", "1"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = stdout.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("|z1|^4") && rows[0].contains(" 1 "), "{stdout}");
    let (code, _, _) = kscal(&["moments", "--k", "0"]);
    assert_eq!(code, 2);
}
