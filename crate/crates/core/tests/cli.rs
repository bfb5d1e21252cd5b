//! End-to-end tests of the command-line interface and its exit-code
//! contract: 0 on pass/pass-with-flags, 1 on fail, 2 on error.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wparab"))
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("wparab-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const PASSING: &str = r#"
[manifold]
dim = 1
lengths = 6.283185307179586
counts = 64

[weight]
f = "0.3*cos(x)"

[nonlinearity]
case = fisher_kpp
c = 1.0

[initial]
w0 = "0.5 + 0.2*sin(x)"

[solver]
t_end = 1.0
safety = 0.5
snapshots = 0.25:0.046875:1.0
t_min = 0.25
seed = 7

[checks.hamilton_bound]
"#;

#[test]
fn run_passing_scenario_exits_zero() {
    let cfg = write_config("passing.ini", PASSING);
    let out_dir = std::env::temp_dir().join("wparab-cli-tests/out-pass");
    let out = bin()
        .args(["run"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("hamilton_bound"), "{stdout}");
    assert!(out_dir.join("report.json").exists());
}

#[test]
fn flagged_pass_exits_zero_with_stderr_summary() {
    // reversed_harnack at β just below the generic floor raises a flag
    let body = format!(
        "{PASSING}\n[checks.reversed_harnack]\nm = 2\nalpha = 2\nepsilon = 0.5\nbeta = 0.1\ndelta = 0.01\npairs = 5\n"
    );
    let cfg = write_config("flagged.ini", &body);
    let out_dir = std::env::temp_dir().join("wparab-cli-tests/out-flagged");
    let out = bin()
        .args(["run"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("hypothesis flags raised"), "{stderr}");
    assert!(stderr.contains("beta_floor"), "{stderr}");
}

#[test]
fn invalid_config_exits_two_with_all_errors() {
    let body = PASSING.replace("counts = 64", "counts = 4").replace("safety = 0.5", "safety = 9");
    let cfg = write_config("invalid.ini", &body);
    let out = bin().args(["run"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("counts"), "{stderr}");
    assert!(stderr.contains("safety"), "{stderr}");
}

#[test]
fn failing_check_exits_one() {
    // a source-free run far from flat at t = 1 cannot meet a 1e-8 threshold;
    // the preconditions hold, so this is an honest fail, not a flagged pass
    let body = r#"
[manifold]
dim = 1
lengths = 6.283185307179586
counts = 64

[initial]
w0 = "2 + sin(x)"

[solver]
t_end = 1.0
snapshots = 0.5, 1.0
t_min = 0.25

[checks.liouville_assess]
threshold = 1e-8
"#;
    let cfg = write_config("failing.ini", body);
    let out_dir = std::env::temp_dir().join("wparab-cli-tests/out-fail");
    let out = bin()
        .args(["run"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn validate_subcommand() {
    let cfg = write_config("valid.ini", PASSING);
    let out = bin().args(["validate"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok: scenario valid"));

    let bad = write_config("alpha-one.ini", &format!("{PASSING}\n[checks.li_yau_global]\nalpha = 1\nm = 2\n"));
    let out = bin().args(["validate"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha > 1 required"));
}

#[test]
fn list_cases_prints_catalog() {
    let out = bin().args(["list-cases"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for case in
        ["zero", "power_diff", "caffarelli_lin", "pure_power", "log_power", "allen_cahn", "fisher_kpp", "custom_table"]
    {
        assert!(stdout.contains(case), "catalog missing {case}:\n{stdout}");
    }
    assert!(stdout.contains("q > p >= 1"), "{stdout}");
}

#[test]
fn csv_and_plotdata_formats() {
    let cfg = write_config("emit.ini", PASSING);
    let out_dir = std::env::temp_dir().join("wparab-cli-tests/out-csv");
    let out = bin()
        .args(["run"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .args(["--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(csv.starts_with("check,t,min_margin"));
    assert_eq!(csv.trim().lines().count(), 1 + 17, "one row per (check, snapshot)");

    let out_dir = std::env::temp_dir().join("wparab-cli-tests/out-plot");
    let out = bin()
        .args(["run"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .args(["--format", "plotdata"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let dat = std::fs::read_to_string(out_dir.join("hamilton_bound.dat")).unwrap();
    assert!(dat.starts_with("# t\tmin_margin\tlhs_sup\trhs_inf"));
}

#[test]
fn refine_subcommand_prints_tables() {
    let body = r#"
[manifold]
dim = 1
lengths = 6.283185307179586
counts = 64

[initial]
w0 = "2 + sin(x)"

[solver]
t_end = 0.25

[refine]
mode = spatial
reference = "2 + exp(-t)*sin(x)"
"#;
    let cfg = write_config("refine.ini", body);
    let out_dir = std::env::temp_dir().join("wparab-cli-tests/out-refine");
    let out = bin()
        .args(["refine"])
        .arg(&cfg)
        .args(["--levels", "3", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("error:reference_expression"), "{stdout}");
    assert!(stdout.contains("order"), "{stdout}");
}
