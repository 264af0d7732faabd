use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mipt-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn mipt(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mipt"))
        .args(args)
        .env("MIPT_OUT_DIR", out)
        .env("MIPT_WORKERS", "1")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn rerun_is_byte_identical() {
    let dir = scratch("rerun");
    let args = ["run", "--model", "B1", "--L", "16", "--p", "0.2", "--T", "30", "--traj", "4", "--seed", "7", "--name", "a"];
    let first = mipt(&dir, &args);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let csv = fs::read(dir.join("a.csv")).unwrap();
    let manifest = fs::read_to_string(dir.join("a.manifest")).unwrap();
    for key in ["config_hash", "code_version", "wall_seconds", "master_seed", "config.L"] {
        assert!(manifest.contains(key), "manifest lacks {key}");
    }
    assert_eq!(code(&mipt(&dir, &args)), 0);
    assert_eq!(fs::read(dir.join("a.csv")).unwrap(), csv);
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("# schema=v1"));
    assert!(text.contains("# units=bits"));
    assert!(text.contains("t,mean_S,stderr,n"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "model = B2\nL = 8\np = 0.5\nT = 10\ntrajectories = 3\n").unwrap();
    let o = mipt(&dir, &["run", "--config", cfg.to_str().unwrap(), "--L", "12", "--name", "c"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(dir.join("c.manifest")).unwrap();
    assert!(manifest.contains("config.L = 12"));
    assert!(manifest.contains("config.model = B2"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = scratch("usage");
    // dense simulation beyond its qubit budget
    assert_eq!(code(&mipt(&dir, &["run", "--model", "A1", "--L", "20", "--p", "0.1"])), 1);
    assert_eq!(code(&mipt(&dir, &["run", "--model", "C9", "--L", "8"])), 1);
    assert_eq!(code(&mipt(&dir, &["run", "--bogus"])), 1);
    assert_eq!(code(&mipt(&dir, &["sweep", "--model", "B1", "--L", "", "--p", "0.1"])), 1);
    assert_eq!(code(&mipt(&dir, &["--help"])), 0);
}

#[test]
fn channel_run_writes_thermal_entropy() {
    let dir = scratch("channel");
    let o = mipt(&dir, &["run", "--model", "A1", "--L", "4", "--p", "0.5", "--T", "5", "--traj", "2", "--cut-fraction", "0.5", "--channel", "--name", "ch"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(dir.join("ch.csv")).unwrap().contains("quantity=thermal_renyi2"));
}

#[test]
fn sweep_resumes_and_records_failures() {
    let dir = scratch("sweep");
    let args = ["sweep", "--model", "B1", "--L", "8,12,16", "--p", "0.1:0.3:0.1", "--T", "20", "--traj", "4", "--keep-trajectories"];
    let o = mipt(&dir, &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read(dir.join("sweep.csv")).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    assert!(text.contains("model,L,p,LA,S_mean,S_err,n_traj,T"));
    assert_eq!(fs::read_dir(dir.join("cells")).unwrap().count(), 9);

    let again = mipt(&dir, &args);
    assert_eq!(code(&again), 0);
    assert!(String::from_utf8_lossy(&again.stderr).matches("(resumed)").count() == 9);
    assert_eq!(fs::read(dir.join("sweep.csv")).unwrap(), csv);

    // a quarter cut of L = 10 is not a whole number of sites
    let bad = scratch("sweep-bad");
    let o = mipt(&bad, &["sweep", "--model", "B1", "--L", "8,10", "--p", "0.2", "--T", "5", "--traj", "2", "--cut-fraction", "0.25"]);
    assert_eq!(code(&o), 2);
    let manifest = fs::read_to_string(bad.join("sweep.manifest")).unwrap();
    assert!(manifest.contains("cells_failed = L10_p0.2"), "{manifest}");
}

#[test]
fn collapse_writes_report_and_collapsed_csv() {
    let dir = scratch("collapse");
    let o = mipt(&dir, &["sweep", "--model", "B1", "--L", "8,12,16", "--p", "0.05:0.35:0.05", "--T", "30", "--traj", "6", "--keep-trajectories"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = dir.join("sweep.csv");
    let o = mipt(&dir, &["collapse", sweep.to_str().unwrap(), "--window", "0.05:0.35", "--bootstrap", "20", "--restarts", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(dir.join("collapse_report.txt")).unwrap();
    assert!(report.contains("p_c"), "{report}");
    let collapsed = fs::read_to_string(dir.join("collapsed.csv")).unwrap();
    assert!(collapsed.contains("L,p,x,y,y_err"));
}

#[test]
fn collapse_rejects_unknown_schema() {
    let dir = scratch("schema");
    let path = dir.join("future.csv");
    fs::write(&path, "# schema=v9\n# kind=sweep\n# units=bits\nmodel,L,p,LA,S_mean,S_err,n_traj,T\n").unwrap();
    let o = mipt(&dir, &["collapse", path.to_str().unwrap()]);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));
}

#[test]
fn validate_passes() {
    let dir = scratch("validate");
    let o = mipt(&dir, &["validate", "--circuits", "6", "--shots", "4000", "--haar", "4000"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert_eq!(stdout.matches("PASS").count(), 4, "{stdout}");
}
