use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn quick() -> PathBuf {
    Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../configs/quick.toml"
    ))
    .to_path_buf()
}

fn blgv(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blgv"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn report_dir(out: &Output) -> PathBuf {
    let text = String::from_utf8_lossy(&out.stdout);
    let last = text.lines().last().unwrap();
    PathBuf::from(last.split_once(' ').unwrap().1)
}

fn with_config(tmp: &Path, extra: &str) -> PathBuf {
    let path = tmp.join("cfg.toml");
    let base = fs::read_to_string(quick()).unwrap();
    fs::write(&path, format!("{base}\n{extra}")).unwrap();
    path
}

#[test]
fn lp_selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = blgv(&["lp_selftest"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout
        .lines()
        .any(|l| l.starts_with("PASS partition_of_unity")));
    let summary = fs::read_to_string(report_dir(&out).join("summary.kv")).unwrap();
    assert!(summary.starts_with("experiment=lp_selftest\nstatus=PASS\nexit_code=0\n"));
}

#[test]
fn zero_data_run_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("zero.toml");
    fs::write(
        &cfg,
        "[physics]\nepsilon = 0.0\n[data]\nu_norm = 0.0\n[time]\nt_end = 0.01\n",
    )
    .unwrap();
    let out = blgv(&["run", "-c", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(report_dir(&out).join("norms.csv").is_file());
}

#[test]
fn apriori_writes_series_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    let out = blgv(&["apriori", "-c", quick().to_str().unwrap()], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let dir = report_dir(&out);
    assert!(dir
        .file_name()
        .unwrap()
        .to_string_lossy()
        .starts_with("apriori-"));
    for f in [
        "config.toml",
        "apriori.csv",
        "apriori.plot",
        "checks.csv",
        "summary.kv",
    ] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    assert!(dir.join("snapshots/u_00000.bin").is_file());
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.toml");
    assert_eq!(
        blgv(&["run", "-c", missing.to_str().unwrap()], tmp.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(blgv(&["frobnicate"], tmp.path()).status.code(), Some(1));
    let bad = with_config(tmp.path(), "[extra]\nx = 1\n");
    assert_eq!(
        blgv(&["run", "-c", bad.to_str().unwrap()], tmp.path())
            .status
            .code(),
        Some(1)
    );
    let eps = tmp.path().join("eps.toml");
    fs::write(&eps, "[physics]\nepsilon = 2.0\n").unwrap();
    assert_eq!(
        blgv(&["run", "-c", eps.to_str().unwrap()], tmp.path())
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn out_of_theory_data_aborts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("hot.toml");
    fs::write(
        &cfg,
        "[physics]\nepsilon = 2.0\n[data]\nallow_out_of_theory = true\n[time]\nt_end = 0.01\n",
    )
    .unwrap();
    let out = blgv(&["apriori", "-c", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    let summary = fs::read_to_string(report_dir(&out).join("summary.kv")).unwrap();
    assert!(summary.contains("status=ABORTED\nexit_code=3\n"));
    assert!(summary.contains("abort=temperature floor breached"));
}

#[test]
fn plots_on_empty_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_blgv"))
        .args(["plots", empty.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("missing norms.csv"));
    assert_eq!(fs::read_dir(&empty).unwrap().count(), 0);
}

#[test]
fn identical_configs_give_identical_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick();
    let a = report_dir(&blgv(&["run", "-c", cfg.to_str().unwrap()], tmp.path()));
    let b = report_dir(&blgv(&["run", "-c", cfg.to_str().unwrap()], tmp.path()));
    assert_ne!(a, b);
    for f in [
        "norms.csv",
        "mu.csv",
        "apriori.csv",
        "radius.csv",
        "spectrum.csv",
        "summary.kv",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}
