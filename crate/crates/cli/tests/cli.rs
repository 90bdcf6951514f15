use std::path::Path;
use std::process::{Command, Output};

fn nanopnp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nanopnp")).args(args).env("NANOPNP_THREADS", "1").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SMALL_GRID: [&str; 6] = ["--axial-intervals", "200", "--nx", "32", "--nr", "16"];

fn run_small(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "cylinder_charged", "--solver", "all", "--out", out.to_str().unwrap()];
    args.extend_from_slice(&SMALL_GRID);
    args.extend_from_slice(extra);
    nanopnp(&args)
}

#[test]
fn run_all_single_voltage_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small(dir.path(), &["--voltage", "0.05", "--fields"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "iv_quasi1d.csv",
        "iv_area1d.csv",
        "iv_pnp2d.csv",
        "report.csv",
        "profile_report.csv",
        "cross_sections.csv",
        "axial.csv",
        "fields.csv",
        "axial_area1d.csv",
        "fields2d.csv",
        "current_profile.csv",
        "run_manifest.json",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let header = report.lines().next().unwrap();
    assert!(header.starts_with("voltage,current_pnp2d,"), "{header}");
    assert_eq!(report.lines().count(), 2);
}

#[test]
fn replay_reproduces_outputs_bitwise() {
    let first = tempfile::tempdir().unwrap();
    let o = run_small(first.path(), &["--sweep", "-0.1:0.1:3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let second = tempfile::tempdir().unwrap();
    let manifest = first.path().join("run_manifest.json");
    let o = nanopnp(&["replay", manifest.to_str().unwrap(), "--out", second.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["iv_quasi1d.csv", "iv_area1d.csv", "iv_pnp2d.csv", "report.csv"] {
        let a = std::fs::read(first.path().join(f)).unwrap();
        let b = std::fs::read(second.path().join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn replay_detects_tampered_outputs() {
    let first = tempfile::tempdir().unwrap();
    let o = nanopnp(&["quasi1d", "sweep", "cylinder_charged", "--sweep", "0:0.1:2", "--out", first.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let manifest = first.path().join("run_manifest.json");
    let text = std::fs::read_to_string(&manifest).unwrap();
    let tampered = text.replacen("\"sha256\": \"", "\"sha256\": \"0", 1);
    assert_ne!(text, tampered);
    std::fs::write(&manifest, tampered).unwrap();
    let second = tempfile::tempdir().unwrap();
    let o = nanopnp(&["replay", manifest.to_str().unwrap(), "--out", second.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"x\"\n[geometry]\nlength = -1\n").unwrap();
    assert_eq!(code(&nanopnp(&["run", bad.to_str().unwrap(), "--voltage", "0.1", "--out", out])), 1);
    assert_eq!(code(&nanopnp(&["run", "no_such_scenario", "--voltage", "0.1", "--out", out])), 1);
    assert_eq!(code(&nanopnp(&["run", "cylinder", "--sweep", "0:1", "--out", out])), 1);
    // fields need a single voltage
    assert_eq!(code(&nanopnp(&["run", "cylinder", "--sweep", "0:0.1:3", "--fields", "--out", out])), 1);
    // a 2D mesh below the minimum size
    assert_eq!(code(&nanopnp(&["pnp2d", "solve", "cylinder", "--voltage", "0.1", "--nx", "4", "--out", out])), 1);
}

#[test]
fn scenario_dump_round_trips() {
    let o = nanopnp(&["scenario", "list"]);
    assert_eq!(code(&o), 0);
    let names = String::from_utf8(o.stdout).unwrap();
    assert!(names.lines().any(|l| l == "conical"));

    let dir = tempfile::tempdir().unwrap();
    let o = nanopnp(&["scenario", "dump", "trumpet"]);
    assert_eq!(code(&o), 0);
    let path = dir.path().join("t.toml");
    std::fs::write(&path, &o.stdout).unwrap();
    let o = nanopnp(&["quasi1d", "solve", path.to_str().unwrap(), "--voltage", "0.1", "--axial-intervals", "200", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("axial.csv").is_file());
}

#[test]
fn gfuncs_dump_prints_table() {
    let o = nanopnp(&["gfuncs", "dump", "--beta", "5", "--points", "4"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,g1_large,g1_small,g1_smooth,g1_oracle,g2"));
    assert_eq!(lines.count(), 4);
}
