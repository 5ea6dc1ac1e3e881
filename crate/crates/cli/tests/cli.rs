use std::path::Path;
use std::process::{Command, Output};

fn hwkg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hwkg"))
        .args(args)
        .env("HWKG_THREADS", "1")
        .output()
        .expect("hwkg runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = "\
# a short run
half_extent = 7
n = 24
t_final = 5
epsilon = 0.01
coeff.mu = 1
";

fn small_run(dir: &Path) -> Output {
    let cfg = dir.join("small.cfg");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = dir.join("run");
    hwkg(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn preset_list_names_every_preset() {
    let o = hwkg(&["preset", "list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(names.len(), 12);
    assert!(names.iter().any(|n| n == "refinement-pair"));
    assert!(names.iter().any(|n| n == "single-nv-ab"));
}

#[test]
fn unknown_presets_list_the_known_ones() {
    let o = hwkg(&["preset", "warp-drive"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(
        e.contains("unknown preset 'warp-drive'") && e.contains("headline-nonlinear"),
        "{e}"
    );
}

#[test]
fn config_runs_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path());
    // h = 0.6 is far too coarse for the margin checks: completed, criteria failed
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("status=completed pass=false"));
    assert!(stdout(&o).contains("A7 support") && stdout(&o).contains("A5 max_margin_energy_u"));
    for f in [
        "diagnostics.csv",
        "series.csv",
        "summary.json",
        "progress.log",
        "config.cfg",
    ] {
        assert!(dir.path().join("run").join(f).exists(), "{f}");
    }
}

#[test]
fn bad_keys_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "epsilon = 0.01\n\nwarp = 9\n").unwrap();
    let o = hwkg(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(
        e.starts_with("error: ") && e.contains("line 3") && e.contains("warp"),
        "{e}"
    );
}

#[test]
fn identities_pass() {
    let o = hwkg(&["identities", "--points", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.contains("PASS")));
}

#[test]
fn report_merge_tags_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert!(small_run(dir.path()).status.code().is_some_and(|c| c != 1));
    let run = dir.path().join("run");
    let merged = dir.path().join("merged.csv");
    let o = hwkg(&[
        "report-merge",
        "--out",
        merged.to_str().unwrap(),
        run.to_str().unwrap(),
        run.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&merged).unwrap();
    assert!(text.starts_with("run,"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("run,")));
}
