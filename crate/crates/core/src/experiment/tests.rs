use super::*;
use crate::physics::CoefficientSet;
use crate::solver::{Profile, Schedule};

fn small(config: RunConfig, checks: &[Check]) -> ExperimentPreset {
    ExperimentPreset {
        name: "small".into(),
        config,
        checks: checks.to_vec(),
        kind: PresetKind::Single,
    }
}

fn tiny() -> RunConfig {
    RunConfig {
        half_extent: 7.0,
        n: 24,
        t_final: 5.0,
        epsilon: 0.01,
        ..RunConfig::default()
    }
}

fn quiet() -> impl FnMut(&str) {
    |_: &str| {}
}

#[test]
fn zero_data_run_writes_a_full_header_and_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let p = small(
        RunConfig {
            epsilon: 0.0,
            ..tiny()
        },
        &[Check::Support],
    );
    let res = run_experiment(&p, dir.path(), &mut quiet()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join(DIAGNOSTICS_FILE)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), header());
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for row in rows {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 14);
        assert!(cells[1..].iter().all(|&v| v == 0.0), "{row}");
    }
    assert!(res.summary.pass);
    assert_eq!(res.summary.exit_code(), 0);
    assert_eq!(res.summary.status, "completed");
    for f in [SUMMARY_FILE, PROGRESS_FILE, SERIES_FILE, CONFIG_FILE] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let again = parse_config(&dir.path().join(CONFIG_FILE)).unwrap();
    assert_eq!(again, p.config);
}

fn header() -> String {
    crate::hyperdiag::CSV_COLUMNS.join(",")
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let p = small(
        RunConfig {
            coefficients: CoefficientSet::all_ones(),
            profile: Profile::RandomSmooth,
            seed: 3,
            ..tiny()
        },
        &[Check::Support],
    );
    run_experiment(&p, a.path(), &mut quiet()).unwrap();
    run_experiment(&p, b.path(), &mut quiet()).unwrap();
    for f in [DIAGNOSTICS_FILE, SERIES_FILE, PROGRESS_FILE, CONFIG_FILE] {
        let read = |d: &tempfile::TempDir| std::fs::read(d.path().join(f)).unwrap();
        assert_eq!(read(&a), read(&b), "{f}");
    }
}

#[test]
fn aborted_runs_keep_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = small(
        RunConfig {
            support_tol: 0.0,
            ..tiny()
        },
        &[Check::Support],
    );
    let mut lines = Vec::new();
    let res = run_experiment(&p, dir.path(), &mut |l: &str| lines.push(l.to_string())).unwrap();
    let s = &res.summary;
    assert_eq!(s.status, "aborted");
    assert!(s.reason.as_deref().unwrap().contains("support violation"));
    assert!(!s.pass);
    assert_eq!(s.exit_code(), 3);
    assert!(dir.path().join(DIAGNOSTICS_FILE).exists());
    assert!(lines.last().unwrap().starts_with("aborted: "));
    let back = Summary::read(dir.path()).unwrap();
    assert_eq!(&back, s);
}

#[test]
fn exit_code_follows_the_summary_alone() {
    let dir = tempfile::tempdir().unwrap();
    let p = small(tiny(), &[Check::Support]);
    let mut s = run_experiment(&p, dir.path(), &mut quiet())
        .unwrap()
        .summary;
    assert_eq!(s.exit_code(), 0);
    s.criteria.push(Criterion::within(
        "A3",
        "slope_v",
        Some(-1.0),
        Some(-1.65),
        Some(-1.35),
    ));
    assert!(!s.criteria.last().unwrap().pass);
    assert_eq!(s.exit_code(), 2);
    s.status = "aborted".into();
    assert_eq!(s.exit_code(), 3);
}

#[test]
fn criteria_bands() {
    assert!(Criterion::within("A", "x", Some(1.0), Some(1.0), Some(1.0)).pass);
    assert!(!Criterion::within("A", "x", None, None, None).pass);
    assert!(!Criterion::within("A", "x", Some(f64::NAN), None, Some(1.0)).pass);
    assert!(Criterion::within("A", "x", Some(-9.0), None, Some(0.1)).pass);
    let line = Criterion::within("A6", "reduction_mu", Some(14.2), Some(12.0), None).to_string();
    assert!(
        line.starts_with("A6 reduction_mu") && line.contains("PASS"),
        "{line}"
    );
}

#[test]
fn smoke_resolution_widens_the_linear_bands() {
    let report = DiagnosticsReport::build(Vec::new(), Vec::new(), [2.5, 3.0], [10.0, 38.0]);
    let at = |n| {
        let c = evaluate(
            &[Check::KgDecay],
            &RunConfig {
                n,
                ..RunConfig::default()
            },
            &report,
            true,
        );
        (c[0].min.unwrap(), c[0].max.unwrap(), c[0].pass)
    };
    let (lo, hi, pass) = at(REFERENCE_N);
    assert_eq!((lo, hi), (-1.65, -1.35));
    assert!(!pass);
    let (lo, hi, _) = at(96);
    assert!((lo + 1.9).abs() < 1e-12 && (hi + 1.1).abs() < 1e-12);
}

#[test]
fn refinement_runs_both_grids_for_every_set() {
    let dir = tempfile::tempdir().unwrap();
    let p = ExperimentPreset {
        name: "pair".into(),
        config: RunConfig {
            half_extent: 6.0,
            n: 17,
            t_final: 4.0,
            profile: Profile::Cap,
            schedule: Schedule::Explicit(vec![2.0]),
            transform_at: Some(2.4),
            ..tiny()
        },
        checks: vec![Check::Transform, Check::Support],
        kind: PresetKind::Refinement {
            sets: refinement_sets().into_iter().take(2).collect(),
        },
    };
    let res = run_experiment(&p, dir.path(), &mut quiet()).unwrap();
    let s = &res.summary;
    assert_eq!(s.runs.len(), 4);
    assert_eq!(s.runs[1].n, 33);
    assert_eq!(s.refinement.len(), 2);
    for row in &s.refinement {
        assert!((row.h[0] / row.h[1] - 2.0).abs() < 1e-12);
        assert!(row.residual.iter().all(|r| r.is_some_and(|r| r > 0.0)));
        assert!(row.ratio.is_some());
    }
    assert_eq!(s.criteria.iter().filter(|c| c.id == "A6").count(), 2);
    let csv = std::fs::read_to_string(dir.path().join(CONVERGENCE_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with(&CONVERGENCE_COLUMNS.join(",")));
    assert!(dir.path().join("runs/mu-n33.csv").exists());
}

#[test]
fn merged_reports_tag_rows_by_run() {
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("first"), root.path().join("second"));
    let p = small(tiny(), &[Check::Support]);
    run_experiment(&p, &a, &mut quiet()).unwrap();
    run_experiment(&p, &b, &mut quiet()).unwrap();
    let merged = merge_reports(&[&a, &b]).unwrap();
    let rows = std::fs::read_to_string(a.join(DIAGNOSTICS_FILE))
        .unwrap()
        .lines()
        .count()
        - 1;
    let lines: Vec<&str> = merged.lines().collect();
    assert_eq!(lines[0], format!("run,{}", header()));
    assert_eq!(lines.len(), 1 + 2 * rows);
    assert!(lines[1].starts_with("first,"));
    assert!(lines.last().unwrap().starts_with("second,"));

    let summary = b.join(SUMMARY_FILE);
    let text = std::fs::read_to_string(&summary).unwrap();
    std::fs::write(
        &summary,
        text.replace("\"schema_version\": 1", "\"schema_version\": 99"),
    )
    .unwrap();
    let e = merge_reports(&[&a, &b]).unwrap_err().to_string();
    assert!(e.contains("schema version Some(99)"), "{e}");
}

#[test]
fn overrides_replace_only_what_they_name() {
    let mut c = tiny();
    Overrides {
        n: Some(32),
        seed: Some(9),
        ..Overrides::default()
    }
    .apply(&mut c);
    assert_eq!((c.n, c.seed, c.epsilon, c.t_final), (32, 9, 0.01, 5.0));
}
