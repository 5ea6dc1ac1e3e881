//! Run orchestration: presets, configuration files, artifacts and pass/fail summaries.

mod config_file;
mod merge;
mod presets;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperdiag::{write_csv, write_series_csv, DiagnosticsReport};
use crate::oracle::{calibration_suite, identity_suite, CalibrationSetup, MIN_POINTS};
use crate::reduce::nan_max;
use crate::solver::{run_with, EvolutionOutcome, Observer, Progress, RunConfig, RunStatus};

pub use config_file::{emit_config, parse_config, parse_config_str, KEYS};
pub use merge::merge_reports;
pub use presets::{
    preset, preset_names, refinement_config, refinement_sets, Check, ExperimentPreset, PresetKind,
    REFERENCE_N,
};

/// Version of the `summary.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const SERIES_FILE: &str = "series.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PROGRESS_FILE: &str = "progress.log";
pub const CONFIG_FILE: &str = "config.cfg";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

/// Widening of the linear-decay bands below the reference resolution.
pub const SMOKE_WIDENING: f64 = 0.25;
pub const MAX_IDENTITY_RESIDUAL: f64 = 1e-11;
pub const MIN_ORDER: f64 = 3.5;
pub const MIN_REDUCTION: f64 = 12.0;
pub const MAX_MARGIN: f64 = 0.02;
pub const MAX_RATIO_SLOPE: f64 = 0.1;

/// Command-line overrides of a preset or file configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub t_final: Option<f64>,
    pub epsilon: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(t) = self.t_final {
            config.t_final = t;
        }
        if let Some(e) = self.epsilon {
            config.epsilon = e;
        }
        if let Some(n) = self.n {
            config.n = n;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
    }
}

/// Caps the rayon pool at `HWKG_THREADS` if set; returns the pool size.
pub fn configure_threads() -> Result<usize> {
    if let Ok(v) = std::env::var("HWKG_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "HWKG_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        // a second call finds the pool already built, which is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(rayon::current_num_threads())
}

/// One acceptance check with its measured value and admissible band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    pub value: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub pass: bool,
}

impl Criterion {
    /// Passes when `value` exists and lies in `[min, max]`.
    pub fn within(
        id: &str,
        name: impl Into<String>,
        value: Option<f64>,
        min: Option<f64>,
        max: Option<f64>,
    ) -> Self {
        let pass = value.is_some_and(|v| min.is_none_or(|m| v >= m) && max.is_none_or(|m| v <= m));
        Self {
            id: id.into(),
            name: name.into(),
            value,
            min,
            max,
            pass,
        }
    }

    pub fn flag(id: &str, name: impl Into<String>, pass: bool) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            value: Some(if pass { 1.0 } else { 0.0 }),
            min: Some(1.0),
            max: None,
            pass,
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4e}"));
        write!(
            f,
            "{} {:<32} {} value={} band=[{}, {}]",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            num(self.value),
            num(self.min),
            num(self.max)
        )
    }
}

/// Bookkeeping of one solver run inside an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub label: String,
    pub n: usize,
    #[serde(flatten)]
    pub status: RunStatus,
    pub steps: usize,
    pub t_end: f64,
    pub dt: f64,
    pub support_ok: bool,
    pub wall_time_s: f64,
}

impl RunInfo {
    fn new(label: String, config: &RunConfig, out: &EvolutionOutcome) -> Self {
        Self {
            label,
            n: config.n,
            status: out.status.clone(),
            steps: out.steps,
            t_end: out.t_end,
            dt: out.dt,
            support_ok: out.support_ok,
            wall_time_s: out.wall_time.as_secs_f64(),
        }
    }
}

/// Largest relative margins of the three inequality checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxMargins {
    pub energy_u: Option<f64>,
    pub energy_v: Option<f64>,
    pub conformal: Option<f64>,
}

/// One coefficient set of the transform refinement study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub set: String,
    pub h: [f64; 2],
    pub dt: [f64; 2],
    pub residual: [Option<f64>; 2],
    pub ratio: Option<f64>,
    pub order: Option<f64>,
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub preset: String,
    /// `completed` only if every run completed.
    pub status: String,
    pub reason: Option<String>,
    pub runs: Vec<RunInfo>,
    pub fits: BTreeMap<String, Option<f64>>,
    pub max_margins: Option<MaxMargins>,
    pub max_residual: Option<f64>,
    pub refinement: Vec<RefinementRow>,
    pub criteria: Vec<Criterion>,
    pub pass: bool,
    pub threads: usize,
    pub wall_time_s: f64,
    pub config: RunConfig,
}

impl Summary {
    /// 0 if everything passed, 3 if a run aborted, 2 if a criterion failed.
    pub fn exit_code(&self) -> i32 {
        if self.status != "completed" {
            3
        } else if self.criteria.iter().all(|c| c.pass) {
            0
        } else {
            2
        }
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Inconsistent(format!("{}: {e}", path.display())))?;
        let version = value.get("schema_version").and_then(|v| v.as_u64());
        if version != Some(SCHEMA_VERSION as u64) {
            return Err(Error::Inconsistent(format!(
                "{}: schema version {version:?}, expected {SCHEMA_VERSION}",
                path.display()
            )));
        }
        serde_json::from_value(value)
            .map_err(|e| Error::Inconsistent(format!("{}: {e}", path.display())))
    }
}

/// Artifacts of a finished experiment.
#[derive(Debug)]
pub struct ExperimentResult {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

/// Writes every progress line to the log file and to `sink`.
struct ProgressLog<'a> {
    file: BufWriter<File>,
    path: PathBuf,
    prefix: String,
    sink: &'a mut dyn FnMut(&str),
    failed: Option<std::io::Error>,
}

impl ProgressLog<'_> {
    fn line(&mut self, text: &str) {
        let line = format!("{}{text}", self.prefix);
        (self.sink)(&line);
        if self.failed.is_none() {
            if let Err(e) = writeln!(self.file, "{line}").and_then(|_| self.file.flush()) {
                self.failed = Some(e);
            }
        }
    }

    fn finish(mut self) -> Result<()> {
        match self.failed.take() {
            Some(e) => Err(Error::io(&self.path, e)),
            None => self.file.flush().map_err(|e| Error::io(&self.path, e)),
        }
    }
}

impl Observer for ProgressLog<'_> {
    fn progress(&mut self, p: &Progress) {
        self.line(&p.to_string());
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn fits_of(report: &DiagnosticsReport) -> BTreeMap<String, Option<f64>> {
    report
        .fits
        .iter()
        .map(|(k, f)| (k.clone(), f.slope()))
        .collect()
}

fn max_of(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().copied().fold(f64::NEG_INFINITY, nan_max))
}

/// Fitted monitors of the bootstrap check: energies of u and v at orders 0 and 1.
const BOOTSTRAP_FITS: [&str; 18] = [
    "E0_u", "E_d0u", "E_d1u", "E_d2u", "E_d3u", "E_L1u", "E_L2u", "E_L3u", "E_L0u", "E1_v",
    "E1_d0v", "E1_d1v", "E1_d2v", "E1_d3v", "E1_L1v", "E1_L2v", "E1_L3v", "E1_L0v",
];

/// The criteria of `checks` that a single run can decide.
pub fn evaluate(
    checks: &[Check],
    config: &RunConfig,
    report: &DiagnosticsReport,
    support_ok: bool,
) -> Vec<Criterion> {
    let widen = if config.n < REFERENCE_N {
        SMOKE_WIDENING
    } else {
        0.0
    };
    let slope = |name: &str| report.slope(name);
    let margins = MaxMargins {
        energy_u: max_of(&report.margin_energy_u),
        energy_v: max_of(&report.margin_energy_v),
        conformal: max_of(&report.margin_conformal),
    };
    let mut out = Vec::new();
    for check in checks {
        match check {
            Check::WaveDecay => out.push(Criterion::within(
                "A3",
                "slope_decay_u",
                slope("decay_u_t"),
                Some(-0.15 - widen),
                Some(0.15 + widen),
            )),
            Check::KgDecay => out.push(Criterion::within(
                "A3",
                "slope_v",
                slope("sup_v_t"),
                Some(-1.65 - widen),
                Some(-1.35 + widen),
            )),
            Check::Bootstrap => {
                for (name, fit) in [
                    ("slope_decay_u", "decay_u_t"),
                    ("slope_decay_v", "decay_v_t"),
                ] {
                    out.push(Criterion::within(
                        "A4",
                        name,
                        slope(fit),
                        Some(-0.2),
                        Some(0.2),
                    ));
                }
                for fit in BOOTSTRAP_FITS {
                    out.push(Criterion::within(
                        "A4",
                        format!("slope_{fit}"),
                        slope(fit),
                        None,
                        Some(0.15),
                    ));
                }
                out.push(Criterion::within(
                    "A4",
                    "slope_Econ_u",
                    slope("Econ_u"),
                    None,
                    Some(0.65),
                ));
            }
            Check::Margins => {
                for (name, m) in [
                    ("max_margin_energy_u", margins.energy_u),
                    ("max_margin_energy_v", margins.energy_v),
                    ("max_margin_conformal", margins.conformal),
                ] {
                    out.push(Criterion::within("A5", name, m, None, Some(MAX_MARGIN)));
                }
                for fit in [
                    "ratio_sobolev_u",
                    "ratio_sobolev_v",
                    "ratio_hardy",
                    "ratio_l2type",
                ] {
                    out.push(Criterion::within(
                        "A5",
                        format!("slope_{fit}"),
                        slope(fit),
                        None,
                        Some(MAX_RATIO_SLOPE),
                    ));
                }
            }
            Check::Support => out.push(Criterion::flag("A7", "support", support_ok)),
            Check::Transform => {}
        }
    }
    out
}

fn status_of(runs: &[RunInfo]) -> (String, Option<String>) {
    match runs.iter().find(|r| !r.status.is_completed()) {
        Some(RunInfo {
            label,
            status: RunStatus::Aborted { reason },
            ..
        }) => ("aborted".into(), Some(format!("{label}: {reason}"))),
        _ => ("completed".into(), None),
    }
}

fn finish(out: &Path, summary: Summary, mut files: Vec<PathBuf>) -> Result<ExperimentResult> {
    let path = out.join(SUMMARY_FILE);
    let mut text =
        serde_json::to_string_pretty(&summary).map_err(|e| Error::Inconsistent(e.to_string()))?;
    text.push('\n');
    write_file(&path, &text)?;
    files.push(path);
    Ok(ExperimentResult { summary, files })
}

/// Runs `preset` and writes its artifacts under `out`; `sink` receives every progress line.
pub fn run_experiment(
    preset: &ExperimentPreset,
    out: &Path,
    sink: &mut dyn FnMut(&str),
) -> Result<ExperimentResult> {
    preset.config.validate()?;
    let started = Instant::now();
    let threads = rayon::current_num_threads();
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let config_path = out.join(CONFIG_FILE);
    write_file(&config_path, &emit_config(&preset.config))?;
    let log_path = out.join(PROGRESS_FILE);
    let mut log = ProgressLog {
        file: BufWriter::new(create(&log_path)?),
        path: log_path.clone(),
        prefix: String::new(),
        sink,
        failed: None,
    };
    let mut files = vec![config_path, log_path];

    match &preset.kind {
        PresetKind::Single => {
            let config = &preset.config;
            let outcome = run_with(config, &mut log)?;
            if let RunStatus::Aborted { reason } = &outcome.status {
                log.line(&format!("aborted: {reason}"));
            }
            log.finish()?;
            let info = RunInfo::new(preset.name.clone(), config, &outcome);
            let support_ok = outcome.support_ok;
            let report = DiagnosticsReport::build(
                outcome.slices,
                outcome.series,
                config.fit_window_s()?,
                config.decay_window,
            );
            for (name, write) in [
                (
                    DIAGNOSTICS_FILE,
                    write_csv as fn(&Path, &DiagnosticsReport) -> Result<()>,
                ),
                (SERIES_FILE, write_series_csv),
            ] {
                let path = out.join(name);
                write(&path, &report)?;
                files.push(path);
            }
            let criteria = evaluate(&preset.checks, config, &report, support_ok);
            let runs = vec![info];
            let (status, reason) = status_of(&runs);
            let residuals: Vec<f64> = report.slices.iter().filter_map(|r| r.residual).collect();
            let summary = Summary {
                schema_version: SCHEMA_VERSION,
                preset: preset.name.clone(),
                pass: status == "completed" && criteria.iter().all(|c| c.pass),
                status,
                reason,
                runs,
                fits: fits_of(&report),
                max_margins: Some(MaxMargins {
                    energy_u: max_of(&report.margin_energy_u),
                    energy_v: max_of(&report.margin_energy_v),
                    conformal: max_of(&report.margin_conformal),
                }),
                max_residual: max_of(&residuals),
                refinement: Vec::new(),
                criteria,
                threads,
                wall_time_s: started.elapsed().as_secs_f64(),
                config: config.clone(),
            };
            finish(out, summary, files)
        }
        PresetKind::Refinement { sets } => {
            let run_dir = out.join("runs");
            std::fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;
            let mut runs = Vec::new();
            let mut rows = Vec::new();
            let mut support_ok = true;
            for (name, coefficients) in sets {
                let mut row = RefinementRow {
                    set: name.clone(),
                    h: [0.0; 2],
                    dt: [0.0; 2],
                    residual: [None; 2],
                    ratio: None,
                    order: None,
                };
                for (k, n) in [preset.config.n, 2 * preset.config.n - 1]
                    .into_iter()
                    .enumerate()
                {
                    let config = RunConfig {
                        n,
                        coefficients: coefficients.clone(),
                        ..preset.config.clone()
                    };
                    let label = format!("{name}-n{n}");
                    log.prefix = format!("[{label}] ");
                    let outcome = run_with(&config, &mut log)?;
                    if let RunStatus::Aborted { reason } = &outcome.status {
                        log.line(&format!("aborted: {reason}"));
                    }
                    support_ok &= outcome.support_ok;
                    runs.push(RunInfo::new(label.clone(), &config, &outcome));
                    row.h[k] = config.grid()?.spacing();
                    row.dt[k] = outcome.dt;
                    row.residual[k] = outcome
                        .transform_residual
                        .or_else(|| outcome.slices.first().and_then(|r| r.residual));
                    let report = DiagnosticsReport::build(
                        outcome.slices,
                        outcome.series,
                        config.fit_window_s()?,
                        config.decay_window,
                    );
                    let path = run_dir.join(format!("{label}.csv"));
                    write_csv(&path, &report)?;
                    files.push(path);
                }
                if let [Some(a), Some(b)] = row.residual {
                    row.ratio = Some(a / b);
                    row.order = Some((a / b).log2());
                }
                rows.push(row);
            }
            log.prefix.clear();
            log.finish()?;
            let path = out.join(CONVERGENCE_FILE);
            write_file(&path, &convergence_csv(&rows))?;
            files.push(path);
            let mut criteria: Vec<Criterion> = rows
                .iter()
                .map(|r| {
                    Criterion::within(
                        "A6",
                        format!("reduction_{}", r.set),
                        r.ratio,
                        Some(MIN_REDUCTION),
                        None,
                    )
                })
                .collect();
            if preset.checks.contains(&Check::Support) {
                criteria.push(Criterion::flag("A7", "support", support_ok));
            }
            let (status, reason) = status_of(&runs);
            let max_residual = rows
                .iter()
                .flat_map(|r| r.residual.iter().flatten().copied())
                .fold(None, |m: Option<f64>, v| {
                    Some(m.map_or(v, |m| nan_max(m, v)))
                });
            let summary = Summary {
                schema_version: SCHEMA_VERSION,
                preset: preset.name.clone(),
                pass: status == "completed" && criteria.iter().all(|c| c.pass),
                status,
                reason,
                runs,
                fits: BTreeMap::new(),
                max_margins: None,
                max_residual,
                refinement: rows,
                criteria,
                threads,
                wall_time_s: started.elapsed().as_secs_f64(),
                config: preset.config.clone(),
            };
            finish(out, summary, files)
        }
    }
}

/// Header of `convergence.csv`.
pub const CONVERGENCE_COLUMNS: [&str; 9] = [
    "set",
    "h_coarse",
    "h_fine",
    "dt_coarse",
    "dt_fine",
    "res_coarse",
    "res_fine",
    "ratio",
    "order",
];

pub fn convergence_csv(rows: &[RefinementRow]) -> String {
    use crate::hyperdiag::format_value;
    let opt = |v: Option<f64>| format_value(v.unwrap_or(f64::NAN));
    let mut out = CONVERGENCE_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let cells = [
            r.set.clone(),
            format_value(r.h[0]),
            format_value(r.h[1]),
            format_value(r.dt[0]),
            format_value(r.dt[1]),
            opt(r.residual[0]),
            opt(r.residual[1]),
            opt(r.ratio),
            opt(r.order),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// The identity suite as criteria, one per identity.
pub fn identity_criteria(points: usize, seed: u64) -> Result<Vec<Criterion>> {
    Ok(identity_suite(points.max(MIN_POINTS), seed)?
        .into_iter()
        .map(|r| {
            Criterion::within(
                "A1",
                r.id,
                Some(r.max_residual),
                None,
                Some(MAX_IDENTITY_RESIDUAL),
            )
        })
        .collect())
}

/// Observed orders of every discrete operator as criteria; exact operators pass outright.
pub fn calibration_criteria(setup: &CalibrationSetup) -> Result<Vec<Criterion>> {
    Ok(calibration_suite(setup)?
        .into_iter()
        .map(|c| {
            if c.exact {
                Criterion::flag("A2", format!("{} (exact)", c.op), true)
            } else {
                Criterion::within("A2", c.op, Some(c.order), Some(MIN_ORDER), None)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests;
