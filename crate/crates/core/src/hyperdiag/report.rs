//! Inequality margins, fitted exponents and the per-run CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{fit_series, FitResult, SliceRecord, TimeSample};
use crate::error::{Error, Result};

/// Header of the per-slice CSV.
pub const CSV_COLUMNS: [&str; 14] = [
    "s",
    "E0_u",
    "E1_v",
    "Econ_u",
    "Econ_Lau",
    "decay_u",
    "decay_v",
    "ratio_sobolev",
    "ratio_hardy",
    "ratio_l2type",
    "margin_energy_u",
    "margin_energy_v",
    "margin_conformal",
    "res_transform",
];

pub const SERIES_COLUMNS: [&str; 7] = [
    "t",
    "sup_u",
    "sup_v",
    "decay_u",
    "decay_v",
    "leak_support",
    "leak_slice",
];

/// `(LHS - RHS) / RHS` with `LHS = E(s)^(1/2)` and `RHS = E(s_0)^(1/2) + int_{s_0}^s w(s') ||f|| ds'`.
fn margins(s: &[f64], energy: &[f64], source: &[f64], weight: impl Fn(f64) -> f64) -> Vec<f64> {
    assert!(s.len() == energy.len() && s.len() == source.len());
    let Some(&e0) = energy.first() else {
        return Vec::new();
    };
    let base = e0.sqrt();
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(s.len());
    for k in 0..s.len() {
        if k > 0 {
            let (a, b) = (weight(s[k - 1]) * source[k - 1], weight(s[k]) * source[k]);
            integral += 0.5 * (s[k] - s[k - 1]) * (a + b);
        }
        let rhs = base + integral;
        let lhs = energy[k].sqrt();
        out.push(if rhs > 0.0 {
            (lhs - rhs) / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    out
}

/// Relative margins of the energy inequality `E_m(s)^(1/2) <= E_m(s0)^(1/2) + int ||-box phi + m^2 phi|| ds'`.
///
/// `source[k]` is the flat L2 norm of the equation's right-hand side on `H_{s[k]}`;
/// the integral is a trapezoid over the schedule.
pub fn energy_inequality_check(s: &[f64], energy: &[f64], source: &[f64]) -> Vec<f64> {
    margins(s, energy, source, |_| 1.0)
}

/// Relative margins of `E_con(s)^(1/2) <= E_con(s0)^(1/2) + 2 int s' ||box u|| ds'`.
pub fn conformal_inequality_check(s: &[f64], energy: &[f64], source: &[f64]) -> Vec<f64> {
    margins(s, energy, source, |s| 2.0 * s)
}

/// A fit, or why there is none.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitOutcome {
    Fit(FitResult),
    Unavailable(String),
}

impl FitOutcome {
    pub fn slope(&self) -> Option<f64> {
        match self {
            FitOutcome::Fit(f) => Some(f.slope),
            FitOutcome::Unavailable(_) => None,
        }
    }
}

impl From<Result<FitResult>> for FitOutcome {
    fn from(r: Result<FitResult>) -> Self {
        match r {
            Ok(f) => FitOutcome::Fit(f),
            Err(e) => FitOutcome::Unavailable(e.to_string()),
        }
    }
}

/// Per-slice records, margins, Cartesian series and fitted exponents of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub slices: Vec<SliceRecord>,
    pub margin_energy_u: Vec<f64>,
    pub margin_energy_v: Vec<f64>,
    pub margin_conformal: Vec<f64>,
    pub series: Vec<TimeSample>,
    pub fits: BTreeMap<String, FitOutcome>,
}

const BOOT_NAMES: [&str; 8] = ["d0", "d1", "d2", "d3", "L1", "L2", "L3", "L0"];

impl DiagnosticsReport {
    /// Margins from the records, fits over `s_window` (slices) and `t_window` (series).
    pub fn build(
        slices: Vec<SliceRecord>,
        series: Vec<TimeSample>,
        s_window: [f64; 2],
        t_window: [f64; 2],
    ) -> Self {
        let s: Vec<f64> = slices.iter().map(|r| r.s).collect();
        let col = |f: &dyn Fn(&SliceRecord) -> f64| slices.iter().map(f).collect::<Vec<f64>>();
        let margin_energy_u =
            energy_inequality_check(&s, &col(&|r| r.energy.e0_u), &col(&|r| r.energy.source_u));
        let margin_energy_v =
            energy_inequality_check(&s, &col(&|r| r.energy.e1_v), &col(&|r| r.energy.source_v));
        let margin_conformal = conformal_inequality_check(
            &s,
            &col(&|r| r.energy.econ_u),
            &col(&|r| r.energy.source_u),
        );

        let mut fits = BTreeMap::new();
        let mut on_s = |name: String, y: &dyn Fn(&SliceRecord) -> f64| {
            fits.insert(name, fit_series(&slices, |r| r.s, y, s_window).into());
        };
        on_s("E0_u".into(), &|r| r.energy.e0_u);
        on_s("E1_v".into(), &|r| r.energy.e1_v);
        on_s("Econ_u".into(), &|r| r.energy.econ_u);
        on_s("Econ_Lau".into(), &|r| r.energy.econ_lau.iter().sum());
        for (k, name) in BOOT_NAMES.iter().enumerate() {
            on_s(format!("E_{name}u"), &|r| r.energy.boot_u[k]);
            on_s(format!("E1_{name}v"), &|r| r.energy.boot_v[k]);
        }
        on_s("decay_u_s".into(), &|r| r.decay.decay_u);
        on_s("decay_v_s".into(), &|r| r.decay.decay_v);
        on_s("weighted_du_s".into(), &|r| r.decay.weighted_du);
        on_s("ratio_sobolev_u".into(), &|r| r.ratio_sobolev_u);
        on_s("ratio_sobolev_v".into(), &|r| r.ratio_sobolev_v);
        on_s("ratio_hardy".into(), &|r| r.ratio_hardy);
        on_s("ratio_l2type".into(), &|r| r.ratio_l2type);

        let mut on_t = |name: &str, y: &dyn Fn(&TimeSample) -> f64| {
            fits.insert(
                name.to_string(),
                fit_series(&series, |p| p.t, y, t_window).into(),
            );
        };
        on_t("sup_u_t", &|p| p.sup_u);
        on_t("sup_v_t", &|p| p.sup_v);
        on_t("decay_u_t", &|p| p.decay_u);
        on_t("decay_v_t", &|p| p.decay_v);

        Self {
            slices,
            margin_energy_u,
            margin_energy_v,
            margin_conformal,
            series,
            fits,
        }
    }

    pub fn slope(&self, name: &str) -> Option<f64> {
        self.fits.get(name).and_then(FitOutcome::slope)
    }

    /// The per-slice CSV, one row per scheduled hyperboloid.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for (k, r) in self.slices.iter().enumerate() {
            let row = [
                r.s,
                r.energy.e0_u,
                r.energy.e1_v,
                r.energy.econ_u,
                r.energy.econ_lau.iter().sum(),
                r.decay.decay_u,
                r.decay.decay_v,
                r.ratio_sobolev_v,
                r.ratio_hardy,
                r.ratio_l2type,
                self.margin_energy_u[k],
                self.margin_energy_v[k],
                self.margin_conformal[k],
                r.residual.unwrap_or(f64::NAN),
            ];
            push_row(&mut out, &row);
        }
        out
    }

    /// The Cartesian-time series, one row per step.
    pub fn series_csv(&self) -> String {
        let mut out = SERIES_COLUMNS.join(",");
        out.push('\n');
        for p in &self.series {
            push_row(
                &mut out,
                &[
                    p.t,
                    p.sup_u,
                    p.sup_v,
                    p.decay_u,
                    p.decay_v,
                    p.leak_support,
                    p.leak_slice,
                ],
            );
        }
        out
    }
}

/// 17 significant digits, which round-trips every `f64`.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn push_row(out: &mut String, row: &[f64]) {
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", format_value(*v));
    }
    out.push('\n');
}

pub fn write_csv(path: &Path, report: &DiagnosticsReport) -> Result<()> {
    std::fs::write(path, report.to_csv()).map_err(|e| Error::io(path, e))
}

pub fn write_series_csv(path: &Path, report: &DiagnosticsReport) -> Result<()> {
    std::fs::write(path, report.series_csv()).map_err(|e| Error::io(path, e))
}
