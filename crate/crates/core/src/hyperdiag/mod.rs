//! Diagnostics on the hyperboloids `H_s`: energies, conformal energy,
//! inequality ratios, decay monitors and exponent fits.
//!
//! Integrals are flat (`dx`) trapezoid sums over grid nodes. Every field
//! vanishes near the box boundary, so the trapezoid weights are all `h^3`.

pub mod density;
mod fit;
mod report;
mod slice;
mod stream;
mod terms;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::radius;
use crate::grid::{support_slack, FieldState};
use crate::reduce::tree_reduce;
use terms::*;

pub use fit::{fit_exponent, fit_series, FitResult, MIN_FIT_POINTS, MIN_FIT_SPAN};
pub use report::{
    conformal_inequality_check, energy_inequality_check, format_value, write_csv, write_series_csv,
    DiagnosticsReport, FitOutcome, CSV_COLUMNS, SERIES_COLUMNS,
};
pub use slice::{
    conformal_energy, decay_monitor, energy, flat_norm, hardy_ratio, l2type_check,
    sample_hyperboloid, sobolev_ratio, summarize, HyperboloidSlice, SliceNode, Tracked,
};
pub use stream::{SliceAccumulator, STREAM_LEVELS};

/// `num / den`, with `0 / 0 = 0`; a zero denominator under a nonzero numerator is inconsistent.
pub fn ratio(num: f64, den: f64) -> Result<f64> {
    if den > 0.0 {
        Ok(num / den)
    } else if num == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::Inconsistent(format!("ratio {num} / {den}")))
    }
}

fn ratio_or_nan(num: f64, den: f64) -> f64 {
    ratio(num, den).unwrap_or(f64::NAN)
}

/// Integrals on one hyperboloid. Energies are squared quantities; norms are not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub s: f64,
    pub e0_u: f64,
    pub e1_v: f64,
    pub econ_u: f64,
    pub econ_lau: [f64; 3],
    /// `E_0(u)` from the Cartesian and the rotational integrands.
    pub e0_u_alt: [f64; 2],
    /// `||Q_u||` and `||Q_v||`, the right-hand sides of the two equations.
    pub source_u: f64,
    pub source_v: f64,
    /// `E(d_alpha u)`, `E(L_a u)`, `E(L_0 u)`.
    pub boot_u: [f64; 8],
    /// `E_1` of the same derivatives of `v`.
    pub boot_v: [f64; 8],
    /// `||(s/t) u||`, `||(s/t) L_0 u||`, `||(s/t) L_a u||`.
    pub weighted_l2: [f64; 5],
    /// `||L^J u||` for `|J| <= 2`: `[]`, `[L_a]`, then `[L_a, L_b]` row-major.
    pub lj_u: [f64; 13],
    pub lj_v: [f64; 13],
    /// `||u / r||` and `||ud_a u||`.
    pub hardy: [f64; 4],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub s: f64,
    /// `sup |u| t (t - r)^(1/2)` over in-cone nodes.
    pub decay_u: f64,
    /// `sup |v| t^(3/2)` over in-cone nodes.
    pub decay_v: f64,
    /// `sup t^(3/2) |u|` and `sup t^(3/2) |v|` over the whole slice.
    pub sup_t32_u: f64,
    pub sup_t32_v: f64,
    /// `sup s t^(1/2) |d u|` over in-cone nodes.
    pub weighted_du: f64,
}

/// Everything measured on one scheduled hyperboloid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub s: f64,
    pub nodes: usize,
    pub in_cone_nodes: usize,
    pub energy: EnergyRecord,
    pub decay: DecayRecord,
    /// `sup t^(3/2)|phi| / sum_|J|<=2 ||L^J phi||`; NaN flags an inconsistent ratio.
    pub ratio_sobolev_u: f64,
    pub ratio_sobolev_v: f64,
    /// `||u/r|| / sum_a ||ud_a u||`.
    pub ratio_hardy: f64,
    /// Bound on the change of `ratio_hardy` from the nodes with `r < h/2`.
    pub hardy_uncertainty: f64,
    /// `(||(s/t)u|| + ||(s/t)L_0 u|| + sum_a ||(s/t)L_a u||) / E_con(u)^(1/2)`.
    pub ratio_l2type: f64,
    /// Transform residual at the stored level nearest `t = s`.
    pub residual: Option<f64>,
}

impl SliceRecord {
    pub(crate) fn from_terms(s: f64, terms: &Terms, h: f64, residual: Option<f64>) -> Self {
        let w = h * h * h;
        let sum = |i: usize| w * terms.sums[i];
        let norm = |i: usize| (w * terms.sums[i]).sqrt();
        let lj_u: [f64; 13] = std::array::from_fn(|k| norm(LJ_U + k));
        let lj_v: [f64; 13] = std::array::from_fn(|k| norm(LJ_V + k));
        let hardy = [
            norm(HARDY_NUM),
            norm(HARDY_DEN),
            norm(HARDY_DEN + 1),
            norm(HARDY_DEN + 2),
        ];
        let weighted_l2: [f64; 5] = std::array::from_fn(|k| norm(L2_WEIGHTED + k));
        let energy = EnergyRecord {
            s,
            e0_u: sum(E0_U),
            e1_v: sum(E1_V),
            econ_u: sum(ECON_U),
            econ_lau: std::array::from_fn(|a| sum(ECON_LAU + a)),
            e0_u_alt: [sum(E0_U_CART), sum(E0_U_ROT)],
            source_u: norm(SRC_U),
            source_v: norm(SRC_V),
            boot_u: std::array::from_fn(|k| sum(BOOT_U + k)),
            boot_v: std::array::from_fn(|k| sum(BOOT_V + k)),
            weighted_l2,
            lj_u,
            lj_v,
            hardy,
        };
        let m = &terms.max;
        let decay = DecayRecord {
            s,
            decay_u: m[DECAY_U],
            decay_v: m[DECAY_V],
            sup_t32_u: m[SUP_T32_U],
            sup_t32_v: m[SUP_T32_V],
            weighted_du: m[WEIGHTED_DU],
        };
        let hardy_den: f64 = hardy[1..].iter().sum();
        // the ball r < h/2 adds at most 4 pi (h/2) sup u^2 to ||u/r||^2
        let hardy_gap = (hardy[0].powi(2) + 2.0 * std::f64::consts::PI * h * m[HARDY_EXCLUDED])
            .sqrt()
            - hardy[0];
        Self {
            s,
            nodes: terms.sums[NODES] as usize,
            in_cone_nodes: terms.sums[IN_CONE] as usize,
            ratio_sobolev_u: ratio_or_nan(m[SUP_T32_U], lj_u.iter().sum()),
            ratio_sobolev_v: ratio_or_nan(m[SUP_T32_V], lj_v.iter().sum()),
            ratio_hardy: ratio_or_nan(hardy[0], hardy_den),
            hardy_uncertainty: ratio_or_nan(hardy_gap, hardy_den),
            ratio_l2type: ratio_or_nan(weighted_l2.iter().sum(), energy.econ_u.sqrt()),
            energy,
            decay,
            residual,
        }
    }
}

/// Cartesian-time monitors of one state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub t: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    /// `sup |u| t (t - r)^(1/2)` and `sup |v| t^(3/2)` over `r < t - 1`.
    pub decay_u: f64,
    pub decay_v: f64,
    /// Largest stored value beyond `r = t - 1 + 4h`.
    pub leak_support: f64,
    /// Largest stored value beyond `r = t - 1 + slack`.
    pub leak_slice: f64,
}

pub fn time_sample(state: &FieldState, slack: f64) -> TimeSample {
    let g = *state.grid();
    let t = state.t;
    let edge4h = t - 1.0 + support_slack(&g);
    let edge = t - 1.0 + slack;
    let fields = state.fields().map(|f| f.raw());
    let max = tree_reduce(
        g.node_count(),
        [0.0f64; 6],
        |m| {
            let node = g.node(m);
            let r = radius(&g.point(node));
            let i = g.index(node);
            let (u, v) = (fields[0][i].abs(), fields[2][i].abs());
            let mut out = [u, v, 0.0, 0.0, 0.0, 0.0];
            if r < t - 1.0 {
                out[2] = u * t * (t - r).sqrt();
                out[3] = v * t * t.sqrt();
            }
            if r > edge {
                let all = fields
                    .iter()
                    .fold(0.0f64, |a, f| crate::reduce::nan_max(a, f[i].abs()));
                out[5] = all;
                if r > edge4h {
                    out[4] = all;
                }
            }
            out
        },
        |a, b| std::array::from_fn(|k| crate::reduce::nan_max(a[k], b[k])),
    );
    TimeSample {
        t,
        sup_u: max[0],
        sup_v: max[1],
        decay_u: max[2],
        decay_v: max[3],
        leak_support: max[4],
        leak_slice: max[5],
    }
}

#[cfg(test)]
mod tests;
