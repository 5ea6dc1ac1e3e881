//! Materialized hyperboloid slices, sampled from a stored history.
//!
//! A slice keeps the 2-jets of `u` and `v` at every node of the slab
//! `r <= t - 1 + slack`; nodes beyond it are zero by the support invariant.
//! This costs two jets per node, so long runs use [`super::SliceAccumulator`]
//! instead, which evaluates the same per-node terms without storing them.

use rayon::prelude::*;

use super::density::{conformal_density, energy_density};
use super::terms::{node_terms, Terms};
use super::{ratio, DecayRecord, SliceRecord};
use crate::error::{Error, Result};
use crate::geometry::radius;
use crate::grid::stencil::cubic_weights;
use crate::grid::{FieldState, FieldTag, Grid, TimeHistory};
use crate::physics::{interpolated_jet2, jet, CoefficientSet, Jet1, Jet2};
use crate::reduce::{max_by, sum_by, tree_reduce};
use crate::solver::slice_radius;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceNode {
    /// Storage index in the grid.
    pub index: usize,
    pub x: [f64; 3],
    /// `t = sqrt(s^2 + r^2)`.
    pub t: f64,
    pub u: Jet2,
    pub v: Jet2,
}

impl SliceNode {
    pub fn r(&self) -> f64 {
        radius(&self.x)
    }

    /// Inside `K = {r < t - 1}`.
    pub fn in_cone(&self) -> bool {
        self.r() < self.t - 1.0
    }
}

#[derive(Clone, Debug)]
pub struct HyperboloidSlice {
    pub s: f64,
    pub grid: Grid,
    pub nodes: Vec<SliceNode>,
    cu: [[f64; 5]; 5],
    cv: [[f64; 5]; 5],
}

/// Fields whose 1-jets can be read off a slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tracked {
    U,
    V,
    /// `U = u + Q_u`.
    Transformed,
    PartialU(usize),
    PartialV(usize),
    BoostU(usize),
    BoostV(usize),
    ScalingU,
    ScalingV,
}

impl HyperboloidSlice {
    pub fn jet(&self, node: &SliceNode, field: Tracked) -> Jet1 {
        let (t, x) = (node.t, &node.x);
        match field {
            Tracked::U => node.u.jet1(),
            Tracked::V => node.v.jet1(),
            Tracked::Transformed => {
                let q = jet::source_jet(&self.cu, &node.u, &node.v);
                let u = node.u.jet1();
                Jet1::new(u.value + q.value, std::array::from_fn(|a| u.d[a] + q.d[a]))
            }
            Tracked::PartialU(alpha) => node.u.partial(alpha),
            Tracked::PartialV(alpha) => node.v.partial(alpha),
            Tracked::BoostU(a) => node.u.boost(a, t, x),
            Tracked::BoostV(a) => node.v.boost(a, t, x),
            Tracked::ScalingU => node.u.scaling(t, x),
            Tracked::ScalingV => node.v.scaling(t, x),
        }
    }

    fn sum(&self, f: impl Fn(&SliceNode) -> f64 + Sync) -> f64 {
        let h = self.grid.spacing();
        h * h * h * sum_by(self.nodes.len(), |k| f(&self.nodes[k]))
    }

    fn check(&self, field: Tracked) -> Result<()> {
        let ok = match field {
            Tracked::PartialU(a) | Tracked::PartialV(a) => a <= 3,
            Tracked::BoostU(a) | Tracked::BoostV(a) => (1..=3).contains(&a),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "no such tracked field: {field:?}"
            )))
        }
    }
}

/// Resamples `history` onto `H_s` by cubic interpolation in time at every node.
///
/// Every node of the slab `r <= t - 1 + slack` needs four levels around its
/// slice time plus two more on each side for `d_t^2`.
pub fn sample_hyperboloid(
    history: &TimeHistory,
    s: f64,
    slack: f64,
    c: &CoefficientSet,
) -> Result<HyperboloidSlice> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "hyperbolic time must be positive, got {s}"
        )));
    }
    let grid = *history
        .grid()
        .ok_or(Error::WarmupIncomplete { needed: 8, have: 0 })?;
    let (start, end) = history.time_range().expect("nonempty history");
    let dt = history.dt();
    let levels: Vec<&FieldState> = history.levels().collect();
    let r_max = slice_radius(s, slack);
    let first_t = start + 3.0 * dt;
    let last_t = end - 3.0 * dt;
    let found: Vec<Result<Option<SliceNode>>> = (0..grid.node_count())
        .into_par_iter()
        .map(|m| {
            let node = grid.node(m);
            let x = grid.point(node);
            let r = radius(&x);
            if r > r_max {
                return Ok(None);
            }
            let t = (s * s + r * r).sqrt();
            if t < first_t - 1e-12 || t > last_t + 1e-12 {
                return Err(Error::InsufficientHistory {
                    t,
                    start: first_t,
                    end: last_t,
                });
            }
            // four levels first..first+3 bracketing t, clamped so that the
            // stencil of d_t^2 stays inside the history
            let k = ((t - start) / dt).floor() as usize;
            let first = k.saturating_sub(1).clamp(2, levels.len() - 6);
            let w = cubic_weights(levels[first].t, dt, t);
            let i = grid.index(node);
            Ok(Some(SliceNode {
                index: i,
                x,
                t,
                u: interpolated_jet2(&levels, first, &w, FieldTag::U, i, dt),
                v: interpolated_jet2(&levels, first, &w, FieldTag::V, i, dt),
            }))
        })
        .collect();
    let mut nodes = Vec::new();
    for n in found {
        if let Some(n) = n? {
            nodes.push(n);
        }
    }
    Ok(HyperboloidSlice {
        s,
        grid,
        nodes,
        cu: c.u_matrix(),
        cv: c.v_matrix(),
    })
}

/// `E_m(s, phi)` from the `((s/t) d_t phi)^2 + sum_a (ud_a phi)^2 + m^2 phi^2` integrand.
pub fn energy(slice: &HyperboloidSlice, field: Tracked, m: f64) -> Result<f64> {
    slice.check(field)?;
    let s = slice.s;
    Ok(slice.sum(|n| energy_density(&slice.jet(n, field), n.t, &n.x, s, m)))
}

/// `E_con(s, phi)`.
pub fn conformal_energy(slice: &HyperboloidSlice, field: Tracked) -> Result<f64> {
    slice.check(field)?;
    let s = slice.s;
    Ok(slice.sum(|n| conformal_density(&slice.jet(n, field), n.t, &n.x, s)))
}

/// `int |expr|^p dx` over the slice, then the `p`-th root; `p` is 1 or 2.
pub fn flat_norm<F>(slice: &HyperboloidSlice, expr: F, p: u32) -> Result<f64>
where
    F: Fn(&HyperboloidSlice, &SliceNode) -> f64 + Sync,
{
    match p {
        1 => Ok(slice.sum(|n| expr(slice, n).abs())),
        2 => Ok(slice.sum(|n| expr(slice, n).powi(2)).sqrt()),
        _ => Err(Error::InvalidArgument(format!(
            "flat norm exponent must be 1 or 2, got {p}"
        ))),
    }
}

/// `(||(s/t)u|| + ||(s/t)L_0 u|| + sum_a ||(s/t)L_a u||) / E_con(u)^(1/2)`.
pub fn l2type_check(slice: &HyperboloidSlice) -> Result<f64> {
    let s = slice.s;
    let weighted =
        |field: Tracked| flat_norm(slice, move |sl, n| s / n.t * sl.jet(n, field).value, 2);
    let mut lhs = weighted(Tracked::U)? + weighted(Tracked::ScalingU)?;
    for a in 1..=3 {
        lhs += weighted(Tracked::BoostU(a))?;
    }
    ratio(lhs, conformal_energy(slice, Tracked::U)?.sqrt())
}

/// `sup t^(3/2)|phi| / sum_{|J|<=2} ||L^J phi||` for `phi` = `u` or `v`.
pub fn sobolev_ratio(slice: &HyperboloidSlice, field: FieldTag) -> Result<f64> {
    let pick = match field {
        FieldTag::U => |n: &SliceNode| n.u,
        FieldTag::V => |n: &SliceNode| n.v,
        other => {
            return Err(Error::InvalidArgument(format!(
                "Sobolev ratio needs u or v, got {}",
                other.name()
            )))
        }
    };
    let sup = max_by(slice.nodes.len(), |k| {
        let n = &slice.nodes[k];
        n.t * n.t.sqrt() * pick(n).value.abs()
    });
    let mut den = flat_norm(slice, |_, n| pick(n).value, 2)?;
    for a in 1..=3 {
        den += flat_norm(slice, |_, n| pick(n).boost(a, n.t, &n.x).value, 2)?;
        for b in 1..=3 {
            den += flat_norm(
                slice,
                |_, n| pick(n).boost(b, n.t, &n.x).boost(a, n.t, &n.x),
                2,
            )?;
        }
    }
    ratio(sup, den)
}

/// `||u / r|| / sum_a ||ud_a u||`, leaving out nodes with `r < h/2`.
pub fn hardy_ratio(slice: &HyperboloidSlice) -> Result<f64> {
    let cut = 0.5 * slice.grid.spacing();
    let num = flat_norm(
        slice,
        |_, n| {
            let r = n.r();
            if r < cut {
                0.0
            } else {
                n.u.value / r
            }
        },
        2,
    )?;
    let mut den = 0.0;
    for a in 1..=3 {
        den += flat_norm(slice, |_, n| n.u.jet1().semi(a, n.t, &n.x), 2)?;
    }
    ratio(num, den)
}

/// Weighted sups of `u`, `v` and `d u` over the in-cone nodes.
pub fn decay_monitor(slice: &HyperboloidSlice) -> DecayRecord {
    summarize(slice, None).decay
}

/// The full per-slice record, identical in content to the streaming one.
pub fn summarize(slice: &HyperboloidSlice, residual: Option<f64>) -> SliceRecord {
    let h = slice.grid.spacing();
    let s = slice.s;
    let terms = tree_reduce(
        slice.nodes.len(),
        Terms::ZERO,
        |k| {
            let n = &slice.nodes[k];
            node_terms(&n.x, n.t, s, &n.u, &n.v, &slice.cu, &slice.cv, h)
        },
        Terms::combine,
    );
    SliceRecord::from_terms(s, &terms, h, residual)
}
