//! Slice diagnostics accumulated while the solution is being integrated.
//!
//! The ring holds eight consecutive levels `tau_0..tau_7`. Nodes whose slice
//! time falls in `[tau_3, tau_4)` are interpolated from levels 2..5 with cubic
//! weights; `d_t^2` differences the rates and reaches levels 0..7.

use rayon::prelude::*;

use super::terms::{node_terms, Terms};
use super::SliceRecord;
use crate::error::{Error, Result};
use crate::geometry::radius;
use crate::grid::stencil::cubic_weights;
use crate::grid::{FieldState, FieldTag, Grid};
use crate::physics::{interpolated_jet2, residual_on_levels, CoefficientSet};
use crate::reduce::tree_reduce;
use crate::solver::{slice_radius, RunConfig};

/// Number of levels [`SliceAccumulator::process`] expects.
pub const STREAM_LEVELS: usize = 8;

struct Pending {
    s: f64,
    r_max: f64,
    cursor: usize,
    terms: Terms,
    residual: Option<f64>,
    residual_due: bool,
    started: bool,
    done: bool,
}

pub struct SliceAccumulator {
    grid: Grid,
    coefficients: CoefficientSet,
    cu: [[f64; 5]; 5],
    cv: [[f64; 5]; 5],
    /// Interior nodes ordered by radius: `(r, storage index, node number)`.
    order: Vec<(f64, usize, usize)>,
    slices: Vec<Pending>,
}

impl SliceAccumulator {
    pub fn new(grid: &Grid, config: &RunConfig, slices: Vec<f64>) -> Result<Self> {
        let slack = config.slice_slack;
        let reach = slices
            .iter()
            .map(|&s| slice_radius(s, slack))
            .fold(0.0f64, f64::max);
        let mut order: Vec<(f64, usize, usize)> = (0..grid.node_count())
            .into_par_iter()
            .filter_map(|m| {
                let node = grid.node(m);
                let r = radius(&grid.point(node));
                (r <= reach).then(|| (r, grid.index(node), m))
            })
            .collect();
        order.par_sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        let c = &config.coefficients;
        Ok(Self {
            grid: *grid,
            coefficients: c.clone(),
            cu: c.u_matrix(),
            cv: c.v_matrix(),
            order,
            slices: slices
                .into_iter()
                .map(|s| Pending {
                    s,
                    r_max: slice_radius(s, slack),
                    cursor: 0,
                    terms: Terms::ZERO,
                    residual: None,
                    residual_due: config.residual,
                    started: false,
                    done: false,
                })
                .collect(),
        })
    }

    /// Adds every node whose slice time lies in `[tau_3, tau_4)`.
    pub fn process(&mut self, levels: &[&FieldState], dt: f64) -> Result<()> {
        if levels.len() != STREAM_LEVELS {
            return Err(Error::WarmupIncomplete {
                needed: STREAM_LEVELS,
                have: levels.len(),
            });
        }
        let (tau2, tau3, tau4) = (levels[2].t, levels[3].t, levels[4].t);
        let h = self.grid.spacing();
        for p in self.slices.iter_mut() {
            if p.residual_due && (tau3 - p.s).abs() <= 0.5 * dt + 1e-12 {
                let centre = &levels[1..6];
                p.residual = Some(residual_on_levels(centre, dt, &self.coefficients)?);
                p.residual_due = false;
            }
            if p.done || tau4 <= p.s {
                continue;
            }
            if !p.started && tau3 > p.s + 1e-12 {
                return Err(Error::InsufficientHistory {
                    t: p.s,
                    start: tau3,
                    end: levels[STREAM_LEVELS - 1].t,
                });
            }
            p.started = true;
            let r_hi2 = tau4 * tau4 - p.s * p.s;
            let start = p.cursor;
            let mut end = start;
            while end < self.order.len() {
                let r = self.order[end].0;
                if r > p.r_max {
                    p.done = true;
                    break;
                }
                if r * r >= r_hi2 {
                    break;
                }
                end += 1;
            }
            if end == self.order.len() {
                p.done = true;
            }
            let (s, cu, cv, order) = (p.s, &self.cu, &self.cv, &self.order[start..end]);
            let part = tree_reduce(
                order.len(),
                Terms::ZERO,
                |k| {
                    let (r, i, m) = order[k];
                    let x = self.grid.point(self.grid.node(m));
                    let t = (s * s + r * r).sqrt();
                    let w = cubic_weights(tau2, dt, t);
                    let u = interpolated_jet2(levels, 2, &w, FieldTag::U, i, dt);
                    let v = interpolated_jet2(levels, 2, &w, FieldTag::V, i, dt);
                    node_terms(&x, t, s, &u, &v, cu, cv, h)
                },
                Terms::combine,
            );
            p.terms = p.terms.combine(part);
            p.cursor = end;
        }
        Ok(())
    }

    /// Largest `s` whose slice is complete.
    pub fn completed_s_max(&self) -> f64 {
        self.slices
            .iter()
            .take_while(|p| p.done)
            .last()
            .map_or(f64::NAN, |p| p.s)
    }

    /// Records of the completed slices, in schedule order.
    pub fn finish(self) -> Vec<SliceRecord> {
        let h = self.grid.spacing();
        self.slices
            .into_iter()
            .filter(|p| p.done)
            .map(|p| SliceRecord::from_terms(p.s, &p.terms, h, p.residual))
            .collect()
    }
}
