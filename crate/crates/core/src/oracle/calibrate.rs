//! Observed convergence orders of the discrete operators against exact derivatives.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Expr;
use crate::error::{Error, Result};
use crate::grid::{
    apply_multiindex, boost_apply, derivative, laplacian, rotation_apply, scaling_apply,
    second_time_derivative, time_derivative, Field3, FieldState, FieldTag, Grid, TimeHistory,
};
use crate::hyperdiag::sample_hyperboloid;
use crate::physics::{interpolated_jet2, CoefficientSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridOp {
    SpatialDerivative,
    SecondDerivative,
    MixedDerivative,
    Laplacian,
    TimeDerivative,
    SecondTimeDerivative,
    Boost,
    Scaling,
    Rotation,
    Multiindex,
    TimeInterpolate,
    LevelJet,
    HyperboloidSample,
}

impl GridOp {
    pub const ALL: [GridOp; 13] = [
        GridOp::SpatialDerivative,
        GridOp::SecondDerivative,
        GridOp::MixedDerivative,
        GridOp::Laplacian,
        GridOp::TimeDerivative,
        GridOp::SecondTimeDerivative,
        GridOp::Boost,
        GridOp::Scaling,
        GridOp::Rotation,
        GridOp::Multiindex,
        GridOp::TimeInterpolate,
        GridOp::LevelJet,
        GridOp::HyperboloidSample,
    ];

    pub fn id(self) -> &'static str {
        match self {
            GridOp::SpatialDerivative => "spatial-derivative",
            GridOp::SecondDerivative => "second-derivative",
            GridOp::MixedDerivative => "mixed-derivative",
            GridOp::Laplacian => "laplacian",
            GridOp::TimeDerivative => "time-derivative",
            GridOp::SecondTimeDerivative => "second-time-derivative",
            GridOp::Boost => "boost",
            GridOp::Scaling => "scaling",
            GridOp::Rotation => "rotation",
            GridOp::Multiindex => "multiindex",
            GridOp::TimeInterpolate => "time-interpolate",
            GridOp::LevelJet => "level-jet",
            GridOp::HyperboloidSample => "hyperboloid-sample",
        }
    }
}

impl fmt::Display for GridOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for GridOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GridOp::ALL
            .into_iter()
            .find(|op| op.id() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown grid operator '{s}'")))
    }
}

/// Result of one refinement pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub op: String,
    pub spacing: [f64; 2],
    pub errors: [f64; 2],
    /// `log(e_coarse / e_fine) / log(h_coarse / h_fine)`; infinite when exact.
    pub order: f64,
    /// Both errors at rounding level.
    pub exact: bool,
}

/// Resolution of a calibration pair: the box, the coarse node count (the fine
/// grid has `2n - 1` nodes, halving `h`), the CFL ratio tying `dt` to `h` and
/// the central time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationSetup {
    pub half_extent: f64,
    pub n_coarse: usize,
    pub cfl: f64,
    pub t_centre: f64,
}

impl Default for CalibrationSetup {
    fn default() -> Self {
        Self {
            half_extent: 3.0,
            n_coarse: 25,
            cfl: 0.4,
            t_centre: 5.0,
        }
    }
}

/// Levels stored on each side of the centre.
const HALF: usize = 6;

/// The default transcendental field.
pub fn calibration_field() -> Expr {
    let (t, x1, x2, x3) = (Expr::t(), Expr::x(1), Expr::x(2), Expr::x(3));
    (t.scale(0.9) + Expr::constant(0.3)).sin()
        * (x1.scale(0.8) - x2.scale(0.5)).cos()
        * (x3.scale(0.6) + x2.scale(0.2)).cos()
}

/// Exact states of `u = v = f` at `t`.
pub fn exact_state(grid: &Grid, f: &Expr, t: f64) -> FieldState {
    let ft = f.derivative(0);
    let mut st = FieldState::zeros(grid, t);
    st.u = grid.from_fn(|x| f.eval(&[t, x[0], x[1], x[2]]));
    st.ut = grid.from_fn(|x| ft.eval(&[t, x[0], x[1], x[2]]));
    st.v = st.u.clone();
    st.vt = st.ut.clone();
    st
}

fn history(grid: &Grid, f: &Expr, setup: &CalibrationSetup) -> Result<TimeHistory> {
    let dt = setup.cfl * grid.spacing();
    let t0 = setup.t_centre - HALF as f64 * dt;
    TimeHistory::synthesize(grid, t0, dt, 2 * HALF + 1, |t| exact_state(grid, f, t))
}

/// Levels from just before `t = s` to beyond the slice time of the box corners.
fn slice_history(grid: &Grid, f: &Expr, s: f64, setup: &CalibrationSetup) -> Result<TimeHistory> {
    let dt = setup.cfl * grid.spacing();
    let corner = 3.0 * grid.half_extent().powi(2);
    let levels = ((s * s + corner).sqrt() - s) / dt;
    let count = levels.ceil() as usize + 2 * HALF;
    TimeHistory::synthesize(grid, s - HALF as f64 * dt, dt, count, |t| {
        exact_state(grid, f, t)
    })
}

/// Max error over interior nodes with every `|x_i| <= L/2`, away from the zero ghosts.
fn interior_error(field: &Field3, exact: impl Fn([f64; 3]) -> f64 + Sync) -> f64 {
    let g = *field.grid();
    let lim = 0.5 * g.half_extent() + 1e-12;
    crate::reduce::max_by(g.node_count(), |m| {
        let node = g.node(m);
        let x = g.point(node);
        if x.iter().any(|c| c.abs() > lim) {
            return 0.0;
        }
        (field.at(node) - exact(x)).abs()
    })
}

/// Error of `op` applied to `f` on one grid, and the scale of the exact values.
fn error_on(op: GridOp, f: &Expr, grid: &Grid, setup: &CalibrationSetup) -> Result<(f64, f64)> {
    let h = history(grid, f, setup)?;
    let tc = setup.t_centre;
    let st = h.middle()?;
    let at = |e: Expr| move |x: [f64; 3]| e.eval(&[tc, x[0], x[1], x[2]]);
    let (field, exact): (Field3, Expr) = match op {
        GridOp::SpatialDerivative => (derivative(&st.u, 1), f.derivative(1)),
        GridOp::SecondDerivative => {
            let mut out = grid.zeros();
            out.fill_interior(|_, i| st.u.d2_at(i, 1));
            (out, f.derivative(2).derivative(2))
        }
        GridOp::MixedDerivative => {
            let mut out = grid.zeros();
            out.fill_interior(|_, i| st.u.d11_at(i, 0, 2));
            (out, f.derivative(1).derivative(3))
        }
        GridOp::Laplacian => {
            let lap = f.derivative(1).derivative(1)
                + f.derivative(2).derivative(2)
                + f.derivative(3).derivative(3);
            (laplacian(&st.u), lap)
        }
        GridOp::TimeDerivative => (
            time_derivative(&h, FieldTag::Ut)?,
            f.derivative(0).derivative(0),
        ),
        GridOp::SecondTimeDerivative => (
            second_time_derivative(&h, FieldTag::U)?,
            f.derivative(0).derivative(0),
        ),
        GridOp::Boost => (boost_apply(&h, FieldTag::U, 1)?, f.boost(1)),
        GridOp::Scaling => (scaling_apply(&h, FieldTag::U)?, f.scaling()),
        GridOp::Rotation => (rotation_apply(&st.u, 1, 3)?, f.rotation(1, 3)),
        GridOp::Multiindex => (
            apply_multiindex(&h, FieldTag::U, &"L1,L3".parse()?, 2)?,
            f.boost(3).boost(1),
        ),
        GridOp::TimeInterpolate => {
            // a third of the way between two stored levels
            let t = tc + h.dt() / 3.0;
            let e = f.clone();
            let mid = h.time_interpolate(t)?;
            let err = interior_error(&mid.u, move |x| e.eval(&[t, x[0], x[1], x[2]]));
            return Ok((err, scale_of(grid, f, t)));
        }
        GridOp::LevelJet => {
            // d_t^2 from the rates at an intermediate time
            let levels: Vec<&FieldState> = h.levels().collect();
            let dt = h.dt();
            let t = tc + 0.4 * dt;
            let first = HALF - 1;
            let w = crate::grid::stencil::cubic_weights(levels[first].t, dt, t);
            let mut out = grid.zeros();
            out.fill_interior(|_, i| {
                interpolated_jet2(&levels, first, &w, FieldTag::U, i, dt).dd[0][0]
            });
            let e = f.derivative(0).derivative(0);
            let err = interior_error(&out, move |x| e.eval(&[t, x[0], x[1], x[2]]));
            return Ok((err, scale_of(grid, &f.derivative(0).derivative(0), t)));
        }
        GridOp::HyperboloidSample => {
            // H_s through the centre of the box at t = t_centre
            let s = tc;
            let long = slice_history(grid, f, s, setup)?;
            let slice = sample_hyperboloid(&long, s, 0.0, &CoefficientSet::zero())?;
            let lim = 0.5 * grid.half_extent() + 1e-12;
            let err = slice
                .nodes
                .iter()
                .filter(|n| n.x.iter().all(|c| c.abs() <= lim))
                .map(|n| (n.u.value - f.eval(&[n.t, n.x[0], n.x[1], n.x[2]])).abs())
                .fold(0.0, f64::max);
            return Ok((err, scale_of(grid, f, tc)));
        }
    };
    let err = interior_error(&field, at(exact.clone()));
    Ok((err, scale_of(grid, &exact, tc)))
}

fn scale_of(grid: &Grid, e: &Expr, t: f64) -> f64 {
    let z = grid.zeros();
    1.0 + interior_error(&z, |x| e.eval(&[t, x[0], x[1], x[2]]))
}

/// Observed order of `op` on `f` between `n_coarse` and `2 n_coarse - 1` nodes.
pub fn calibrate_discrete(op: GridOp, f: &Expr, setup: &CalibrationSetup) -> Result<Calibration> {
    let coarse = Grid::new(setup.half_extent, setup.n_coarse)?;
    let fine = Grid::new(setup.half_extent, 2 * setup.n_coarse - 1)?;
    let (ec, scale) = error_on(op, f, &coarse, setup)?;
    let (ef, _) = error_on(op, f, &fine, setup)?;
    let rounding = 1e-11 * scale;
    let exact = ec <= rounding && ef <= rounding;
    let (hc, hf) = (coarse.spacing(), fine.spacing());
    let order = if exact {
        f64::INFINITY
    } else {
        (ec / ef).ln() / (hc / hf).ln()
    };
    Ok(Calibration {
        op: op.id().to_string(),
        spacing: [hc, hf],
        errors: [ec, ef],
        order,
        exact,
    })
}

/// Every operator on the default field.
pub fn calibration_suite(setup: &CalibrationSetup) -> Result<Vec<Calibration>> {
    let f = calibration_field();
    GridOp::ALL
        .into_iter()
        .map(|op| calibrate_discrete(op, &f, setup))
        .collect()
}
