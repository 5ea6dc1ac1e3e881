//! Quadratic sources, null forms and the transformed unknown `U = u + Q_u`.
//!
//! Time derivatives of `u` and `v` always come from the evolved rates `ut`
//! and `vt`; second time derivatives difference those rates over five levels.

mod coefficients;
pub mod jet;

use crate::error::{Error, Result};
use crate::geometry::radius;
use crate::grid::stencil::{d1, d2, D1};
use crate::grid::{
    boost_apply, derivative, scaling_apply, time_derivative, Field3, FieldState, FieldTag, Grid,
    TimeHistory,
};
use crate::reduce;

pub use coefficients::{CoefficientSet, CouplingFamily};
pub use jet::{Jet1, Jet2};

/// Weighted combination of stored levels from which jets of one field are read.
///
/// Spatial stencils commute with a fixed set of time weights, so a jet at an
/// intermediate time is the same linear combination of per-level jets.
pub struct LevelView<'a> {
    grid: Grid,
    value: Vec<(&'a [f64], f64)>,
    rate: Vec<(&'a [f64], f64)>,
    accel: Vec<(&'a [f64], f64)>,
}

impl<'a> LevelView<'a> {
    /// `weights[k]` multiplies `levels[k]`; the levels must be spaced by `dt`.
    ///
    /// `d_t^2` differences the stored rate, so every weighted level needs two
    /// neighbours on each side.
    pub fn new(levels: &[&'a FieldState], tag: FieldTag, weights: &[f64], dt: f64) -> Result<Self> {
        let rate_tag = tag.rate().ok_or_else(|| {
            Error::InvalidArgument(format!("field '{}' has no stored rate", tag.name()))
        })?;
        if weights.len() != levels.len() {
            return Err(Error::InvalidArgument(
                "one weight per level required".into(),
            ));
        }
        let mut accel = vec![0.0; levels.len()];
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            if k < 2 || k + 2 >= levels.len() {
                return Err(Error::WarmupIncomplete {
                    needed: 5,
                    have: levels.len(),
                });
            }
            for (m, c) in D1.iter().enumerate() {
                accel[k + m - 2] += w * c / dt;
            }
        }
        let pick = |tag: FieldTag, ws: &[f64]| -> Vec<(&'a [f64], f64)> {
            levels
                .iter()
                .zip(ws)
                .filter(|(_, &w)| w != 0.0)
                .map(|(s, &w)| (s.field(tag).raw(), w))
                .collect()
        };
        Ok(Self {
            grid: *levels[0].grid(),
            value: pick(tag, weights),
            rate: pick(rate_tag, weights),
            accel: pick(rate_tag, &accel),
        })
    }

    /// View at the middle level of `history` (needs five levels around it).
    pub fn middle(history: &'a TimeHistory, tag: FieldTag) -> Result<Self> {
        let (levels, k) = centered_levels(history, 2)?;
        let mut w = vec![0.0; levels.len()];
        w[k] = 1.0;
        Self::new(&levels, tag, &w, history.dt())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    fn at(list: &[(&[f64], f64)], i: usize) -> f64 {
        list.iter().map(|(a, w)| w * a[i]).sum()
    }

    #[inline]
    fn d1(list: &[(&[f64], f64)], i: usize, s: usize) -> f64 {
        list.iter()
            .map(|(a, w)| w * d1(a[i - 2 * s], a[i - s], a[i + s], a[i + 2 * s]))
            .sum()
    }

    #[inline]
    fn d2(list: &[(&[f64], f64)], i: usize, s: usize) -> f64 {
        list.iter()
            .map(|(a, w)| w * d2(a[i - 2 * s], a[i - s], a[i], a[i + s], a[i + 2 * s]))
            .sum()
    }

    #[inline]
    fn d11(list: &[(&[f64], f64)], i: usize, sa: usize, sb: usize) -> f64 {
        let row = |j: usize| Self::d1(list, j, sb);
        d1(row(i - 2 * sa), row(i - sa), row(i + sa), row(i + 2 * sa))
    }

    /// Value, rate and spatial gradient at storage index `i`.
    pub fn jet1(&self, i: usize) -> Jet1 {
        let h = self.grid.spacing();
        let mut d = [Self::at(&self.rate, i), 0.0, 0.0, 0.0];
        for a in 0..3 {
            d[a + 1] = Self::d1(&self.value, i, self.grid.axis_stride(a)) / h;
        }
        Jet1::new(Self::at(&self.value, i), d)
    }

    /// Full 2-jet at storage index `i`.
    pub fn jet2(&self, i: usize) -> Jet2 {
        let h = self.grid.spacing();
        let h2 = h * h;
        let j1 = self.jet1(i);
        let mut dd = [[0.0; 4]; 4];
        dd[0][0] = Self::at(&self.accel, i);
        let strides: [usize; 3] = std::array::from_fn(|a| self.grid.axis_stride(a));
        for a in 0..3 {
            let dta = Self::d1(&self.rate, i, strides[a]) / h;
            dd[0][a + 1] = dta;
            dd[a + 1][0] = dta;
            dd[a + 1][a + 1] = Self::d2(&self.value, i, strides[a]) / h2;
            for b in a + 1..3 {
                let m = Self::d11(&self.value, i, strides[a], strides[b]) / h2;
                dd[a + 1][b + 1] = m;
                dd[b + 1][a + 1] = m;
            }
        }
        Jet2 {
            value: j1.value,
            d: j1.d,
            dd,
        }
    }
}

/// The `2*half+1` levels centred on the middle level, and the local index of the centre.
fn centered_levels(history: &TimeHistory, half: usize) -> Result<(Vec<&FieldState>, usize)> {
    let mid = history.middle_index();
    let needed = 2 * half + 1;
    if history.len() < needed || mid < half || mid + half >= history.len() {
        return Err(Error::WarmupIncomplete {
            needed,
            have: history.len(),
        });
    }
    Ok((
        (mid - half..=mid + half)
            .map(|i| history.level(i))
            .collect(),
        half,
    ))
}

/// 2-jet of `tag` (`U` or `V`) exactly at `levels[k]`; needs `k >= 2` and `k + 2 < levels.len()`.
#[inline]
pub fn level_jet2(levels: &[&FieldState], k: usize, tag: FieldTag, i: usize, dt: f64) -> Jet2 {
    let rate_tag = tag.rate().expect("u or v");
    let f = levels[k].field(tag);
    let r = levels[k].field(rate_tag);
    let mut dd = [[0.0; 4]; 4];
    dd[0][0] = D1
        .iter()
        .enumerate()
        .map(|(m, c)| c * levels[k + m - 2].field(rate_tag).raw()[i])
        .sum::<f64>()
        / dt;
    for a in 0..3 {
        let dta = r.d1_at(i, a);
        dd[0][a + 1] = dta;
        dd[a + 1][0] = dta;
        dd[a + 1][a + 1] = f.d2_at(i, a);
        for b in a + 1..3 {
            let m = f.d11_at(i, a, b);
            dd[a + 1][b + 1] = m;
            dd[b + 1][a + 1] = m;
        }
    }
    Jet2 {
        value: f.raw()[i],
        d: [r.raw()[i], f.d1_at(i, 0), f.d1_at(i, 1), f.d1_at(i, 2)],
        dd,
    }
}

/// `sum_m w[m] * level_jet2(levels, first + m, ..)`: the jet at an intermediate time.
#[inline]
pub fn interpolated_jet2(
    levels: &[&FieldState],
    first: usize,
    w: &[f64; 4],
    tag: FieldTag,
    i: usize,
    dt: f64,
) -> Jet2 {
    let mut out = Jet2::default();
    for (m, &wm) in w.iter().enumerate() {
        if wm == 0.0 {
            continue;
        }
        let j = level_jet2(levels, first + m, tag, i, dt);
        out.value += wm * j.value;
        for a in 0..4 {
            out.d[a] += wm * j.d[a];
            for b in 0..4 {
                out.dd[a][b] += wm * j.dd[a][b];
            }
        }
    }
    out
}

/// 1-jet of a stored field (`U` or `V`) at storage index `i` of a single state.
#[inline]
pub fn state_jet1(state: &FieldState, tag: FieldTag, i: usize) -> Jet1 {
    let f = state.field(tag);
    let rate = state.field(tag.rate().expect("u or v")).raw()[i];
    Jet1::new(
        f.raw()[i],
        [rate, f.d1_at(i, 0), f.d1_at(i, 1), f.d1_at(i, 2)],
    )
}

/// The four source families evaluated on one state.
#[derive(Clone, Debug)]
pub struct NonlinearitySample {
    pub qu0: Field3,
    pub qu1: Field3,
    pub qv0: Field3,
    pub qv1: Field3,
}

impl NonlinearitySample {
    pub fn evaluate(state: &FieldState, c: &CoefficientSet) -> Self {
        let (cu, cv) = (c.u_matrix(), c.v_matrix());
        let g = *state.grid();
        let part = |m: &[[f64; 5]; 5], first: bool| {
            let mut out = g.zeros();
            out.fill_interior(|_, i| {
                let (q0, q1) = jet::split_source(
                    m,
                    &state_jet1(state, FieldTag::U, i),
                    &state_jet1(state, FieldTag::V, i),
                );
                if first {
                    q0
                } else {
                    q1
                }
            });
            out
        };
        Self {
            qu0: part(&cu, true),
            qu1: part(&cu, false),
            qv0: part(&cv, true),
            qv1: part(&cv, false),
        }
    }
}

fn pointwise(state: &FieldState, f: impl Fn(&Jet1, &Jet1, [usize; 3]) -> f64 + Sync) -> Field3 {
    let mut out = state.grid().zeros();
    out.fill_interior(|node, i| {
        f(
            &state_jet1(state, FieldTag::U, i),
            &state_jet1(state, FieldTag::V, i),
            node,
        )
    });
    out
}

/// `Q_u0 + Q_u1`, the right-hand side of the wave equation.
pub fn eval_wave_rhs(state: &FieldState, c: &CoefficientSet) -> Field3 {
    let m = c.u_matrix();
    pointwise(state, |u, v, _| jet::source(&m, u, v))
}

/// `Q_v0 + Q_v1`; the mass term stays with the linear operator.
pub fn eval_kg_rhs(state: &FieldState, c: &CoefficientSet) -> Field3 {
    let m = c.v_matrix();
    pointwise(state, |u, v, _| jet::source(&m, u, v))
}

/// `U = u + Q_u0 + Q_u1`.
pub fn transform_u(state: &FieldState, c: &CoefficientSet) -> Field3 {
    let m = c.u_matrix();
    pointwise(state, |u, v, _| u.value + jet::source(&m, u, v))
}

/// A field with its four first derivatives at one time.
#[derive(Clone, Debug)]
pub struct Gradient {
    pub value: Field3,
    pub d: [Field3; 4],
}

impl Gradient {
    /// Middle-level gradient of a stored array; `d_t` is the stored rate when one exists.
    pub fn from_history(history: &TimeHistory, tag: FieldTag) -> Result<Self> {
        let mid = history.middle()?;
        let value = mid.field(tag).clone();
        let dt = match tag.rate() {
            Some(r) => mid.field(r).clone(),
            None => time_derivative(history, tag)?,
        };
        Ok(Self {
            d: [
                dt,
                derivative(&value, 1),
                derivative(&value, 2),
                derivative(&value, 3),
            ],
            value,
        })
    }
}

/// `d_alpha f d^alpha g` at every node.
pub fn null_form(f: &Gradient, g: &Gradient) -> Field3 {
    let mut out = f.value.grid().zeros();
    out.fill_interior(|_, i| {
        let df: [f64; 4] = std::array::from_fn(|a| f.d[a].raw()[i]);
        let dg: [f64; 4] = std::array::from_fn(|a| g.d[a].raw()[i]);
        jet::null_form(&df, &dg)
    });
    out
}

/// `-(1/t) (d_t g L_0 f - L_a g d_a f)` with `L_0 f`, `L_a g` from the discrete vector fields.
pub fn null_decompose(history: &TimeHistory, f: FieldTag, g: FieldTag) -> Result<Field3> {
    let t = history.middle()?.t;
    if t <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "null decomposition needs t > 0, got {t}"
        )));
    }
    let gf = Gradient::from_history(history, f)?;
    let gg = Gradient::from_history(history, g)?;
    let l0f = scaling_apply(history, f)?;
    let lag = [
        boost_apply(history, g, 1)?,
        boost_apply(history, g, 2)?,
        boost_apply(history, g, 3)?,
    ];
    let mut out = gf.value.grid().zeros();
    out.fill_interior(|_, i| {
        let boosts: f64 = (0..3).map(|a| lag[a].raw()[i] * gf.d[a + 1].raw()[i]).sum();
        -(gg.d[0].raw()[i] * l0f.raw()[i] - boosts) / t
    });
    Ok(out)
}

fn middle_jets<F>(history: &TimeHistory, f: F) -> Result<Field3>
where
    F: Fn(&Jet2, &Jet2) -> f64 + Sync,
{
    let u = LevelView::middle(history, FieldTag::U)?;
    let v = LevelView::middle(history, FieldTag::V)?;
    let mut out = u.grid().zeros();
    out.fill_interior(|_, i| f(&u.jet2(i), &v.jet2(i)));
    Ok(out)
}

/// The quadratic null terms `N(u, v)` at the middle level.
pub fn eval_null_terms(history: &TimeHistory, c: &CoefficientSet) -> Result<Field3> {
    let m = c.u_matrix();
    middle_jets(history, |u, v| jet::null_terms(&m, u, v))
}

/// The cubic terms `H(u, v)` at the middle level.
pub fn eval_cubic_terms(history: &TimeHistory, c: &CoefficientSet) -> Result<Field3> {
    let (cu, cv) = (c.u_matrix(), c.v_matrix());
    middle_jets(history, |u, v| jet::cubic_terms(&cu, &cv, u, v))
}

/// Max over in-cone nodes of `D_t^2 U - Laplacian U - N - H` at the stored level nearest `t_star`.
pub fn transform_residual(history: &TimeHistory, c: &CoefficientSet, t_star: f64) -> Result<f64> {
    let (start, end) = history
        .time_range()
        .ok_or(Error::WarmupIncomplete { needed: 5, have: 0 })?;
    let dt = history.dt();
    let k = ((t_star - start) / dt).round();
    let in_range = k >= 2.0 && (k as usize) + 2 < history.len();
    if !in_range || (start + k * dt - t_star).abs() > 0.5 * dt {
        return Err(Error::InsufficientHistory {
            t: t_star,
            start: start + 2.0 * dt,
            end: end - 2.0 * dt,
        });
    }
    let k = k as usize;
    let levels: Vec<&FieldState> = (k - 2..=k + 2).map(|i| history.level(i)).collect();
    residual_on_levels(&levels, dt, c)
}

/// Transform residual at the centre of five consecutive levels.
pub(crate) fn residual_on_levels(
    levels: &[&FieldState],
    dt: f64,
    c: &CoefficientSet,
) -> Result<f64> {
    let centre = levels[2];
    let g = *centre.grid();
    let t = centre.t;
    let (cu, cv) = (c.u_matrix(), c.v_matrix());
    let u_at = |s: &FieldState, i: usize| {
        let ju = state_jet1(s, FieldTag::U, i);
        ju.value + jet::source(&cu, &ju, &state_jet1(s, FieldTag::V, i))
    };
    // U at the centre level on the in-cone region widened by the stencil reach
    let reach = t - 1.0 + 3.0 * g.spacing();
    let mut big_u = g.zeros();
    big_u.fill_interior(|node, i| {
        if radius(&g.point(node)) <= reach {
            u_at(centre, i)
        } else {
            0.0
        }
    });
    big_u.wrap_ghosts();
    let mut w = [0.0; 5];
    w[2] = 1.0;
    let ju = LevelView::new(levels, FieldTag::U, &w, dt)?;
    let jv = LevelView::new(levels, FieldTag::V, &w, dt)?;
    Ok(reduce::max_by(g.node_count(), |m| {
        let node = g.node(m);
        let x = g.point(node);
        if radius(&x) >= t - 1.0 {
            return 0.0;
        }
        let i = g.index(node);
        let utt = d2(
            u_at(levels[0], i),
            u_at(levels[1], i),
            big_u.raw()[i],
            u_at(levels[3], i),
            u_at(levels[4], i),
        ) / (dt * dt);
        let (a, b) = (ju.jet2(i), jv.jet2(i));
        let rhs = jet::null_terms(&cu, &a, &b) + jet::cubic_terms(&cu, &cv, &a, &b);
        (utt - big_u.laplacian_at(i) - rhs).abs()
    }))
}
