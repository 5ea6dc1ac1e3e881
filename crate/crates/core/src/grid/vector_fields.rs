//! Discrete `d_alpha`, `L_a`, `L_0`, `Omega_ab` and their compositions.
//!
//! An operator acts on a stack of consecutive time levels. Spatial operators
//! act level by level. A time derivative uses the evolved rate (`ut`, `vt`)
//! when the stack still carries one, and otherwise the 5-point centered
//! difference, which shortens the stack by four levels.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::stencil::{d1, d2};
use super::{check_axis, derivative, Field3, FieldTag, TimeHistory};

pub const DEFAULT_MAX_ORDER: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VectorField {
    /// `d_alpha`, alpha in 0..=3 (0 is time).
    Partial(usize),
    /// `L_a`, a in 1..=3.
    Boost(usize),
    /// `L_0`.
    Scaling,
}

impl VectorField {
    fn uses_time(self) -> bool {
        !matches!(self, VectorField::Partial(a) if a > 0)
    }

    fn validate(self) -> Result<Self> {
        match self {
            VectorField::Partial(a) if a <= 3 => Ok(self),
            VectorField::Boost(a) if (1..=3).contains(&a) => Ok(self),
            VectorField::Scaling => Ok(self),
            other => Err(Error::InvalidArgument(format!(
                "invalid vector field {other:?}"
            ))),
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Partial(a) => write!(f, "d{a}"),
            VectorField::Boost(a) => write!(f, "L{a}"),
            VectorField::Scaling => write!(f, "L0"),
        }
    }
}

impl FromStr for VectorField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown vector field '{s}'"));
        let (head, tail) = s.trim().split_at(1.min(s.trim().len()));
        let k: usize = tail.parse().map_err(|_| bad())?;
        match (head, k) {
            ("d", _) => VectorField::Partial(k).validate(),
            ("L", 0) => Ok(VectorField::Scaling),
            ("L", _) => VectorField::Boost(k).validate(),
            _ => Err(bad()),
        }
    }
}

/// Ordered word `[A, B, ...]` acting as `A(B(...f))`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<VectorField>);

impl MultiIndex {
    pub fn new(ops: Vec<VectorField>) -> Result<Self> {
        ops.into_iter()
            .map(VectorField::validate)
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn ops(&self) -> &[VectorField] {
        &self.0
    }

    /// Buffered levels needed to evaluate on a field with (`true`) or without a stored rate.
    pub fn levels_needed(&self, has_rate: bool) -> usize {
        1 + 4 * self.shrinks(has_rate)
    }

    fn shrinks(&self, mut has_rate: bool) -> usize {
        let mut n = 0;
        for op in self.0.iter().rev() {
            if op.uses_time() {
                if has_rate {
                    has_rate = false;
                } else {
                    n += 1;
                }
            }
        }
        n
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Comma-separated word such as `d0,L1`; the empty string is the identity.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(Self::identity());
        }
        s.split(',')
            .map(str::parse)
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<String> = self.0.iter().map(|o| o.to_string()).collect();
        write!(f, "[{}]", words.join(","))
    }
}

/// Consecutive time levels of one (possibly derived) field.
struct Stack {
    times: Vec<f64>,
    fields: Vec<Field3>,
    rates: Option<Vec<Field3>>,
    dt: f64,
}

impl Stack {
    fn from_history(history: &TimeHistory, tag: FieldTag, range: std::ops::Range<usize>) -> Self {
        let levels: Vec<_> = range.map(|i| history.level(i)).collect();
        Self {
            times: levels.iter().map(|s| s.t).collect(),
            fields: levels.iter().map(|s| s.field(tag).clone()).collect(),
            rates: tag
                .rate()
                .map(|r| levels.iter().map(|s| s.field(r).clone()).collect()),
            dt: history.dt(),
        }
    }

    /// Time derivative per level, trimming the stack when no rate is stored.
    fn take_time_derivative(&mut self) -> Vec<Field3> {
        if let Some(rates) = self.rates.take() {
            return rates;
        }
        let out: Vec<Field3> = (2..self.fields.len() - 2)
            .map(|k| time_d1(&self.fields[k - 2..=k + 2], self.dt))
            .collect();
        self.fields.drain(..2);
        self.fields.truncate(out.len());
        self.times.drain(..2);
        self.times.truncate(out.len());
        out
    }

    fn apply(mut self, op: VectorField) -> Self {
        match op {
            VectorField::Partial(0) => {
                let ft = self.take_time_derivative();
                self.fields = ft;
            }
            VectorField::Partial(a) => {
                self.fields = self.fields.iter().map(|f| derivative(f, a)).collect();
                self.rates = self
                    .rates
                    .map(|r| r.iter().map(|f| derivative(f, a)).collect());
            }
            VectorField::Boost(a) => {
                let ft = self.take_time_derivative();
                self.fields = self
                    .fields
                    .iter()
                    .zip(&ft)
                    .zip(&self.times)
                    .map(|((f, ft), &t)| {
                        let g = *f.grid();
                        let mut out = g.zeros();
                        out.fill_interior(|node, idx| {
                            g.point(node)[a - 1] * ft.raw()[idx] + t * f.d1_at(idx, a - 1)
                        });
                        out
                    })
                    .collect();
            }
            VectorField::Scaling => {
                let ft = self.take_time_derivative();
                self.fields = self
                    .fields
                    .iter()
                    .zip(&ft)
                    .zip(&self.times)
                    .map(|((f, ft), &t)| {
                        let g = *f.grid();
                        let mut out = g.zeros();
                        out.fill_interior(|node, idx| {
                            let x = g.point(node);
                            t * ft.raw()[idx] + (0..3).map(|b| x[b] * f.d1_at(idx, b)).sum::<f64>()
                        });
                        out
                    })
                    .collect();
            }
        }
        self
    }

    fn middle(mut self) -> Field3 {
        let mid = self.fields.len() / 2;
        self.fields.swap_remove(mid)
    }
}

/// Centered first difference in time over five consecutive levels.
fn time_d1(levels: &[Field3], dt: f64) -> Field3 {
    let mut out = levels[0].grid().zeros();
    out.fill_interior(|_, i| {
        let v = |k: usize| levels[k].raw()[i];
        d1(v(0), v(1), v(3), v(4)) / dt
    });
    out
}

fn centered_window(history: &TimeHistory, needed: usize) -> Result<std::ops::Range<usize>> {
    let have = history.len();
    let mid = history.middle_index();
    let half = needed / 2;
    if have < needed || mid < half || mid + half >= have {
        return Err(Error::WarmupIncomplete { needed, have });
    }
    Ok(mid - half..mid + half + 1)
}

/// Fourth-order centered `d_t` of the stored array `tag` at the middle level.
pub fn time_derivative(history: &TimeHistory, tag: FieldTag) -> Result<Field3> {
    let w = centered_window(history, 5)?;
    let levels: Vec<Field3> = w.map(|i| history.level(i).field(tag).clone()).collect();
    Ok(time_d1(&levels, history.dt()))
}

/// Fourth-order centered `d_t^2` of the stored array `tag` at the middle level.
pub fn second_time_derivative(history: &TimeHistory, tag: FieldTag) -> Result<Field3> {
    let w = centered_window(history, 5)?;
    let levels: Vec<Field3> = w.map(|i| history.level(i).field(tag).clone()).collect();
    let dt = history.dt();
    let mut out = levels[0].grid().zeros();
    out.fill_interior(|_, i| {
        let v = |k: usize| levels[k].raw()[i];
        d2(v(0), v(1), v(2), v(3), v(4)) / (dt * dt)
    });
    Ok(out)
}

/// `L_a f = x^a d_t f + t d_a f` at the middle level (a in 1..=3).
pub fn boost_apply(history: &TimeHistory, tag: FieldTag, a: usize) -> Result<Field3> {
    check_axis(a)?;
    apply_multiindex(history, tag, &MultiIndex(vec![VectorField::Boost(a)]), 1)
}

/// `L_0 f = t d_t f + x^a d_a f` at the middle level.
pub fn scaling_apply(history: &TimeHistory, tag: FieldTag) -> Result<Field3> {
    apply_multiindex(history, tag, &MultiIndex(vec![VectorField::Scaling]), 1)
}

/// `Omega_ab f = x^a d_b f - x^b d_a f` (a, b in 1..=3, a != b).
pub fn rotation_apply(f: &Field3, a: usize, b: usize) -> Result<Field3> {
    check_axis(a)?;
    check_axis(b)?;
    if a == b {
        return Err(Error::InvalidArgument(format!(
            "rotation needs distinct axes, got a = b = {a}"
        )));
    }
    let g = *f.grid();
    let mut out = g.zeros();
    out.fill_interior(|node, idx| {
        let x = g.point(node);
        x[a - 1] * f.d1_at(idx, b - 1) - x[b - 1] * f.d1_at(idx, a - 1)
    });
    Ok(out)
}

/// `idx` applied to the stored array `tag`, evaluated at the middle level.
pub fn apply_multiindex(
    history: &TimeHistory,
    tag: FieldTag,
    idx: &MultiIndex,
    max_order: usize,
) -> Result<Field3> {
    if idx.order() > max_order {
        return Err(Error::OrderExceeded {
            order: idx.order(),
            max: max_order,
        });
    }
    let window = centered_window(history, idx.levels_needed(tag.rate().is_some()))?;
    let mut stack = Stack::from_history(history, tag, window);
    for &op in idx.ops().iter().rev() {
        stack = stack.apply(op);
    }
    Ok(stack.middle())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{FieldState, Grid};

    /// History of `u = f(t, x)` with the exact rate stored in `ut`.
    fn history(
        f: impl Fn(f64, [f64; 3]) -> f64 + Sync,
        ft: impl Fn(f64, [f64; 3]) -> f64 + Sync,
        n: usize,
        dt: f64,
        levels: usize,
    ) -> TimeHistory {
        let g = Grid::new(1.0, n).unwrap();
        TimeHistory::synthesize(&g, 3.0, dt, levels, |t| {
            let mut st = FieldState::zeros(&g, t);
            st.u = g.from_fn(|x| f(t, x));
            st.ut = g.from_fn(|x| ft(t, x));
            st
        })
        .unwrap()
    }

    fn interior_max(f: &Field3, exact: impl Fn([f64; 3]) -> f64) -> f64 {
        let g = *f.grid();
        let n = g.n();
        let mut e = 0.0f64;
        for k in 2..n - 2 {
            for j in 2..n - 2 {
                for i in 2..n - 2 {
                    let x = g.point([i, j, k]);
                    e = e.max((f.at([i, j, k]) - exact(x)).abs());
                }
            }
        }
        e
    }

    #[test]
    fn parses_and_prints_words() {
        let m: MultiIndex = "d0,L1".parse().unwrap();
        assert_eq!(m.order(), 2);
        assert_eq!(m.to_string(), "[d0,L1]");
        assert_eq!("".parse::<MultiIndex>().unwrap(), MultiIndex::identity());
        assert!("L4".parse::<MultiIndex>().is_err());
        assert!("q1".parse::<MultiIndex>().is_err());
        assert_eq!("L0".parse::<VectorField>().unwrap(), VectorField::Scaling);
    }

    #[test]
    fn time_derivative_examples() {
        let h = history(|t, _| t * t, |t, _| 2.0 * t, 16, 0.1, 5);
        let tm = h.middle().unwrap().t;
        let d = time_derivative(&h, FieldTag::U).unwrap();
        assert!((d.at([5, 5, 5]) - 2.0 * tm).abs() < 1e-12);
        let dd = second_time_derivative(&h, FieldTag::U).unwrap();
        assert!((dd.at([5, 5, 5]) - 2.0).abs() < 1e-9);
        let s = history(|_, x| x[0], |_, _| 0.0, 16, 0.1, 5);
        assert_eq!(time_derivative(&s, FieldTag::U).unwrap().max_abs(), 0.0);
        let short = history(|t, _| t, |_, _| 1.0, 16, 0.1, 4);
        assert!(matches!(
            time_derivative(&short, FieldTag::U),
            Err(Error::WarmupIncomplete { needed: 5, have: 4 })
        ));
    }

    #[test]
    fn time_derivative_converges_at_fourth_order() {
        let err = |dt: f64| {
            let h = history(|t, _| (-t).exp(), |t, _| -(-t).exp(), 16, dt, 5);
            let tm = h.middle().unwrap().t;
            (time_derivative(&h, FieldTag::U).unwrap().at([3, 3, 3]) + (-tm).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn boost_examples() {
        let s2 = |t: f64, x: [f64; 3]| t * t - x.iter().map(|c| c * c).sum::<f64>();
        let h = history(s2, |t, _| 2.0 * t, 20, 0.05, 5);
        for a in 1..=3 {
            let la = boost_apply(&h, FieldTag::U, a).unwrap();
            assert!(interior_max(&la, |_| 0.0) < 1e-12);
        }
        let tm = h.middle().unwrap().t;
        let l0 = scaling_apply(&h, FieldTag::U).unwrap();
        assert!(interior_max(&l0, |x| 2.0 * s2(tm, x)) < 1e-12);

        let hx = history(|_, x| x[0], |_, _| 0.0, 16, 0.05, 5);
        let tm = hx.middle().unwrap().t;
        assert!(interior_max(&boost_apply(&hx, FieldTag::U, 1).unwrap(), |_| tm) < 1e-12);
        assert!(interior_max(&boost_apply(&hx, FieldTag::U, 2).unwrap(), |_| 0.0) < 1e-12);
        let ht = history(|t, _| t, |_, _| 1.0, 16, 0.05, 5);
        assert!(interior_max(&boost_apply(&ht, FieldTag::U, 3).unwrap(), |x| x[2]) < 1e-12);
        assert!(
            interior_max(&scaling_apply(&ht, FieldTag::U).unwrap(), |_| ht
                .middle()
                .unwrap()
                .t)
                < 1e-12
        );
    }

    #[test]
    fn boost_without_rate_uses_differences() {
        let g = Grid::new(1.0, 16).unwrap();
        let h = TimeHistory::synthesize(&g, 3.0, 0.1, 5, |t| {
            let mut st = FieldState::zeros(&g, t);
            st.ut = g.from_fn(|x| t * t * x[1]);
            st
        })
        .unwrap();
        let tm = h.middle().unwrap().t;
        let l2 = boost_apply(&h, FieldTag::Ut, 2).unwrap();
        assert!(interior_max(&l2, |x| x[1] * 2.0 * tm * x[1] + tm * tm * tm) < 1e-10);
    }

    #[test]
    fn rotation_examples() {
        let g = Grid::new(1.0, 20).unwrap();
        let x1 = g.from_fn(|x| x[0]);
        let x2 = g.from_fn(|x| x[1]);
        assert!(interior_max(&rotation_apply(&x1, 1, 2).unwrap(), |x| -x[1]) < 1e-13);
        assert!(interior_max(&rotation_apply(&x2, 1, 2).unwrap(), |x| x[0]) < 1e-13);
        assert!(rotation_apply(&x1, 2, 2).is_err());
        let err = |n: usize| {
            let g = Grid::new(1.0, n).unwrap();
            let f = g.from_fn(|x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp());
            interior_max(&rotation_apply(&f, 1, 3).unwrap(), |_| 0.0)
        };
        let ratio = err(21) / err(41);
        assert!(ratio > 11.0, "ratio {ratio}");
    }

    #[test]
    fn multiindex_composition_and_order_limit() {
        // f = x^1 t: d_t L_1 f - L_1 d_t f = d_1 f = t
        let h = history(|t, x| x[0] * t, |_, x| x[0], 16, 0.05, 5);
        let tm = h.middle().unwrap().t;
        let a = apply_multiindex(&h, FieldTag::U, &"d0,L1".parse().unwrap(), 2).unwrap();
        let b = apply_multiindex(&h, FieldTag::U, &"L1,d0".parse().unwrap(), 2).unwrap();
        let diff = a.axpy(-1.0, &b);
        assert!(interior_max(&diff, |_| tm) < 1e-10);
        let id = apply_multiindex(&h, FieldTag::U, &MultiIndex::identity(), 2).unwrap();
        assert_eq!(id, h.middle().unwrap().u);
        assert!(matches!(
            apply_multiindex(&h, FieldTag::U, &"d1,d2,d3".parse().unwrap(), 2),
            Err(Error::OrderExceeded { order: 3, max: 2 })
        ));
        assert_eq!(
            "L1,L2".parse::<MultiIndex>().unwrap().levels_needed(true),
            5
        );
        assert_eq!(
            "L1,L2".parse::<MultiIndex>().unwrap().levels_needed(false),
            9
        );
    }
}
