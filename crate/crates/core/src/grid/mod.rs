//! Uniform Cartesian grid on `[-L, L]^3`, field storage and the discrete
//! vector-field calculus.
//!
//! Arrays carry two ghost layers on every face. The ghosts stay zero for
//! compactly supported runs, which is what lets every stencil run branch-free.
//! Periodic sanity grids refresh the ghosts by wrapping.

mod dump;
mod history;
pub mod stencil;
mod vector_fields;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reduce;

pub use dump::{read_dump, write_dump, DumpHeader, DUMP_HEADER_LEN, DUMP_MAGIC};
pub use history::TimeHistory;
pub use vector_fields::{
    apply_multiindex, boost_apply, rotation_apply, scaling_apply, second_time_derivative,
    time_derivative, MultiIndex, VectorField, DEFAULT_MAX_ORDER,
};

pub const GHOST: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    half_extent: f64,
    n: usize,
    spacing: f64,
    periodic: bool,
}

impl Grid {
    /// Box `[-L, L]^3` with `n` nodes per axis, both faces included.
    pub fn new(half_extent: f64, n: usize) -> Result<Self> {
        Self::check(half_extent, n)?;
        Ok(Self {
            half_extent,
            n,
            spacing: 2.0 * half_extent / (n - 1) as f64,
            periodic: false,
        })
    }

    /// Periodic box of period `2L` with `n` nodes per axis.
    pub fn periodic(half_extent: f64, n: usize) -> Result<Self> {
        Self::check(half_extent, n)?;
        Ok(Self {
            half_extent,
            n,
            spacing: 2.0 * half_extent / n as f64,
            periodic: true,
        })
    }

    fn check(half_extent: f64, n: usize) -> Result<()> {
        if n < 16 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 16 points per axis, got {n}"
            )));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid half-extent must be positive, got {half_extent}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    #[inline]
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.spacing
    }

    #[inline]
    pub fn point(&self, [i, j, k]: [usize; 3]) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Row stride of the padded storage.
    #[inline]
    pub fn stride(&self) -> usize {
        self.n + 2 * GHOST
    }

    #[inline]
    pub fn index(&self, [i, j, k]: [usize; 3]) -> usize {
        let p = self.stride();
        (i + GHOST) + p * ((j + GHOST) + p * (k + GHOST))
    }

    /// Storage offset of a unit step along axis `a` (0-based: x, y, z).
    #[inline]
    pub fn axis_stride(&self, a: usize) -> usize {
        let p = self.stride();
        match a {
            0 => 1,
            1 => p,
            _ => p * p,
        }
    }

    /// Node with flat interior index `m` (x fastest).
    #[inline]
    pub fn node(&self, m: usize) -> [usize; 3] {
        let n = self.n;
        [m % n, (m / n) % n, m / (n * n)]
    }

    pub fn zeros(&self) -> Field3 {
        Field3 {
            grid: *self,
            data: vec![0.0; self.stride().pow(3)],
        }
    }

    pub fn from_fn<F>(&self, f: F) -> Field3
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        let mut out = self.zeros();
        out.fill_interior(|node, _| f(self.point(node)));
        out
    }

    /// Bytes of one field array, ghosts included.
    pub fn bytes_per_field(&self) -> usize {
        self.stride().pow(3) * std::mem::size_of::<f64>()
    }
}

/// Scalar array over the grid, stored with ghost layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Field3 {
    grid: Grid,
    data: Vec<f64>,
}

impl Field3 {
    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub(crate) fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, node: [usize; 3]) -> f64 {
        self.data[self.grid.index(node)]
    }

    #[inline]
    pub fn set(&mut self, node: [usize; 3], value: f64) {
        let idx = self.grid.index(node);
        self.data[idx] = value;
    }

    /// Interior values in x-fastest order.
    pub fn interior(&self) -> Vec<f64> {
        (0..self.grid.node_count())
            .map(|m| self.at(self.grid.node(m)))
            .collect()
    }

    /// Overwrites every interior node with `f(node, storage_index)`; planes run in parallel.
    pub fn fill_interior<F>(&mut self, f: F)
    where
        F: Fn([usize; 3], usize) -> f64 + Sync,
    {
        let grid = self.grid;
        let n = grid.n;
        let p = grid.stride();
        let plane = p * p;
        self.data[plane * GHOST..plane * (GHOST + n)]
            .par_chunks_mut(plane)
            .enumerate()
            .for_each(|(k, chunk)| {
                for j in 0..n {
                    let row = p * (j + GHOST) + GHOST;
                    for i in 0..n {
                        let idx = plane * (k + GHOST) + row + i;
                        chunk[row + i] = f([i, j, k], idx);
                    }
                }
            });
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Field3 {
        let mut out = self.grid.zeros();
        out.fill_interior(|_, idx| f(self.data[idx]));
        out
    }

    /// `self + a * other`, interior only.
    pub fn axpy(&self, a: f64, other: &Field3) -> Field3 {
        let mut out = self.grid.zeros();
        out.fill_interior(|_, idx| self.data[idx] + a * other.data[idx]);
        out
    }

    pub fn scale(&self, a: f64) -> Field3 {
        self.map(|v| a * v)
    }

    pub fn max_abs(&self) -> f64 {
        let g = self.grid;
        reduce::max_by(g.node_count(), |m| self.data[g.index(g.node(m))].abs())
    }

    /// Maximum of `|self - other|` over interior nodes.
    pub fn max_abs_diff(&self, other: &Field3) -> f64 {
        let g = self.grid;
        reduce::max_by(g.node_count(), |m| {
            let idx = g.index(g.node(m));
            (self.data[idx] - other.data[idx]).abs()
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Refreshes ghost layers by periodic wrapping (periodic grids only).
    pub fn wrap_ghosts(&mut self) {
        if !self.grid.periodic {
            return;
        }
        let n = self.grid.n as isize;
        let p = self.grid.stride();
        let total = p as isize;
        let wrap = |c: isize| -> usize { ((c - GHOST as isize).rem_euclid(n)) as usize + GHOST };
        for k in 0..total {
            for j in 0..total {
                for i in 0..total {
                    let inside = |c: isize| c >= GHOST as isize && c < GHOST as isize + n;
                    if inside(i) && inside(j) && inside(k) {
                        continue;
                    }
                    let src = wrap(i) + p * (wrap(j) + p * wrap(k));
                    let dst = i as usize + p * (j as usize + p * k as usize);
                    self.data[dst] = self.data[src];
                }
            }
        }
    }

    /// Fourth-order centered derivative at a storage index along axis `a` (0-based).
    #[inline]
    pub fn d1_at(&self, idx: usize, a: usize) -> f64 {
        let s = self.grid.axis_stride(a);
        let d = &self.data;
        stencil::d1(d[idx - 2 * s], d[idx - s], d[idx + s], d[idx + 2 * s]) / self.grid.spacing
    }

    /// Fourth-order centered second derivative along axis `a` (0-based).
    #[inline]
    pub fn d2_at(&self, idx: usize, a: usize) -> f64 {
        let s = self.grid.axis_stride(a);
        let d = &self.data;
        let h = self.grid.spacing;
        stencil::d2(
            d[idx - 2 * s],
            d[idx - s],
            d[idx],
            d[idx + s],
            d[idx + 2 * s],
        ) / (h * h)
    }

    /// Mixed derivative `D_a D_b` (a != b) as the product of first-derivative stencils.
    #[inline]
    pub fn d11_at(&self, idx: usize, a: usize, b: usize) -> f64 {
        let sa = self.grid.axis_stride(a) as isize;
        let sb = self.grid.axis_stride(b) as isize;
        let d = &self.data;
        let mut acc = 0.0;
        for (p, &wa) in stencil::D1.iter().enumerate() {
            if wa == 0.0 {
                continue;
            }
            for (q, &wb) in stencil::D1.iter().enumerate() {
                if wb == 0.0 {
                    continue;
                }
                let off = (p as isize - 2) * sa + (q as isize - 2) * sb;
                acc += wa * wb * d[(idx as isize + off) as usize];
            }
        }
        let h = self.grid.spacing;
        acc / (h * h)
    }

    /// Fourth-order Laplacian at a storage index.
    #[inline]
    pub fn laplacian_at(&self, idx: usize) -> f64 {
        let p = self.grid.stride();
        let pp = p * p;
        let d = &self.data;
        let h = self.grid.spacing;
        let far = d[idx - 2]
            + d[idx + 2]
            + d[idx - 2 * p]
            + d[idx + 2 * p]
            + d[idx - 2 * pp]
            + d[idx + 2 * pp];
        let near = d[idx - 1] + d[idx + 1] + d[idx - p] + d[idx + p] + d[idx - pp] + d[idx + pp];
        (16.0 * near - far - 90.0 * d[idx]) / 12.0 / (h * h)
    }
}

/// Which stored array of a [`FieldState`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldTag {
    U,
    Ut,
    V,
    Vt,
}

impl FieldTag {
    pub const ALL: [FieldTag; 4] = [FieldTag::U, FieldTag::Ut, FieldTag::V, FieldTag::Vt];

    pub fn name(self) -> &'static str {
        match self {
            FieldTag::U => "u",
            FieldTag::Ut => "ut",
            FieldTag::V => "v",
            FieldTag::Vt => "vt",
        }
    }

    /// The tag holding the evolved time derivative of this field, if any.
    pub fn rate(self) -> Option<FieldTag> {
        match self {
            FieldTag::U => Some(FieldTag::Ut),
            FieldTag::V => Some(FieldTag::Vt),
            _ => None,
        }
    }
}

impl std::str::FromStr for FieldTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" => Ok(FieldTag::U),
            "ut" => Ok(FieldTag::Ut),
            "v" => Ok(FieldTag::V),
            "vt" => Ok(FieldTag::Vt),
            other => Err(Error::InvalidArgument(format!(
                "unknown field tag '{other}'"
            ))),
        }
    }
}

/// Samples of `(u, d_t u, v, d_t v)` at one Cartesian time.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub u: Field3,
    pub ut: Field3,
    pub v: Field3,
    pub vt: Field3,
}

impl FieldState {
    pub fn zeros(grid: &Grid, t: f64) -> Self {
        Self {
            t,
            u: grid.zeros(),
            ut: grid.zeros(),
            v: grid.zeros(),
            vt: grid.zeros(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn field(&self, tag: FieldTag) -> &Field3 {
        match tag {
            FieldTag::U => &self.u,
            FieldTag::Ut => &self.ut,
            FieldTag::V => &self.v,
            FieldTag::Vt => &self.vt,
        }
    }

    pub fn field_mut(&mut self, tag: FieldTag) -> &mut Field3 {
        match tag {
            FieldTag::U => &mut self.u,
            FieldTag::Ut => &mut self.ut,
            FieldTag::V => &mut self.v,
            FieldTag::Vt => &mut self.vt,
        }
    }

    pub fn fields(&self) -> [&Field3; 4] {
        [&self.u, &self.ut, &self.v, &self.vt]
    }

    pub fn fields_mut(&mut self) -> [&mut Field3; 4] {
        [&mut self.u, &mut self.ut, &mut self.v, &mut self.vt]
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }

    pub fn into_arc(self) -> Arc<FieldState> {
        Arc::new(self)
    }

    /// Largest `|field|` over the nodes with `r > radius`.
    pub fn max_outside(&self, radius: f64) -> f64 {
        let g = *self.grid();
        reduce::max_by(g.node_count(), |m| {
            let node = g.node(m);
            let x = g.point(node);
            if crate::geometry::radius(&x) <= radius {
                return 0.0;
            }
            let idx = g.index(node);
            self.fields()
                .iter()
                .map(|f| f.raw()[idx].abs())
                .fold(0.0, reduce::nan_max)
        })
    }
}

/// Slack added to the light cone `r <= t - 1` by [`support_check`].
pub fn support_slack(grid: &Grid) -> f64 {
    4.0 * grid.spacing()
}

/// `true` iff every field satisfies `|field| <= tol` outside `{r <= t - 1 + 4h}`.
pub fn support_check(state: &FieldState, tol: f64) -> bool {
    let radius = state.t - 1.0 + support_slack(state.grid());
    state.max_outside(radius) <= tol
}

/// Fourth-order centered `d_a` of a stored field at every node (axis `a` in 1..=3).
pub fn spatial_derivative(state: &FieldState, tag: FieldTag, a: usize) -> Result<Field3> {
    check_axis(a)?;
    Ok(derivative(state.field(tag), a))
}

/// Axis `a` in 1..=3.
pub fn derivative(f: &Field3, a: usize) -> Field3 {
    let mut out = f.grid().zeros();
    out.fill_interior(|_, idx| f.d1_at(idx, a - 1));
    out
}

pub fn laplacian(f: &Field3) -> Field3 {
    let mut out = f.grid().zeros();
    out.fill_interior(|_, idx| f.laplacian_at(idx));
    out
}

pub(crate) fn check_axis(a: usize) -> Result<()> {
    if (1..=3).contains(&a) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "spatial axis must be 1, 2 or 3, got {a}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_state(grid: &Grid) -> FieldState {
        let mut st = FieldState::zeros(grid, 3.0);
        st.u = grid.from_fn(|x| x[0].powi(3));
        st.v = grid.from_fn(|_| 2.5);
        st
    }

    #[test]
    fn rejects_small_grids() {
        assert!(Grid::new(1.0, 15).is_err());
        assert!(Grid::new(0.0, 16).is_err());
        let g = Grid::new(2.0, 17).unwrap();
        assert_eq!(g.spacing(), 0.25);
    }

    #[test]
    fn derivative_of_constant_vanishes_away_from_faces() {
        let g = Grid::new(1.0, 20).unwrap();
        let st = cubic_state(&g);
        let d = spatial_derivative(&st, FieldTag::V, 1).unwrap();
        for k in 2..18 {
            for j in 2..18 {
                for i in 2..18 {
                    assert_eq!(d.at([i, j, k]), 0.0);
                }
            }
        }
    }

    #[test]
    fn derivative_of_cubic_is_exact() {
        let g = Grid::new(1.5, 24).unwrap();
        let st = cubic_state(&g);
        let d = spatial_derivative(&st, FieldTag::U, 1).unwrap();
        for k in 0..24 {
            for j in 0..24 {
                for i in 2..22 {
                    let x = g.coord(i);
                    assert!((d.at([i, j, k]) - 3.0 * x * x).abs() < 1e-12);
                }
            }
        }
        assert!(spatial_derivative(&st, FieldTag::U, 0).is_err());
    }

    #[test]
    fn derivative_converges_at_fourth_order() {
        let err = |n: usize| {
            let g = Grid::new(1.0, n).unwrap();
            let f = g.from_fn(|x| (2.0 * x[0]).sin());
            let d = derivative(&f, 1);
            let mut e = 0.0f64;
            for i in 2..n - 2 {
                let x = g.coord(i);
                e = e.max((d.at([i, n / 2, n / 2]) - 2.0 * (2.0 * x).cos()).abs());
            }
            e
        };
        let ratio = err(17) / err(33);
        assert!((ratio - 16.0).abs() < 2.5, "ratio {ratio}");
    }

    #[test]
    fn laplacian_matches_axis_sum() {
        let g = Grid::new(1.0, 18).unwrap();
        let f = g.from_fn(|x| x[0] * x[0] * x[1] + x[2].powi(4));
        let lap = laplacian(&f);
        for k in 2..16 {
            for j in 2..16 {
                for i in 2..16 {
                    let x = g.point([i, j, k]);
                    let exact = 2.0 * x[1] + 12.0 * x[2] * x[2];
                    assert!((lap.at([i, j, k]) - exact).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn periodic_wrap_makes_stencils_global() {
        let g = Grid::periodic(std::f64::consts::PI, 16).unwrap();
        let mut f = g.from_fn(|x| x[0].sin());
        f.wrap_ghosts();
        let d = derivative(&f, 1);
        for i in 0..16 {
            let x = g.coord(i);
            assert!((d.at([i, 3, 5]) - x.cos()).abs() < 2e-3);
        }
    }

    #[test]
    fn support_check_examples() {
        let g = Grid::new(4.0, 33).unwrap();
        let mut st = FieldState::zeros(&g, 2.0);
        st.u = g.from_fn(|x| {
            let r = crate::geometry::radius(&x);
            if r < 1.0 {
                (1.0 - 1.0 / (1.0 - r * r)).exp()
            } else {
                0.0
            }
        });
        assert!(support_check(&st, 1e-14));
        st.v = g.from_fn(|_| 1.0);
        assert!(!support_check(&st, 1e-14));
    }
}
