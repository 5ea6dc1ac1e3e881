//! Uniformly spaced buffer of published field snapshots.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::stencil::cubic_weights;
use super::{FieldState, Grid};

/// Relative tolerance on the spacing of consecutive levels.
const SPACING_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct TimeHistory {
    levels: VecDeque<Arc<FieldState>>,
    capacity: usize,
    dt: f64,
    decimate_every: Option<usize>,
    pushed: usize,
    decimated: Vec<Arc<FieldState>>,
}

impl TimeHistory {
    /// Ring of `capacity >= 6` levels spaced by `dt`.
    pub fn new(capacity: usize, dt: f64) -> Result<Self> {
        if capacity < 6 {
            return Err(Error::InvalidArgument(format!(
                "history capacity must be at least 6, got {capacity}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        Ok(Self {
            levels: VecDeque::with_capacity(capacity),
            capacity,
            dt,
            decimate_every: None,
            pushed: 0,
            decimated: Vec::new(),
        })
    }

    /// Also keep every `every`-th pushed level in a long-term store.
    pub fn with_decimation(mut self, every: usize) -> Self {
        self.decimate_every = Some(every.max(1));
        self
    }

    /// Builds a full history by sampling `f` at `t0 + k*dt`, `k = 0..levels`.
    pub fn synthesize<F>(grid: &Grid, t0: f64, dt: f64, levels: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> FieldState,
    {
        let mut h = Self::new(levels.max(6), dt)?;
        for k in 0..levels {
            let st = f(t0 + k as f64 * dt);
            if st.grid() != grid {
                return Err(Error::InvalidArgument(
                    "synthesized state on another grid".into(),
                ));
            }
            h.push(st.into_arc())?;
        }
        Ok(h)
    }

    /// Appends a level, evicting the oldest when full.
    pub fn push(&mut self, state: Arc<FieldState>) -> Result<()> {
        if let Some(last) = self.levels.back() {
            let gap = state.t - last.t;
            if gap <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "history times must increase: {} after {}",
                    state.t, last.t
                )));
            }
            if (gap - self.dt).abs() > SPACING_TOL * self.dt.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "non-uniform history spacing {gap} (dt = {})",
                    self.dt
                )));
            }
            if last.grid() != state.grid() {
                return Err(Error::InvalidArgument(
                    "history levels on different grids".into(),
                ));
            }
        }
        if self.levels.len() == self.capacity {
            self.levels.pop_front();
        }
        if let Some(every) = self.decimate_every {
            if self.pushed.is_multiple_of(every) {
                self.decimated.push(state.clone());
            }
        }
        self.pushed += 1;
        self.levels.push_back(state);
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn level(&self, i: usize) -> &FieldState {
        &self.levels[i]
    }

    pub fn levels(&self) -> impl Iterator<Item = &FieldState> {
        self.levels.iter().map(|a| a.as_ref())
    }

    pub fn latest(&self) -> Option<&Arc<FieldState>> {
        self.levels.back()
    }

    /// Index of the level at which centered operators are evaluated.
    #[inline]
    pub fn middle_index(&self) -> usize {
        self.levels.len() / 2
    }

    pub fn middle(&self) -> Result<&FieldState> {
        if self.levels.is_empty() {
            return Err(Error::WarmupIncomplete { needed: 1, have: 0 });
        }
        Ok(self.level(self.middle_index()))
    }

    pub fn decimated(&self) -> &[Arc<FieldState>] {
        &self.decimated
    }

    pub fn time_range(&self) -> Option<(f64, f64)> {
        Some((self.levels.front()?.t, self.levels.back()?.t))
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.levels.front().map(|s| s.grid())
    }

    /// Cubic-in-time interpolation of every stored array at `t_star`.
    ///
    /// Uses the four levels around `t_star`; a stored time is returned as an exact copy.
    pub fn time_interpolate(&self, t_star: f64) -> Result<FieldState> {
        let (start, end) = self
            .time_range()
            .ok_or(Error::WarmupIncomplete { needed: 4, have: 0 })?;
        if self.len() < 4 {
            return Err(Error::WarmupIncomplete {
                needed: 4,
                have: self.len(),
            });
        }
        if !(t_star >= start && t_star <= end) {
            return Err(Error::InsufficientHistory {
                t: t_star,
                start,
                end,
            });
        }
        if let Some(exact) = self.levels.iter().find(|s| s.t == t_star) {
            return Ok(exact.as_ref().clone());
        }
        let k = ((t_star - start) / self.dt).floor() as usize;
        let first = k.saturating_sub(1).min(self.len() - 4);
        let tau0 = self.level(first).t;
        let w = cubic_weights(tau0, self.dt, t_star);
        let lv: [&FieldState; 4] = std::array::from_fn(|i| self.level(first + i));
        let grid = *lv[0].grid();
        let mut out = FieldState::zeros(&grid, t_star);
        for tag in [
            super::FieldTag::U,
            super::FieldTag::Ut,
            super::FieldTag::V,
            super::FieldTag::Vt,
        ] {
            let srcs: [&[f64]; 4] = std::array::from_fn(|i| lv[i].field(tag).raw());
            out.field_mut(tag).fill_interior(|_, idx| {
                w[0] * srcs[0][idx]
                    + w[1] * srcs[1][idx]
                    + w[2] * srcs[2][idx]
                    + w[3] * srcs[3][idx]
            });
        }
        Ok(out)
    }
}
