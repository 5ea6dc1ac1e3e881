use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::T0;
use crate::grid::{Grid, DEFAULT_MAX_ORDER};
use crate::physics::CoefficientSet;

use super::Profile;

/// Largest admissible CFL number.
pub const MAX_CFL: f64 = 0.4;

/// Backward steps taken before `t0` so centred time stencils reach the first slice.
pub const WARMUP_STEPS: usize = 3;

/// Which hyperboloids are sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `s = 2, 2 + ds, ...` up to the last fully covered hyperboloid.
    Auto {
        ds: f64,
    },
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Half-extent `L` of the box `[-L, L]^3`.
    pub half_extent: f64,
    pub n: usize,
    pub cfl: f64,
    pub t0: f64,
    pub t_final: f64,
    pub epsilon: f64,
    pub profile: Profile,
    pub seed: u64,
    pub coefficients: CoefficientSet,
    pub schedule: Schedule,
    pub monitor_order: usize,
    /// Slices integrate over `r <= t - 1 + slice_slack`; must be below 1.
    pub slice_slack: f64,
    /// Tolerance of the support check at every diagnostic time, relative to
    /// `epsilon`. The scheme carries a precursor just ahead of the cone that
    /// falls off over a few nodes: up to about `2.5e-4 epsilon` beyond
    /// `t - 1 + 4h` for `h` between 0.2 and 0.9, and roundoff-sized by `12h`.
    pub support_tol: f64,
    /// Window in `t` for the Cartesian decay fits.
    pub decay_window: [f64; 2],
    /// Window in `s` for the hyperboloidal fits; `None` spans the schedule from `s = 2.5`.
    pub energy_window: Option<[f64; 2]>,
    /// Evaluate the transform residual on every slice.
    pub residual: bool,
    /// Keep every k-th level in the long-term history store.
    pub keep_every: Option<usize>,
    /// Evaluate the transform residual once, at the level nearest this `t`.
    pub transform_at: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            half_extent: 44.0,
            n: 160,
            cfl: MAX_CFL,
            t0: T0,
            t_final: 40.0,
            epsilon: 0.0,
            profile: Profile::Bump,
            seed: 0,
            coefficients: CoefficientSet::zero(),
            schedule: Schedule::Auto { ds: 0.25 },
            monitor_order: DEFAULT_MAX_ORDER,
            slice_slack: 0.1,
            support_tol: 1e-3,
            decay_window: [10.0, 38.0],
            energy_window: None,
            residual: true,
            keep_every: None,
            transform_at: None,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.half_extent, self.n)
    }

    pub fn dt(&self) -> Result<f64> {
        cfl_dt(&self.grid()?, self.cfl)
    }

    /// Number of forward steps; the last level is the first at or beyond `t_final`.
    pub fn steps(&self) -> Result<usize> {
        let dt = self.dt()?;
        Ok(((self.t_final - self.t0) / dt - 1e-9).ceil().max(0.0) as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((key, message)) = self.violation() {
            return Err(Error::InvalidArgument(format!("{key}: {message}")));
        }
        if let Schedule::Explicit(list) = &self.schedule {
            let cover = self.coverage_limit()?;
            if let Some(&s) = list.iter().find(|&&s| s > cover) {
                let (start, end) = (self.t0, self.t0 + self.steps()? as f64 * self.dt()?);
                return Err(Error::InsufficientHistory {
                    t: slice_extent(s, self.slice_slack),
                    start,
                    end,
                });
            }
        }
        Ok(())
    }

    /// The first broken invariant, as the offending key and a message.
    pub fn violation(&self) -> Option<(&'static str, String)> {
        let bad = |key, m: String| Some((key, m));
        if self.t0 != T0 {
            return bad("t0", format!("t0 is fixed at {T0}, got {}", self.t0));
        }
        if !(self.t_final > self.t0) {
            return bad(
                "t_final",
                format!("t_final must exceed t0 = {}, got {}", self.t0, self.t_final),
            );
        }
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            return bad(
                "cfl",
                format!("cfl must lie in (0, {MAX_CFL}], got {}", self.cfl),
            );
        }
        if let Err(e) = self.grid() {
            let key = if self.n < 16 { "n" } else { "half_extent" };
            return bad(key, e.to_string());
        }
        if !(self.half_extent >= self.t_final + 2.0) {
            return bad(
                "half_extent",
                format!(
                    "box half-extent L = {} must be at least t_final + 2 = {}",
                    self.half_extent,
                    self.t_final + 2.0
                ),
            );
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad(
                "epsilon",
                format!(
                    "epsilon must be a finite nonnegative amplitude, got {}",
                    self.epsilon
                ),
            );
        }
        if self.monitor_order > DEFAULT_MAX_ORDER {
            return bad(
                "monitor_order",
                format!(
                    "monitor order {} exceeds the supported maximum {DEFAULT_MAX_ORDER}",
                    self.monitor_order
                ),
            );
        }
        if !(self.slice_slack >= 0.0 && self.slice_slack < 1.0) {
            return bad(
                "slice_slack",
                format!("slice_slack must lie in [0, 1), got {}", self.slice_slack),
            );
        }
        if !(self.support_tol >= 0.0) {
            return bad(
                "support_tol",
                format!("support_tol must be nonnegative, got {}", self.support_tol),
            );
        }
        if !(self.decay_window[0] < self.decay_window[1]) {
            return bad("decay_window", "decay window must be increasing".into());
        }
        if let Some([a, b]) = self.energy_window {
            if !(a >= T0 && a < b) {
                return bad(
                    "energy_window",
                    "energy window must be increasing and start at s >= 2".into(),
                );
            }
        }
        if !self.coefficients.is_finite() {
            return bad("coeff", "coefficients must be finite".into());
        }
        if self.keep_every == Some(0) {
            return bad("keep_every", "keep_every must be positive".into());
        }
        if let Some(t) = self.transform_at {
            // five centred levels are needed; the grid is valid at this point
            let dt = self.dt().ok()?;
            let last = self.t0 + self.steps().ok()? as f64 * dt;
            if !(t >= self.t0 && t + 2.5 * dt <= last) {
                return bad(
                    "transform_at",
                    format!(
                        "transform_at must lie in [{}, {}], got {t}",
                        self.t0,
                        last - 2.5 * dt
                    ),
                );
            }
        }
        match &self.schedule {
            Schedule::Auto { ds } if !(ds.is_finite() && *ds > 0.0) => bad(
                "schedule.ds",
                format!("schedule step must be positive, got {ds}"),
            ),
            Schedule::Explicit(list)
                if list.windows(2).any(|w| w[1] <= w[0])
                    || list.first().is_some_and(|&s| s < T0) =>
            {
                bad(
                    "schedule",
                    "explicit schedule must increase from s >= 2".into(),
                )
            }
            _ => None,
        }
    }

    /// Largest `s` whose slice (over `r <= t - 1 + slack`) lies inside the integrated range.
    pub fn coverage_limit(&self) -> Result<f64> {
        let dt = self.dt()?;
        let t_last = self.t0 + self.steps()? as f64 * dt;
        let reach = t_last - WARMUP_STEPS as f64 * dt;
        let rho = 1.0 - self.slice_slack;
        Ok((2.0 * rho * reach - rho * rho).max(0.0).sqrt() * (1.0 - 1e-12))
    }

    /// The hyperboloids that will be sampled.
    pub fn slice_values(&self) -> Result<Vec<f64>> {
        match &self.schedule {
            Schedule::Explicit(list) => Ok(list.clone()),
            Schedule::Auto { ds } => {
                let cover = self.coverage_limit()?;
                let mut out = Vec::new();
                let mut k = 0;
                loop {
                    let s = T0 + k as f64 * ds;
                    if s > cover {
                        break;
                    }
                    out.push(s);
                    k += 1;
                }
                Ok(out)
            }
        }
    }

    /// Fit window on `s`, clipped to the schedule.
    pub fn fit_window_s(&self) -> Result<[f64; 2]> {
        if let Some(w) = self.energy_window {
            return Ok(w);
        }
        let values = self.slice_values()?;
        let last = values.last().copied().unwrap_or(T0);
        Ok([2.5, last])
    }
}

/// Largest `t` reached by `H_s` within `r <= t - 1 + slack`.
pub fn slice_extent(s: f64, slack: f64) -> f64 {
    let rho = 1.0 - slack;
    (s * s + rho * rho) / (2.0 * rho)
}

/// Largest radius of `H_s` within `r <= t - 1 + slack`.
pub fn slice_radius(s: f64, slack: f64) -> f64 {
    let rho = 1.0 - slack;
    (s * s - rho * rho) / (2.0 * rho)
}

/// `dt = cfl * h`, both equations having characteristic speed 1.
pub fn cfl_dt(grid: &Grid, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= MAX_CFL) {
        return Err(Error::InvalidArgument(format!(
            "cfl must lie in (0, {MAX_CFL}], got {cfl}"
        )));
    }
    Ok(cfl * grid.spacing())
}
