//! Method-of-lines RK4 integration from `t = 2`.

mod config;
mod data;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{support_slack, FieldState, Grid, TimeHistory, GHOST};
use crate::hyperdiag::{time_sample, SliceAccumulator, SliceRecord, TimeSample};
use crate::physics::{jet, state_jet1, CoefficientSet};

pub use config::{cfl_dt, slice_extent, slice_radius, RunConfig, Schedule, MAX_CFL, WARMUP_STEPS};
pub use data::{bump, cap, initial_data, Profile, CAP_POWER};

/// Levels held by the diagnostic ring.
pub const RING_LEVELS: usize = 8;

/// Classical RK4 for `(u, ut, v, vt)`, reusing its stage buffers across steps.
pub struct Integrator {
    cu: [[f64; 5]; 5],
    cv: [[f64; 5]; 5],
    nonlinear: bool,
    stage: FieldState,
    k: FieldState,
}

impl Integrator {
    pub fn new(grid: &Grid, c: &CoefficientSet) -> Self {
        Self {
            cu: c.u_matrix(),
            cv: c.v_matrix(),
            nonlinear: !c.is_zero(),
            stage: FieldState::zeros(grid, 0.0),
            k: FieldState::zeros(grid, 0.0),
        }
    }

    /// One step of size `dt` (negative steps integrate backwards).
    pub fn step(&mut self, y: &FieldState, dt: f64) -> Result<FieldState> {
        let mut acc = y.clone();
        const STAGES: [(f64, f64); 4] = [
            (1.0 / 6.0, 0.5),
            (1.0 / 3.0, 0.5),
            (1.0 / 3.0, 1.0),
            (1.0 / 6.0, 0.0),
        ];
        self.stage.clone_from(y);
        for (s, &(b, a)) in STAGES.iter().enumerate() {
            rhs(&self.cu, &self.cv, self.nonlinear, &self.stage, &mut self.k);
            update(y, &self.k, &mut acc, &mut self.stage, b * dt, a * dt, s < 3);
            if y.grid().is_periodic() {
                for f in self.stage.fields_mut() {
                    f.wrap_ghosts();
                }
            }
        }
        acc.t = y.t + dt;
        if y.grid().is_periodic() {
            for f in acc.fields_mut() {
                f.wrap_ghosts();
            }
        }
        if !acc.is_finite() {
            return Err(Error::Blowup { t: acc.t });
        }
        Ok(acc)
    }
}

/// `k = (ut, Laplacian u + Q_u, vt, Laplacian v - v + Q_v)` on the interior.
fn rhs(
    cu: &[[f64; 5]; 5],
    cv: &[[f64; 5]; 5],
    nonlinear: bool,
    s: &FieldState,
    k: &mut FieldState,
) {
    let g = *s.grid();
    let n = g.n();
    let p = g.stride();
    let plane = p * p;
    let range = plane * GHOST..plane * (GHOST + n);
    let [ku, kut, kv, kvt] = k.fields_mut().map(|f| &mut f.raw_mut()[range.clone()]);
    let (u, ut, v, vt) = (&s.u, s.ut.raw(), &s.v, s.vt.raw());
    ku.par_chunks_mut(plane)
        .zip(kut.par_chunks_mut(plane))
        .zip(kv.par_chunks_mut(plane))
        .zip(kvt.par_chunks_mut(plane))
        .enumerate()
        .for_each(|(kk, (((a, b), c), d))| {
            let base = plane * (kk + GHOST);
            for j in 0..n {
                let row = p * (j + GHOST) + GHOST;
                for i in 0..n {
                    let loc = row + i;
                    let idx = base + loc;
                    let (qu, qv) = if nonlinear {
                        let ju = state_jet1(s, crate::grid::FieldTag::U, idx);
                        let jv = state_jet1(s, crate::grid::FieldTag::V, idx);
                        (jet::source(cu, &ju, &jv), jet::source(cv, &ju, &jv))
                    } else {
                        (0.0, 0.0)
                    };
                    a[loc] = ut[idx];
                    b[loc] = u.laplacian_at(idx) + qu;
                    c[loc] = vt[idx];
                    d[loc] = v.laplacian_at(idx) - v.raw()[idx] + qv;
                }
            }
        });
}

/// `acc += wacc * k` and, unless last, `stage = y + wstage * k`.
fn update(
    y: &FieldState,
    k: &FieldState,
    acc: &mut FieldState,
    stage: &mut FieldState,
    wacc: f64,
    wstage: f64,
    set_stage: bool,
) {
    let plane = y.grid().stride().pow(2);
    for ((yf, kf), (af, sf)) in y
        .fields()
        .into_iter()
        .zip(k.fields())
        .zip(acc.fields_mut().into_iter().zip(stage.fields_mut()))
    {
        let (yr, kr) = (yf.raw(), kf.raw());
        af.raw_mut()
            .par_chunks_mut(plane)
            .zip(sf.raw_mut().par_chunks_mut(plane))
            .enumerate()
            .for_each(|(z, (a, s))| {
                let off = z * plane;
                for i in 0..a.len() {
                    let kv = kr[off + i];
                    a[i] += wacc * kv;
                    if set_stage {
                        s[i] = yr[off + i] + wstage * kv;
                    }
                }
            });
    }
}

/// One RK4 step of the full system.
pub fn step(state: &FieldState, c: &CoefficientSet, dt: f64) -> Result<FieldState> {
    Integrator::new(state.grid(), c).step(state, dt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    Aborted { reason: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// What a run produced, including partial diagnostics of an aborted run.
#[derive(Debug)]
pub struct EvolutionOutcome {
    pub status: RunStatus,
    pub steps: usize,
    pub wall_time: Duration,
    pub t_end: f64,
    pub dt: f64,
    pub history: TimeHistory,
    pub slices: Vec<SliceRecord>,
    pub series: Vec<TimeSample>,
    /// Every support check along the run passed.
    pub support_ok: bool,
    /// Residual at `transform_at`, once the run got past it.
    pub transform_residual: Option<f64>,
}

/// One progress report, printed once per unit of `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Progress {
    pub t: f64,
    pub s_max: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub ok: bool,
}

impl std::fmt::Display for Progress {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s_max = if self.s_max.is_nan() {
            "-".to_string()
        } else {
            format!("{:.6}", self.s_max)
        };
        write!(
            f,
            "t={:.6} s_max={s_max} sup|u|={:.6e} sup|v|={:.6e} status={}",
            self.t,
            self.sup_u,
            self.sup_v,
            if self.ok { "ok" } else { "warn" }
        )
    }
}

/// Callbacks invoked along a run.
pub trait Observer {
    fn progress(&mut self, _p: &Progress) {}
    fn state(&mut self, _state: &FieldState) {}
}

impl Observer for () {}

pub fn run(config: &RunConfig) -> Result<EvolutionOutcome> {
    run_with(config, &mut ())
}

/// Integrates `[2, t_final]`, sampling every scheduled hyperboloid on the fly.
///
/// Errors are returned only for invalid configurations; blowup and support
/// violations end the run with an aborted status and partial diagnostics.
pub fn run_with(config: &RunConfig, observer: &mut dyn Observer) -> Result<EvolutionOutcome> {
    config.validate()?;
    let started = Instant::now();
    let grid = config.grid()?;
    let dt = config.dt()?;
    let steps = config.steps()?;
    let c = &config.coefficients;
    let mut integrator = Integrator::new(&grid, c);

    let first = Arc::new(initial_data(
        config.profile,
        config.epsilon,
        &grid,
        config.seed,
    ));
    let mut ring = TimeHistory::new(RING_LEVELS, dt)?;
    if let Some(every) = config.keep_every {
        ring = ring.with_decimation(every);
    }
    let mut status = RunStatus::Completed;
    let mut back = vec![first.clone()];
    for _ in 0..WARMUP_STEPS {
        match integrator.step(back.last().unwrap(), -dt) {
            Ok(prev) => back.push(Arc::new(prev)),
            Err(e) => {
                status = RunStatus::Aborted {
                    reason: e.to_string(),
                };
                break;
            }
        }
    }
    for st in back.into_iter().rev() {
        ring.push(st)?;
    }

    let mut acc = SliceAccumulator::new(&grid, config, config.slice_values()?)?;
    let mut series = Vec::with_capacity(steps + 1);
    let slack4h = support_slack(&grid);
    let mut support_ok = true;
    let mut next_report = config.t0.floor() + 1.0;

    // nominal amplitude: a coarse grid may miss the peak of the data entirely
    let tol = config.support_tol * config.epsilon;
    let check = |st: &FieldState, series: &mut Vec<TimeSample>| -> Option<String> {
        let sample = time_sample(st, config.slice_slack);
        series.push(sample);
        if !(sample.leak_support <= tol) {
            return Some(
                Error::SupportViolation {
                    t: st.t,
                    value: sample.leak_support,
                    slack: slack4h,
                }
                .to_string(),
            );
        }
        None
    };
    if let Some(reason) = check(&first, &mut series) {
        support_ok = false;
        if status.is_completed() {
            status = RunStatus::Aborted { reason };
        }
    }
    observer.state(&first);

    let mut transform_residual = None;
    let mut done = 0;
    while status.is_completed() && done < steps {
        let y = ring.latest().expect("ring is seeded").clone();
        let next = match integrator.step(&y, dt) {
            Ok(s) => s,
            Err(e) => {
                status = RunStatus::Aborted {
                    reason: e.to_string(),
                };
                break;
            }
        };
        // keep the grid time exact rather than accumulating rounding
        let next = FieldState {
            t: config.t0 + (done + 1) as f64 * dt,
            ..next
        };
        done += 1;
        if let Some(reason) = check(&next, &mut series) {
            support_ok = false;
            status = RunStatus::Aborted { reason };
        }
        observer.state(&next);
        ring.push(Arc::new(next))?;
        if ring.len() == RING_LEVELS {
            let levels: Vec<&FieldState> = ring.levels().collect();
            acc.process(&levels, dt)?;
        }
        if let (Some(t_star), None) = (config.transform_at, transform_residual) {
            let tail: Vec<&FieldState> = ring.levels().skip(ring.len().saturating_sub(5)).collect();
            let spaced = tail
                .windows(2)
                .all(|w| (w[1].t - w[0].t - dt).abs() < 1e-6 * dt);
            if tail.len() == 5 && spaced && (tail[2].t - t_star).abs() <= 0.5 * dt + 1e-9 {
                transform_residual = Some(crate::physics::residual_on_levels(&tail, dt, c)?);
            }
        }
        let last = *series.last().unwrap();
        if last.t + 1e-9 >= next_report || done == steps || !status.is_completed() {
            while next_report <= last.t + 1e-9 {
                next_report += 1.0;
            }
            observer.progress(&Progress {
                t: last.t,
                s_max: acc.completed_s_max(),
                sup_u: last.sup_u,
                sup_v: last.sup_v,
                ok: last.leak_support <= tol,
            });
        }
    }

    Ok(EvolutionOutcome {
        status,
        steps: done,
        wall_time: started.elapsed(),
        t_end: ring.latest().map(|s| s.t).unwrap_or(config.t0),
        dt,
        slices: acc.finish(),
        history: ring,
        series,
        support_ok,
        transform_residual,
    })
}
