use std::f64::consts::PI;

use super::density::{conformal_density, energy_density, hyperboloidal_derivatives};
use super::*;
use crate::grid::{FieldState, FieldTag, Grid, TimeHistory};
use crate::physics::{CoefficientSet, Jet1};
use crate::solver::{bump, initial_data, run, Profile, RunConfig};

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// `phi(r) = bump(r / rho)` and its radial derivative.
fn radial_bump(r: f64, rho: f64) -> (f64, f64) {
    let q = r / rho;
    if q >= 1.0 {
        return (0.0, 0.0);
    }
    let b = bump(q);
    (b, b * (-2.0 * q / (1.0 - q * q).powi(2)) / rho)
}

/// The same state at every level, so interpolation in time is exact.
fn static_history(g: &Grid, state: &FieldState, t0: f64, dt: f64, levels: usize) -> TimeHistory {
    TimeHistory::synthesize(g, t0, dt, levels, |t| FieldState { t, ..state.clone() }).unwrap()
}

/// `(1 - (r/rho)^2)^8` inside `r < rho` and its radial derivative.
fn radial_cap(r: f64, rho: f64) -> (f64, f64) {
    let q = r / rho;
    if q >= 1.0 {
        return (0.0, 0.0);
    }
    let w = 1.0 - q * q;
    (w.powi(8), -16.0 * q * w.powi(7) / rho)
}

fn radial_state(g: &Grid, profile: impl Fn(f64) -> (f64, f64) + Sync) -> FieldState {
    let mut st = FieldState::zeros(g, 0.0);
    st.u = g.from_fn(|x| profile(crate::geometry::radius(&x)).0);
    st.v = st.u.clone();
    st
}

/// A slice at `s = 3` covering the whole box, from a static history.
fn static_slice(g: &Grid, st: &FieldState) -> HyperboloidSlice {
    let s = 3.0;
    let corner = (s * s + 3.0 * g.half_extent().powi(2)).sqrt();
    let dt = 0.5;
    let levels = ((corner - s) / dt).ceil() as usize + 10;
    let h = static_history(g, st, s - 5.0 * dt, dt, levels);
    sample_hyperboloid(&h, s, 0.5, &CoefficientSet::zero()).unwrap()
}

#[test]
fn zero_fields_give_zero_diagnostics() {
    let g = Grid::new(3.0, 21).unwrap();
    let sl = static_slice(&g, &FieldState::zeros(&g, 0.0));
    for f in [
        Tracked::U,
        Tracked::V,
        Tracked::BoostU(2),
        Tracked::ScalingV,
    ] {
        assert_eq!(energy(&sl, f, 1.0).unwrap(), 0.0);
        assert_eq!(conformal_energy(&sl, f).unwrap(), 0.0);
    }
    assert_eq!(flat_norm(&sl, |_, _| 0.0, 2).unwrap(), 0.0);
    assert_eq!(l2type_check(&sl).unwrap(), 0.0);
    assert_eq!(sobolev_ratio(&sl, FieldTag::U).unwrap(), 0.0);
    assert_eq!(hardy_ratio(&sl).unwrap(), 0.0);
    let d = decay_monitor(&sl);
    assert_eq!(
        [
            d.decay_u,
            d.decay_v,
            d.sup_t32_u,
            d.sup_t32_v,
            d.weighted_du
        ],
        [0.0; 5]
    );
    assert!(flat_norm(&sl, |_, _| 0.0, 3).is_err());
    assert!(energy(&sl, Tracked::BoostU(0), 0.0).is_err());
}

#[test]
fn static_fields_restrict_pointwise() {
    let g = Grid::new(2.0, 21).unwrap();
    let st = radial_state(&g, |r| radial_bump(r, 1.5));
    let sl = static_slice(&g, &st);
    assert_eq!(sl.nodes.len(), g.node_count());
    for n in &sl.nodes {
        assert!((n.u.value - st.u.raw()[n.index]).abs() < 1e-14);
        assert!(n.u.d[0].abs() < 1e-13);
    }
}

#[test]
fn the_defining_function_is_s_squared_on_its_slice() {
    // t^2 - r^2 is quadratic, so cubic interpolation and the stencils are exact
    let g = Grid::new(2.0, 17).unwrap();
    let dt = 0.1;
    let s = 2.5;
    let f = |t: f64, x: [f64; 3]| t * t - crate::geometry::radius(&x).powi(2);
    let h = TimeHistory::synthesize(&g, s - 0.5, dt, 45, |t| {
        let mut st = FieldState::zeros(&g, t);
        st.u = g.from_fn(|x| f(t, x));
        st.ut = g.from_fn(|_| 2.0 * t);
        st
    })
    .unwrap();
    let sl = sample_hyperboloid(&h, s, 0.9, &CoefficientSet::zero()).unwrap();
    assert!(!sl.nodes.is_empty());
    let lim = g.half_extent() - 2.0 * g.spacing();
    for n in sl
        .nodes
        .iter()
        .filter(|n| n.x.iter().all(|c| c.abs() <= lim))
    {
        assert!((n.u.value - s * s).abs() < 1e-11, "{}", n.u.value);
    }
}

#[test]
fn slice_interpolation_is_fourth_order_in_dt() {
    let g = Grid::new(2.0, 17).unwrap();
    let s = 3.0;
    let f = |t: f64, x: [f64; 3]| (1.3 * t + 0.2).sin() * (0.5 * x[0] - 0.3 * x[2]).cos();
    let ft = |t: f64, x: [f64; 3]| 1.3 * (1.3 * t + 0.2).cos() * (0.5 * x[0] - 0.3 * x[2]).cos();
    let error = |dt: f64| {
        let count = ((4.6 - s) / dt) as usize + 12;
        let h = TimeHistory::synthesize(&g, s - 5.0 * dt, dt, count, |t| {
            let mut st = FieldState::zeros(&g, t);
            st.u = g.from_fn(|x| f(t, x));
            st.ut = g.from_fn(|x| ft(t, x));
            st
        })
        .unwrap();
        let sl = sample_hyperboloid(&h, s, 0.0, &CoefficientSet::zero()).unwrap();
        sl.nodes
            .iter()
            .map(|n| (n.u.value - f(n.t, n.x)).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (error(0.2), error(0.1));
    let ratio = coarse / fine;
    assert!((12.0..22.0).contains(&ratio), "{coarse:e} {fine:e} {ratio}");
}

#[test]
fn uncovered_slices_are_rejected() {
    let g = Grid::new(2.0, 17).unwrap();
    let h = static_history(&g, &FieldState::zeros(&g, 0.0), 2.0, 0.1, 10);
    assert!(matches!(
        sample_hyperboloid(&h, 2.5, 0.5, &CoefficientSet::zero()),
        Err(Error::InsufficientHistory { .. })
    ));
    assert!(sample_hyperboloid(&h, 0.0, 0.5, &CoefficientSet::zero()).is_err());
}

#[test]
fn static_energy_and_norm_match_radial_quadrature() {
    // the stencils are fourth order, so the oracle is compared with the
    // Richardson limit of a refinement pair
    let rho = 1.8;
    let measure = |n: usize| {
        let g = Grid::new(1.9, n).unwrap();
        let sl = static_slice(&g, &radial_state(&g, |r| radial_cap(r, rho)));
        let e1 = energy(&sl, Tracked::U, 1.0).unwrap();
        assert!(energy(&sl, Tracked::U, 0.0).unwrap() <= e1);
        let l2 = flat_norm(&sl, |_, n| n.u.value, 2).unwrap();
        let l1 = flat_norm(&sl, |_, n| n.u.value, 1).unwrap();
        [e1, l2, l1]
    };
    let (coarse, fine) = (measure(49), measure(97));
    let limit: [f64; 3] = std::array::from_fn(|k| fine[k] + (fine[k] - coarse[k]) / 15.0);
    let radial = |w: &dyn Fn(f64) -> f64| simpson(0.0, rho, 20_000, |r| 4.0 * PI * r * r * w(r));
    let exact = [
        radial(&|r| {
            let (f, df) = radial_cap(r, rho);
            df * df + f * f
        }),
        radial(&|r| radial_cap(r, rho).0.powi(2)).sqrt(),
        radial(&|r| radial_cap(r, rho).0),
    ];
    for k in 0..3 {
        assert!(
            (limit[k] / exact[k] - 1.0).abs() < 1e-6,
            "{k}: {} {}",
            limit[k],
            exact[k]
        );
    }
    // without extrapolation the fine energy is already within 2e-5
    assert!((fine[0] / exact[0] - 1.0).abs() < 2e-5);
}

/// Field linear in `t`, so every level and interpolant is exact.
fn linear_in_time(g: &Grid, seed: u64) -> TimeHistory {
    let base = initial_data(Profile::RandomSmooth, 1.0, g, seed);
    let s = 2.0;
    let dt = 0.2;
    let corner = (s * s + 3.0 * g.half_extent().powi(2)).sqrt();
    let count = ((corner - s) / dt).ceil() as usize + 12;
    TimeHistory::synthesize(g, s - 5.0 * dt, dt, count, |t| {
        let mut st = FieldState::zeros(g, t);
        st.u = base.u.axpy(t - s, &base.ut);
        st.ut = base.ut.clone();
        st.v = base.v.axpy(t - s, &base.vt);
        st.vt = base.vt.clone();
        st
    })
    .unwrap()
}

#[test]
fn hyperboloidal_gradient_norms_are_controlled_by_the_energy() {
    let g = Grid::new(1.2, 33).unwrap();
    for seed in 0..6 {
        let h = linear_in_time(&g, seed);
        let sl = sample_hyperboloid(&h, 2.0, 0.5, &CoefficientSet::zero()).unwrap();
        let s = sl.s;
        let gradient = |_: &HyperboloidSlice, n: &SliceNode| {
            s / n.t * n.u.d.iter().map(|d| d * d).sum::<f64>().sqrt()
        };
        let mut lhs = flat_norm(&sl, gradient, 2).unwrap();
        for alpha in 0..4 {
            lhs += flat_norm(
                &sl,
                |_, n| hyperboloidal_derivatives(&n.u.jet1(), n.t, &n.x, s)[alpha],
                2,
            )
            .unwrap();
        }
        let e = energy(&sl, Tracked::U, 0.0).unwrap();
        let r = lhs / e.sqrt();
        assert!(r.is_finite() && r <= 3.0, "seed {seed}: {r}");
    }
}

#[test]
fn hardy_ratio_is_stable_under_refinement() {
    let ratio_at = |n: usize| {
        let g = Grid::new(1.2, n).unwrap();
        let h = linear_in_time(&g, 4);
        let sl = sample_hyperboloid(&h, 2.0, 0.5, &CoefficientSet::zero()).unwrap();
        let rec = summarize(&sl, None);
        assert!((rec.ratio_hardy - hardy_ratio(&sl).unwrap()).abs() < 1e-12);
        (rec.ratio_hardy, rec.hardy_uncertainty)
    };
    let (coarse, gap) = ratio_at(25);
    let (fine, _) = ratio_at(49);
    assert!(coarse.is_finite() && coarse > 0.0);
    assert!(
        (coarse - fine).abs() <= 0.05 * fine + gap,
        "{coarse} {fine} {gap}"
    );
}

#[test]
fn summary_matches_the_individual_operations() {
    let g = Grid::new(1.2, 25).unwrap();
    let h = linear_in_time(&g, 2);
    let c = CoefficientSet::all_ones();
    let sl = sample_hyperboloid(&h, 2.2, 0.5, &c).unwrap();
    let rec = summarize(&sl, None);
    let e = &rec.energy;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b.abs().max(1e-300);
    assert!(close(e.e0_u, energy(&sl, Tracked::U, 0.0).unwrap()));
    assert!(close(e.e1_v, energy(&sl, Tracked::V, 1.0).unwrap()));
    assert!(close(e.econ_u, conformal_energy(&sl, Tracked::U).unwrap()));
    for a in 1..=3 {
        assert!(close(
            e.econ_lau[a - 1],
            conformal_energy(&sl, Tracked::BoostU(a)).unwrap()
        ));
        assert!(close(
            e.boot_u[3 + a],
            energy(&sl, Tracked::BoostU(a), 0.0).unwrap()
        ));
    }
    assert!(close(
        e.boot_v[0],
        energy(&sl, Tracked::PartialV(0), 1.0).unwrap()
    ));
    assert!(close(rec.ratio_l2type, l2type_check(&sl).unwrap()));
    assert!(close(
        rec.ratio_sobolev_u,
        sobolev_ratio(&sl, FieldTag::U).unwrap()
    ));
    assert!(close(
        rec.ratio_sobolev_v,
        sobolev_ratio(&sl, FieldTag::V).unwrap()
    ));
    assert!(e.e0_u <= energy(&sl, Tracked::U, 1.0).unwrap());
    for alt in e.e0_u_alt {
        assert!((alt / e.e0_u - 1.0).abs() < 1e-12);
    }
    assert!(e.source_u > 0.0 && e.source_v > 0.0);
}

#[test]
fn ratio_conventions() {
    assert_eq!(ratio(0.0, 0.0).unwrap(), 0.0);
    assert_eq!(ratio(1.0, 2.0).unwrap(), 0.5);
    assert!(matches!(ratio(1.0, 0.0), Err(Error::Inconsistent(_))));
}

/// `u = F(t - r) / r`, an exact free wave once `F(t + r)` has left the region.
fn spherical_wave(t: f64, r: f64) -> Jet1 {
    let (f, df) = radial_bump(t - r - 2.0, 0.9);
    let du_dr = -df / r - f / (r * r);
    Jet1::new(f / r, [df / r, du_dr, 0.0, 0.0])
}

fn radial_integral(s: f64, density: impl Fn(&Jet1, f64, &[f64; 3]) -> f64) -> f64 {
    // the support t - r in (1.1, 2.9) meets H_s for r in (r_lo, r_hi)
    let r_of = |d: f64| (s * s - d * d) / (2.0 * d);
    let (r_lo, r_hi) = (r_of(2.9), r_of(1.1));
    simpson(r_lo, r_hi, 40_000, |r| {
        let t = (s * s + r * r).sqrt();
        4.0 * PI * r * r * density(&spherical_wave(t, r), t, &[r, 0.0, 0.0])
    })
}

#[test]
fn spherical_free_wave_conserves_both_energies() {
    let con = |s: f64| radial_integral(s, |j, t, x| conformal_density(j, t, x, s));
    let e0 = |s: f64| radial_integral(s, |j, t, x| energy_density(j, t, x, s, 0.0));
    let (c3, e3) = (con(3.0), e0(3.0));
    assert!(c3 > 0.0 && e3 > 0.0);
    for s in [4.0, 6.0, 9.0] {
        assert!((con(s) / c3 - 1.0).abs() < 1e-8, "E_con at {s}");
        assert!((e0(s) / e3 - 1.0).abs() < 1e-8, "E_0 at {s}");
    }
}

fn small_run(c: CoefficientSet) -> RunConfig {
    RunConfig {
        half_extent: 7.0,
        n: 30,
        t_final: 4.6,
        epsilon: 0.3,
        coefficients: c,
        schedule: crate::solver::Schedule::Explicit(vec![2.0, 2.25, 2.5]),
        support_tol: f64::INFINITY,
        keep_every: Some(1),
        ..RunConfig::default()
    }
}

#[test]
fn streaming_records_match_materialized_slices() {
    let config = small_run(CoefficientSet::all_ones());
    let out = run(&config).unwrap();
    assert!(out.status.is_completed());
    let kept = out.history.decimated();
    let mut full = TimeHistory::new(kept.len(), out.dt).unwrap();
    for st in kept {
        full.push(st.clone()).unwrap();
    }
    assert_eq!(out.slices.len(), 3);
    for rec in &out.slices {
        let sl =
            sample_hyperboloid(&full, rec.s, config.slice_slack, &config.coefficients).unwrap();
        let direct = summarize(&sl, rec.residual);
        assert_eq!(direct.nodes, rec.nodes);
        assert_eq!(direct.in_cone_nodes, rec.in_cone_nodes);
        let pairs = [
            (direct.energy.e0_u, rec.energy.e0_u),
            (direct.energy.e1_v, rec.energy.e1_v),
            (direct.energy.econ_u, rec.energy.econ_u),
            (direct.energy.source_u, rec.energy.source_u),
            (direct.decay.decay_u, rec.decay.decay_u),
            (direct.ratio_sobolev_v, rec.ratio_sobolev_v),
            (direct.ratio_l2type, rec.ratio_l2type),
        ];
        for (a, b) in pairs {
            assert!((a - b).abs() <= 1e-9 * b.abs(), "s={}: {a} vs {b}", rec.s);
        }
        assert!(rec.residual.is_some());
    }
}

#[test]
fn time_samples_see_the_cone() {
    let g = Grid::new(4.0, 33).unwrap();
    let st = initial_data(Profile::Bump, 0.01, &g, 0);
    let ts = time_sample(&st, 0.5);
    assert_eq!(ts.t, 2.0);
    assert!((ts.sup_u - 0.01).abs() < 1e-15);
    assert_eq!(ts.leak_support, 0.0);
    assert_eq!(ts.leak_slice, 0.0);
    // only r < 1 is inside the cone at t = 2, where the data lives
    assert!(ts.decay_u > 0.0 && ts.decay_v > 0.0);
    let mut moved = st.clone();
    moved.t = 1.2;
    assert!(time_sample(&moved, 0.5).leak_slice > 0.0);
}
