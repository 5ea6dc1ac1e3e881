//! Pointwise integrands on `H_s`, all in terms of a 1-jet at `(t, x)`.

use crate::physics::Jet1;

#[inline]
fn dot(x: &[f64; 3], d: &[f64; 4]) -> f64 {
    x[0] * d[1] + x[1] * d[2] + x[2] * d[3]
}

/// `(d_t f)^2 + |grad f|^2 + 2 (x^a/t) d_t f d_a f + m^2 f^2`.
pub fn energy_cartesian(f: &Jet1, t: f64, x: &[f64; 3], m: f64) -> f64 {
    let d = &f.d;
    d[0] * d[0]
        + d[1] * d[1]
        + d[2] * d[2]
        + d[3] * d[3]
        + 2.0 * dot(x, d) / t * d[0]
        + m * m * f.value * f.value
}

/// `((s/t) d_t f)^2 + sum_a (ud_a f)^2 + m^2 f^2`, the form used for every reported energy.
#[inline]
pub fn energy_density(f: &Jet1, t: f64, x: &[f64; 3], s: f64, m: f64) -> f64 {
    let st = s / t * f.d[0];
    let mut acc = st * st + m * m * f.value * f.value;
    for a in 1..=3 {
        let u = f.semi(a, t, x);
        acc += u * u;
    }
    acc
}

/// `(ud_perp f)^2 + sum_a ((s/t) d_a f)^2 + sum_{a<b} (Omega_ab f / t)^2 + m^2 f^2`.
pub fn energy_rotational(f: &Jet1, t: f64, x: &[f64; 3], s: f64, m: f64) -> f64 {
    let d = &f.d;
    let perp = d[0] + dot(x, d) / t;
    let mut acc = perp * perp + m * m * f.value * f.value;
    let w = s / t;
    for a in 1..=3 {
        acc += (w * d[a]).powi(2);
        for b in a + 1..=3 {
            let omega = x[a - 1] * d[b] - x[b - 1] * d[a];
            acc += (omega / t).powi(2);
        }
    }
    acc
}

/// `K f + 2 f` with `K = s d_s + 2 x^a ud_a` and `d_s = (s/t) d_t` at fixed `x`.
#[inline]
pub fn conformal_k(f: &Jet1, t: f64, x: &[f64; 3], s: f64) -> f64 {
    let tangential: f64 = (1..=3).map(|a| x[a - 1] * f.semi(a, t, x)).sum();
    s * s / t * f.d[0] + 2.0 * tangential + 2.0 * f.value
}

/// `sum_a (s ud_a f)^2 + (K f + 2 f)^2`.
#[inline]
pub fn conformal_density(f: &Jet1, t: f64, x: &[f64; 3], s: f64) -> f64 {
    let mut acc = conformal_k(f, t, x, s).powi(2);
    for a in 1..=3 {
        acc += (s * f.semi(a, t, x)).powi(2);
    }
    acc
}

/// `od_0 f = (s/t) d_t f` and `od_a f = ud_a f`.
pub fn hyperboloidal_derivatives(f: &Jet1, t: f64, x: &[f64; 3], s: f64) -> [f64; 4] {
    [
        s / t * f.d[0],
        f.semi(1, t, x),
        f.semi(2, t, x),
        f.semi(3, t, x),
    ]
}
