//! Minkowski coordinates, the light cone `K = {r < t - 1}`, the hyperboloids
//! `H_s = {t^2 - r^2 = s^2}` and the change-of-frame algebra between the
//! Cartesian frame, the semi-hyperboloidal frame and the hyperboloidal frame.
//!
//! Signature is `(-, +, +, +)`; index 0 is time, 1..=3 are space.

use crate::error::{Error, Result};

/// Initial time of every evolution.
pub const T0: f64 = 2.0;
/// Hyperbolic time of the initial hyperboloid.
pub const S0: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: [f64; 3],
}

impl SpacetimePoint {
    pub fn new(t: f64, x: [f64; 3]) -> Self {
        Self { t, x }
    }

    #[inline]
    pub fn r(&self) -> f64 {
        radius(&self.x)
    }

    /// Coordinate `x^alpha` with `x^0 = t`.
    #[inline]
    pub fn coord(&self, alpha: usize) -> f64 {
        if alpha == 0 {
            self.t
        } else {
            self.x[alpha - 1]
        }
    }
}

/// Label `s` of a hyperboloid `H_s`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct HyperboloidLabel(f64);

impl HyperboloidLabel {
    pub fn new(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "hyperbolic time must be positive, got {s}"
            )));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[inline]
pub fn radius(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// `s = sqrt(t^2 - r^2)`; rejects points on or outside the light cone of the origin.
pub fn hyperbolic_time(p: &SpacetimePoint) -> Result<f64> {
    let r = p.r();
    if !(p.t > r) {
        return Err(Error::OutsideFoliation { t: p.t, r });
    }
    // (t - r)(t + r) keeps precision when t is close to r
    Ok(((p.t - r) * (p.t + r)).sqrt())
}

/// Time at which `H_s` passes over the spatial point `x`: `sqrt(s^2 + r^2)`.
pub fn slice_time(s: f64, x: &[f64; 3]) -> Result<f64> {
    let s = HyperboloidLabel::new(s)?.value();
    let r = radius(x);
    Ok(s.hypot(r))
}

/// Strict membership in `K = {r < t - 1}`.
pub fn in_cone(p: &SpacetimePoint) -> bool {
    p.r() < p.t - 1.0
}

/// Change-of-frame coefficients at one point.
///
/// Rows are frame vectors, columns their components on `(d_t, d_1, d_2, d_3)`.
/// `semi` holds `(d_0, ud_1, ud_2, ud_3)` with `ud_a = (x^a/t) d_t + d_a`;
/// `semi_inverse` expresses the Cartesian frame back in the semi-hyperboloidal
/// one (`d_a = -(x^a/t) d_t + ud_a`).
#[derive(Clone, Debug, PartialEq)]
pub struct FrameWeights {
    pub semi: [[f64; 4]; 4],
    pub semi_inverse: [[f64; 4]; 4],
    /// `ud_perp = d_t + (x^a/t) d_a`, orthogonal to the hyperboloids.
    pub perp: [f64; 4],
    /// Present only inside the light cone of the origin (`t > r`).
    pub hyperboloidal: Option<HyperboloidalFrame>,
}

/// `(d_s, ud_1, ud_2, ud_3)` with `d_s = (s/t) d_t`, and its inverse
/// `d_t = (t/s) d_s`, `d_a = -(x^a/s) d_s + ud_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperboloidalFrame {
    pub s: f64,
    pub forward: [[f64; 4]; 4],
    pub inverse: [[f64; 4]; 4],
}

impl FrameWeights {
    /// Weight of `d_t` in `d_s`, i.e. `s/t`.
    pub fn hyperbolic_time_weight(&self) -> Option<f64> {
        self.hyperboloidal.as_ref().map(|h| h.forward[0][0])
    }
}

pub fn frame_weights(p: &SpacetimePoint) -> Result<FrameWeights> {
    let t = p.t;
    if t == 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "frame weights need t != 0, got {t}"
        )));
    }
    let w = [p.x[0] / t, p.x[1] / t, p.x[2] / t];

    let mut semi = [[0.0; 4]; 4];
    let mut semi_inverse = [[0.0; 4]; 4];
    semi[0][0] = 1.0;
    semi_inverse[0][0] = 1.0;
    for a in 1..4 {
        semi[a][0] = w[a - 1];
        semi[a][a] = 1.0;
        semi_inverse[a][0] = -w[a - 1];
        semi_inverse[a][a] = 1.0;
    }
    let perp = [1.0, w[0], w[1], w[2]];

    let hyperboloidal = if t > p.r() {
        let s = hyperbolic_time(p)?;
        let mut forward = semi;
        forward[0][0] = s / t;
        let mut inverse = [[0.0; 4]; 4];
        inverse[0][0] = t / s;
        for a in 1..4 {
            inverse[a][0] = -p.x[a - 1] / s;
            inverse[a][a] = 1.0;
        }
        Some(HyperboloidalFrame {
            s,
            forward,
            inverse,
        })
    } else {
        None
    };

    Ok(FrameWeights {
        semi,
        semi_inverse,
        perp,
        hyperboloidal,
    })
}

/// Product of two frame matrices, for composing a change of frame with its inverse.
///
/// `compose(a, b)[i][j] = sum_k a[i][k] * b[k][j]`; with `a` expressing frame B
/// in frame A and `b` expressing frame A in frame B the product is the identity.
pub fn compose(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}
