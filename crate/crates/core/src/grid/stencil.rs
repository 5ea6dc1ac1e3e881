//! Fourth-order centered finite-difference and interpolation weights.

/// First derivative on offsets `-2..=2`, to be divided by `h`.
pub const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];

/// Second derivative on offsets `-2..=2`, to be divided by `h^2`.
pub const D2: [f64; 5] = [
    -1.0 / 12.0,
    16.0 / 12.0,
    -30.0 / 12.0,
    16.0 / 12.0,
    -1.0 / 12.0,
];

/// Antisymmetric evaluation of [`D1`] (times `h`); exactly zero on constants.
#[inline]
pub fn d1(fm2: f64, fm1: f64, fp1: f64, fp2: f64) -> f64 {
    (8.0 * (fp1 - fm1) - (fp2 - fm2)) / 12.0
}

/// Symmetric evaluation of [`D2`] (times `h^2`).
#[inline]
pub fn d2(fm2: f64, fm1: f64, f0: f64, fp1: f64, fp2: f64) -> f64 {
    (16.0 * (fm1 + fp1) - (fm2 + fp2) - 30.0 * f0) / 12.0
}

/// Lagrange weights at `x` for the nodes `xs`.
pub fn lagrange_weights<const N: usize>(xs: &[f64; N], x: f64) -> [f64; N] {
    let mut w = [1.0; N];
    for i in 0..N {
        for j in 0..N {
            if i != j {
                w[i] *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
    }
    w
}

/// Cubic interpolation weights on four equispaced levels `tau0 + k*dt`, `k = 0..4`.
///
/// The weights are one-hot when `x` lies within rounding of a level.
pub fn cubic_weights(tau0: f64, dt: f64, x: f64) -> [f64; 4] {
    let theta = (x - tau0) / dt;
    for k in 0..4 {
        if (theta - k as f64).abs() < 1e-12 {
            let mut w = [0.0; 4];
            w[k] = 1.0;
            return w;
        }
    }
    lagrange_weights(&[0.0, 1.0, 2.0, 3.0], theta)
}
