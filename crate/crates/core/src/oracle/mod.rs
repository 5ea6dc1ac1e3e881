//! Exact-derivative oracle: analytic test fields, identity checks and
//! convergence calibration of the discrete operators.

mod calibrate;
mod expr;
mod identities;

pub use calibrate::{
    calibrate_discrete, calibration_field, calibration_suite, exact_state, Calibration,
    CalibrationSetup, GridOp,
};
pub use expr::Expr;
pub use identities::{
    check_identity, identity_suite, sample_points, standard_fields, test_coefficients, Identity,
    IdentityReport, MIN_POINTS,
};

/// `K f + 2 f` of `f = t^2 - r^2` from the slice integrand, against the closed form `4 s^2`.
///
/// Returns the largest relative deviation over the points.
pub fn conformal_integrand_check(points: &[[f64; 4]]) -> f64 {
    let f = Expr::t().powi(2) - Expr::r2();
    points
        .iter()
        .map(|p| {
            let (t, x) = (p[0], [p[1], p[2], p[3]]);
            let s2 = f.eval(p);
            let k = crate::hyperdiag::density::conformal_k(&f.jet1(p), t, &x, s2.sqrt());
            (k - 4.0 * s2).abs() / (4.0 * s2)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_suite_is_at_rounding_level() {
        for row in identity_suite(MIN_POINTS, 11).unwrap() {
            eprintln!("{row:?}");
            assert!(row.max_residual <= 1e-11, "{row:?}");
        }
    }

    #[test]
    fn every_operator_converges_at_fourth_order() {
        for c in calibration_suite(&CalibrationSetup::default()).unwrap() {
            eprintln!("{c:?}");
            assert!(c.exact || c.order >= 3.5, "{c:?}");
        }
    }

    #[test]
    fn conformal_integrand_matches_the_closed_form() {
        assert!(conformal_integrand_check(&sample_points(MIN_POINTS, 5)) <= 1e-10);
    }
}
