//! Exact identities checked on random in-cone points, with both sides
//! evaluated from exact derivatives and (where one exists) the production
//! formula on one side.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Expr;
use crate::error::{Error, Result};
use crate::geometry::{frame_weights, SpacetimePoint};
use crate::physics::{jet, CoefficientSet};

/// Minimum number of sample points per identity.
pub const MIN_POINTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Identity {
    NullDecomposition,
    NullLeibnizPartial,
    NullLeibnizBoost,
    CommutatorPartialBoost,
    CommutatorBoostBoost,
    FrameRoundtrip,
    BoxProductExpansion,
    TransformExpansion,
}

impl Identity {
    pub const ALL: [Identity; 8] = [
        Identity::NullDecomposition,
        Identity::NullLeibnizPartial,
        Identity::NullLeibnizBoost,
        Identity::CommutatorPartialBoost,
        Identity::CommutatorBoostBoost,
        Identity::FrameRoundtrip,
        Identity::BoxProductExpansion,
        Identity::TransformExpansion,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Identity::NullDecomposition => "null-decomposition",
            Identity::NullLeibnizPartial => "null-leibniz-∂",
            Identity::NullLeibnizBoost => "null-leibniz-L",
            Identity::CommutatorPartialBoost => "commutator-[∂,L]",
            Identity::CommutatorBoostBoost => "commutator-[L,L]",
            Identity::FrameRoundtrip => "frame-roundtrip",
            Identity::BoxProductExpansion => "box-product-expansion",
            Identity::TransformExpansion => "transform-expansion",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Identity {
    type Err = Error;

    /// Accepts the canonical ids, and `d` for `∂` so they can be typed.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('∂', "d");
        Identity::ALL
            .into_iter()
            .find(|i| i.id().replace('∂', "d") == norm)
            .ok_or_else(|| Error::UnknownIdentity(s.to_string()))
    }
}

/// `count` points with `t` in `[3, 10]` and `r <= t - 1.5`, uniform in the ball.
pub fn sample_points(count: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t: f64 = rng.gen_range(3.0..10.0);
            let r = (t - 1.5) * rng.gen::<f64>().cbrt();
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let rho = (1.0 - z * z).sqrt();
            [t, r * rho * phi.cos(), r * rho * phi.sin(), r * z]
        })
        .collect()
}

/// The default family of analytic test fields.
pub fn standard_fields() -> Vec<Expr> {
    let (t, x1, x2, x3) = (Expr::t(), Expr::x(1), Expr::x(2), Expr::x(3));
    vec![
        t.powi(2) - Expr::r2(),
        t.sin() * x1.cos(),
        t.scale(-0.2).exp() * (x1.clone() * x2.clone() + x3.scale(0.5)),
        (x2.scale(0.7) - t.scale(0.3)).cos() * (x3.scale(0.4) + x1.scale(0.1)).sin(),
        t.powi(3).scale(0.01) - (x1.powi(2) * x3.clone()).scale(0.05) + (t * x2).scale(0.1),
    ]
}

/// Fixed, generic coefficients for the transform expansion.
pub fn test_coefficients() -> CoefficientSet {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut c = CoefficientSet::zero();
    let mut draw = || rng.gen_range(-1.0..1.0);
    c.mu = draw();
    for a in 0..3 {
        c.mu_a[a] = draw();
        c.nu_a[a] = draw();
        c.mv_a[a] = draw();
        c.nv_a[a] = draw();
        for b in 0..3 {
            c.nu_ab[a][b] = draw();
            c.nv_ab[a][b] = draw();
        }
    }
    c.mv = draw();
    c
}

fn rel(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + lhs.abs())
}

fn split(p: &[f64; 4]) -> (f64, [f64; 3]) {
    (p[0], [p[1], p[2], p[3]])
}

/// Max of `|LHS - RHS| / (1 + |LHS|)` over all points, fields (or ordered
/// pairs of fields) and free indices.
pub fn check_identity(id: Identity, fields: &[Expr], points: &[[f64; 4]]) -> Result<f64> {
    if fields.is_empty() || points.is_empty() {
        return Err(Error::InvalidArgument(
            "identity check needs fields and points".into(),
        ));
    }
    let mut worst = 0.0f64;
    let mut note = |r: f64| worst = crate::reduce::nan_max(worst, r);
    let pairs: Vec<(&Expr, &Expr)> = fields
        .iter()
        .flat_map(|f| fields.iter().map(move |g| (f, g)))
        .collect();
    match id {
        Identity::NullDecomposition => {
            for (f, g) in &pairs {
                let q = f.null_form(g);
                for p in points {
                    let (t, x) = split(p);
                    note(rel(
                        q.eval(p),
                        jet::null_decomposed(&f.jet1(p), &g.jet1(p), t, &x),
                    ));
                }
            }
        }
        Identity::NullLeibnizPartial | Identity::NullLeibnizBoost => {
            let boost = id == Identity::NullLeibnizBoost;
            for (f, g) in &pairs {
                let q = f.null_form(g);
                for k in if boost { 1..4 } else { 0..4 } {
                    let lhs = if boost { q.boost(k) } else { q.derivative(k) };
                    for p in points {
                        let (t, x) = split(p);
                        let (fj, gj) = (f.jet2(p), g.jet2(p));
                        let (fk, gk) = if boost {
                            (fj.boost(k, t, &x), gj.boost(k, t, &x))
                        } else {
                            (fj.partial(k), gj.partial(k))
                        };
                        let rhs = jet::null_form(&fk.d, &gj.d) + jet::null_form(&fj.d, &gk.d);
                        note(rel(lhs.eval(p), rhs));
                    }
                }
            }
        }
        Identity::CommutatorPartialBoost => {
            // [d_alpha, L_a] = d_a for alpha = 0, delta_{ab} d_t for alpha = b
            for f in fields {
                for a in 1..4 {
                    for alpha in 0..4 {
                        let exact = if alpha == 0 {
                            f.derivative(a)
                        } else if alpha == a {
                            f.derivative(0)
                        } else {
                            Expr::constant(0.0)
                        };
                        let symbolic = f.boost(a).derivative(alpha) - f.derivative(alpha).boost(a);
                        for p in points {
                            let (t, x) = split(p);
                            let fj = f.jet2(p);
                            let discrete =
                                fj.boost(a, t, &x).d[alpha] - fj.partial(alpha).boost(a, t, &x);
                            let rhs = exact.eval(p);
                            note(rel(discrete, rhs));
                            note(rel(symbolic.eval(p), rhs));
                        }
                    }
                }
            }
        }
        Identity::CommutatorBoostBoost => {
            // [L_a, L_b] = Omega_ab
            for f in fields {
                for a in 1..4 {
                    for b in 1..4 {
                        let omega = f.rotation(a, b);
                        let symbolic = f.boost(b).boost(a) - f.boost(a).boost(b);
                        for p in points {
                            let (t, x) = split(p);
                            let fj = f.jet2(p);
                            let jets = fj.boost(b, t, &x).boost(a, t, &x)
                                - fj.boost(a, t, &x).boost(b, t, &x);
                            let rhs = omega.eval(p);
                            note(rel(jets, rhs));
                            note(rel(symbolic.eval(p), rhs));
                        }
                    }
                }
            }
        }
        Identity::FrameRoundtrip => {
            for f in fields {
                for p in points {
                    let (t, x) = split(p);
                    let w = frame_weights(&SpacetimePoint::new(t, x))?;
                    let fj = f.jet1(p);
                    let apply = |m: &[[f64; 4]; 4], v: &[f64; 4]| -> [f64; 4] {
                        std::array::from_fn(|i| (0..4).map(|k| m[i][k] * v[k]).sum())
                    };
                    // the semi-hyperboloidal components, then back
                    let semi = apply(&w.semi, &fj.d);
                    for a in 1..4 {
                        note(rel(semi[a], fj.semi(a, t, &x)));
                        let exact = (Expr::x(a) * f.derivative(0)).scale(1.0 / t) + f.derivative(a);
                        note(rel(exact.eval(p), semi[a]));
                    }
                    let back = apply(&w.semi_inverse, &semi);
                    let hyp = w.hyperboloidal.as_ref().expect("in-cone point");
                    let again = apply(&hyp.inverse, &apply(&hyp.forward, &fj.d));
                    for k in 0..4 {
                        note(rel(fj.d[k], back[k]));
                        note(rel(fj.d[k], again[k]));
                    }
                }
            }
        }
        Identity::BoxProductExpansion => {
            for (f, g) in &pairs {
                let lhs = ((*f).clone() * (*g).clone()).wave_box();
                let (bf, bg) = (f.wave_box(), g.wave_box());
                for p in points {
                    let q = jet::null_form(&f.jet1(p).d, &g.jet1(p).d);
                    let rhs = f.eval(p) * bg.eval(p) + g.eval(p) * bf.eval(p) + 2.0 * q;
                    note(rel(lhs.eval(p), rhs));
                }
            }
        }
        Identity::TransformExpansion => {
            // -box(u + Q_u) = -box u + sum C_ij [(-box A_i) B_j + A_i (-box B_j)] + N(u, v)
            let c = test_coefficients().u_matrix();
            for (u, v) in &pairs {
                let factors = |f: &Expr| -> [Expr; 5] {
                    [
                        f.clone(),
                        f.derivative(0),
                        f.derivative(1),
                        f.derivative(2),
                        f.derivative(3),
                    ]
                };
                let (a, b) = (factors(u), factors(v));
                let mut q = Expr::constant(0.0);
                for i in 0..5 {
                    for j in 0..5 {
                        q = q + (a[i].clone() * b[j].clone()).scale(c[i][j]);
                    }
                }
                let lhs = -((*u).clone() + q).wave_box();
                let box_a: Vec<Expr> = a.iter().map(|e| -e.wave_box()).collect();
                let box_b: Vec<Expr> = b.iter().map(|e| -e.wave_box()).collect();
                let minus_box_u = -u.wave_box();
                for p in points {
                    let mut rhs = minus_box_u.eval(p) + jet::null_terms(&c, &u.jet2(p), &v.jet2(p));
                    for i in 0..5 {
                        for j in 0..5 {
                            if c[i][j] != 0.0 {
                                rhs += c[i][j]
                                    * (box_a[i].eval(p) * b[j].eval(p)
                                        + a[i].eval(p) * box_b[j].eval(p));
                            }
                        }
                    }
                    note(rel(lhs.eval(p), rhs));
                }
            }
        }
    }
    Ok(worst)
}

/// One row of the identity table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub id: String,
    pub points: usize,
    pub max_residual: f64,
}

/// Every identity on the standard fields at `points` random in-cone points.
pub fn identity_suite(points: usize, seed: u64) -> Result<Vec<IdentityReport>> {
    let pts = sample_points(points.max(MIN_POINTS), seed);
    let fields = standard_fields();
    Identity::ALL
        .into_iter()
        .map(|id| {
            // the transform expansion differentiates three times; fewer pairs keep it quick
            let fields = if id == Identity::TransformExpansion {
                &fields[..3]
            } else {
                &fields[..]
            };
            Ok(IdentityReport {
                id: id.id().to_string(),
                points: pts.len(),
                max_residual: check_identity(id, fields, &pts)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_and_reject_unknown() {
        for id in Identity::ALL {
            assert_eq!(id.id().parse::<Identity>().unwrap(), id);
        }
        assert_eq!(
            "commutator-[d,L]".parse::<Identity>().unwrap(),
            Identity::CommutatorPartialBoost
        );
        assert!(matches!(
            "null-leibniz-x".parse::<Identity>(),
            Err(Error::UnknownIdentity(_))
        ));
    }

    #[test]
    fn sample_points_lie_in_the_box() {
        let pts = sample_points(500, 3);
        for p in &pts {
            let r = (p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt();
            assert!((3.0..10.0).contains(&p[0]) && r <= p[0] - 1.5);
        }
        assert_eq!(pts, sample_points(500, 3));
    }

    #[test]
    fn null_decomposition_of_the_hyperbolic_time() {
        let s2 = Expr::t().powi(2) - Expr::r2();
        let pts = sample_points(MIN_POINTS, 1);
        assert!(
            check_identity(Identity::NullDecomposition, std::slice::from_ref(&s2), &pts).unwrap()
                <= 1e-12
        );
        for p in &pts {
            assert!(
                (s2.null_form(&s2).eval(p) + 4.0 * s2.eval(p)).abs()
                    <= 1e-12 * (1.0 + s2.eval(p).abs())
            );
        }
    }

    #[test]
    fn commutators_are_exact_on_polynomials() {
        let f = Expr::t().powi(2) * Expr::x(1) - Expr::x(2).powi(3) + Expr::x(3);
        let pts = sample_points(MIN_POINTS, 2);
        assert!(
            check_identity(
                Identity::CommutatorPartialBoost,
                std::slice::from_ref(&f),
                &pts
            )
            .unwrap()
                < 1e-13
        );
        assert!(check_identity(Identity::CommutatorBoostBoost, &[f], &pts).unwrap() < 1e-13);
    }
}
