//! Per-node contributions to every slice diagnostic, and their reduction.

use super::density::{conformal_density, energy_cartesian, energy_density, energy_rotational};
use crate::geometry::radius;
use crate::physics::{jet, Jet1, Jet2};

pub(crate) const E0_U: usize = 0;
pub(crate) const E0_U_CART: usize = 1;
pub(crate) const E0_U_ROT: usize = 2;
pub(crate) const E1_V: usize = 3;
pub(crate) const ECON_U: usize = 4;
/// `E_con(L_a u)`, three entries.
pub(crate) const ECON_LAU: usize = 5;
pub(crate) const SRC_U: usize = 8;
pub(crate) const SRC_V: usize = 9;
/// `||L^J u||^2` for `J` in `[], [L1], [L2], [L3]`, then `[La, Lb]` row-major.
pub(crate) const LJ_U: usize = 10;
pub(crate) const LJ_V: usize = 23;
pub(crate) const LJ_COUNT: usize = 13;
pub(crate) const HARDY_NUM: usize = 36;
/// `||ud_a u||^2`, three entries.
pub(crate) const HARDY_DEN: usize = 37;
/// `||(s/t) u||^2`, `||(s/t) L_0 u||^2`, `||(s/t) L_a u||^2`.
pub(crate) const L2_WEIGHTED: usize = 40;
/// `E(d_alpha u)`, `E(L_a u)`, `E(L_0 u)`.
pub(crate) const BOOT_U: usize = 45;
/// `E_1` of the same derivatives of `v`.
pub(crate) const BOOT_V: usize = 53;
pub(crate) const BOOT_COUNT: usize = 8;
pub(crate) const NODES: usize = 61;
const _: () = assert!(
    LJ_V == LJ_U + LJ_COUNT
        && HARDY_NUM == LJ_V + LJ_COUNT
        && BOOT_V == BOOT_U + BOOT_COUNT
        && NODES == BOOT_V + BOOT_COUNT
);
pub(crate) const IN_CONE: usize = 62;
pub(crate) const NS: usize = 63;

pub(crate) const DECAY_U: usize = 0;
pub(crate) const DECAY_V: usize = 1;
pub(crate) const SUP_T32_U: usize = 2;
pub(crate) const SUP_T32_V: usize = 3;
pub(crate) const WEIGHTED_DU: usize = 4;
/// `sup u^2` over the nodes the Hardy integral leaves out.
pub(crate) const HARDY_EXCLUDED: usize = 5;
pub(crate) const NM: usize = 6;

/// Sums (before the `h^3` weight) and maxima over a set of slice nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Terms {
    pub sums: [f64; NS],
    pub max: [f64; NM],
}

impl Terms {
    pub const ZERO: Terms = Terms {
        sums: [0.0; NS],
        max: [0.0; NM],
    };

    pub fn combine(mut self, other: Terms) -> Terms {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a += b;
        }
        for (a, b) in self.max.iter_mut().zip(other.max) {
            *a = crate::reduce::nan_max(*a, b);
        }
        self
    }
}

/// Everything one node of `H_s` contributes, given the 2-jets of `u` and `v` there.
#[allow(clippy::too_many_arguments)]
pub(crate) fn node_terms(
    x: &[f64; 3],
    t: f64,
    s: f64,
    u: &Jet2,
    v: &Jet2,
    cu: &[[f64; 5]; 5],
    cv: &[[f64; 5]; 5],
    h: f64,
) -> Terms {
    let mut out = Terms::ZERO;
    let o = &mut out.sums;
    let r = radius(x);
    let u1 = u.jet1();
    let v1 = v.jet1();
    let lu: [Jet1; 3] = std::array::from_fn(|a| u.boost(a + 1, t, x));
    let lv: [Jet1; 3] = std::array::from_fn(|a| v.boost(a + 1, t, x));
    let l0u = u.scaling(t, x);
    let l0v = v.scaling(t, x);

    o[E0_U] = energy_density(&u1, t, x, s, 0.0);
    o[E0_U_CART] = energy_cartesian(&u1, t, x, 0.0);
    o[E0_U_ROT] = energy_rotational(&u1, t, x, s, 0.0);
    o[E1_V] = energy_density(&v1, t, x, s, 1.0);
    o[ECON_U] = conformal_density(&u1, t, x, s);
    for a in 0..3 {
        o[ECON_LAU + a] = conformal_density(&lu[a], t, x, s);
    }
    o[SRC_U] = jet::source(cu, &u1, &v1).powi(2);
    o[SRC_V] = jet::source(cv, &u1, &v1).powi(2);

    for (base, f, l) in [(LJ_U, &u1, &lu), (LJ_V, &v1, &lv)] {
        o[base] = f.value * f.value;
        for a in 0..3 {
            o[base + 1 + a] = l[a].value * l[a].value;
            for b in 0..3 {
                let w = l[b].boost(a + 1, t, x);
                o[base + 4 + 3 * a + b] = w * w;
            }
        }
    }

    let excluded = r < 0.5 * h;
    if !excluded {
        o[HARDY_NUM] = (u1.value / r).powi(2);
    }
    for a in 0..3 {
        o[HARDY_DEN + a] = u1.semi(a + 1, t, x).powi(2);
    }

    let w = s / t;
    o[L2_WEIGHTED] = (w * u1.value).powi(2);
    o[L2_WEIGHTED + 1] = (w * l0u.value).powi(2);
    for a in 0..3 {
        o[L2_WEIGHTED + 2 + a] = (w * lu[a].value).powi(2);
    }

    for (base, f, l, l0, m) in [(BOOT_U, u, &lu, &l0u, 0.0), (BOOT_V, v, &lv, &l0v, 1.0)] {
        for alpha in 0..4 {
            o[base + alpha] = energy_density(&f.partial(alpha), t, x, s, m);
        }
        for a in 0..3 {
            o[base + 4 + a] = energy_density(&l[a], t, x, s, m);
        }
        o[base + 7] = energy_density(l0, t, x, s, m);
    }

    o[NODES] = 1.0;
    let t32 = t * t.sqrt();
    let mx = &mut out.max;
    mx[SUP_T32_U] = t32 * u1.value.abs();
    mx[SUP_T32_V] = t32 * v1.value.abs();
    if excluded {
        mx[HARDY_EXCLUDED] = u1.value * u1.value;
    }
    if r < t - 1.0 {
        out.sums[IN_CONE] = 1.0;
        mx[DECAY_U] = u1.value.abs() * t * (t - r).sqrt();
        mx[DECAY_V] = t32 * v1.value.abs();
        let du = u1.d.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        mx[WEIGHTED_DU] = s * t.sqrt() * du;
    }
    out
}
