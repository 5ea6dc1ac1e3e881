//! Pointwise jets and the algebra built on them.
//!
//! Index 0 is `t`, indices 1..=3 are `x^1..x^3`. Every pointwise diagnostic
//! (boosts, the null form, the transformed unknown and its source terms) is
//! assembled from the 2-jets of `u` and `v` at one spacetime point.

/// Value and first derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub d: [f64; 4],
}

/// Value, first and (symmetric) second derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub d: [f64; 4],
    pub dd: [[f64; 4]; 4],
}

impl Jet1 {
    pub fn new(value: f64, d: [f64; 4]) -> Self {
        Self { value, d }
    }

    /// `(f, d_0 f, .., d_3 f)`, the factor vector of the quadratic forms.
    #[inline]
    pub fn factors(&self) -> [f64; 5] {
        [self.value, self.d[0], self.d[1], self.d[2], self.d[3]]
    }

    /// Value of `L_a f` (a in 1..=3).
    #[inline]
    pub fn boost(&self, a: usize, t: f64, x: &[f64; 3]) -> f64 {
        x[a - 1] * self.d[0] + t * self.d[a]
    }

    /// Value of `L_0 f`.
    #[inline]
    pub fn scaling(&self, t: f64, x: &[f64; 3]) -> f64 {
        t * self.d[0] + x[0] * self.d[1] + x[1] * self.d[2] + x[2] * self.d[3]
    }

    /// `ud_a f = (x^a / t) d_t f + d_a f`.
    #[inline]
    pub fn semi(&self, a: usize, t: f64, x: &[f64; 3]) -> f64 {
        x[a - 1] / t * self.d[0] + self.d[a]
    }
}

impl Jet2 {
    #[inline]
    pub fn jet1(&self) -> Jet1 {
        Jet1::new(self.value, self.d)
    }

    /// 1-jet of `d_alpha f`.
    #[inline]
    pub fn partial(&self, alpha: usize) -> Jet1 {
        Jet1::new(self.d[alpha], self.dd[alpha])
    }

    /// 1-jet of `L_a f`.
    pub fn boost(&self, a: usize, t: f64, x: &[f64; 3]) -> Jet1 {
        let xa = x[a - 1];
        let mut d = [0.0; 4];
        d[0] = xa * self.dd[0][0] + self.d[a] + t * self.dd[0][a];
        for b in 1..=3 {
            let delta = if a == b { self.d[0] } else { 0.0 };
            d[b] = delta + xa * self.dd[0][b] + t * self.dd[a][b];
        }
        Jet1::new(xa * self.d[0] + t * self.d[a], d)
    }

    /// 1-jet of `L_0 f`.
    pub fn scaling(&self, t: f64, x: &[f64; 3]) -> Jet1 {
        let mut d = [0.0; 4];
        for (c, dc) in d.iter_mut().enumerate() {
            let space: f64 = (1..=3).map(|b| x[b - 1] * self.dd[b][c]).sum();
            *dc = t * self.dd[0][c] + space + self.d[c];
        }
        Jet1::new(self.scaling_value(t, x), d)
    }

    #[inline]
    pub fn scaling_value(&self, t: f64, x: &[f64; 3]) -> f64 {
        self.jet1().scaling(t, x)
    }

    /// `-box f = d_t^2 f - Laplacian f`.
    #[inline]
    pub fn minus_box(&self) -> f64 {
        self.dd[0][0] - self.dd[1][1] - self.dd[2][2] - self.dd[3][3]
    }

    /// Gradient of factor `i` of [`Jet1::factors`]: `d f` for `i = 0`, `d d_(i-1) f` otherwise.
    #[inline]
    pub fn factor_gradient(&self, i: usize) -> [f64; 4] {
        if i == 0 {
            self.d
        } else {
            self.dd[i - 1]
        }
    }
}

/// `d_alpha f d^alpha g` with `eta = diag(-1, 1, 1, 1)`.
#[inline]
pub fn null_form(df: &[f64; 4], dg: &[f64; 4]) -> f64 {
    -df[0] * dg[0] + df[1] * dg[1] + df[2] * dg[2] + df[3] * dg[3]
}

/// `-(1/t) (d_t g L_0 f - L_a g d_a f)`, which equals [`null_form`] identically.
#[inline]
pub fn null_decomposed(f: &Jet1, g: &Jet1, t: f64, x: &[f64; 3]) -> f64 {
    let boosts: f64 = (1..=3).map(|a| g.boost(a, t, x) * f.d[a]).sum();
    -(g.d[0] * f.scaling(t, x) - boosts) / t
}

/// `sum_ij C_ij a_i b_j`.
#[inline]
pub fn bilinear(c: &[[f64; 5]; 5], a: &[f64; 5], b: &[f64; 5]) -> f64 {
    let mut acc = 0.0;
    for i in 0..5 {
        if a[i] == 0.0 {
            continue;
        }
        let row = &c[i];
        acc +=
            a[i] * (row[0] * b[0] + row[1] * b[1] + row[2] * b[2] + row[3] * b[3] + row[4] * b[4]);
    }
    acc
}

/// The two parts of a quadratic source: the `i = 0` row (`Q_*0`) and the rest (`Q_*1`).
#[inline]
pub fn split_source(c: &[[f64; 5]; 5], u: &Jet1, v: &Jet1) -> (f64, f64) {
    let a = u.factors();
    let b = v.factors();
    let q0 = a[0] * (0..5).map(|j| c[0][j] * b[j]).sum::<f64>();
    let mut a1 = a;
    a1[0] = 0.0;
    (q0, bilinear(c, &a1, &b))
}

#[inline]
pub fn source(c: &[[f64; 5]; 5], u: &Jet1, v: &Jet1) -> f64 {
    bilinear(c, &u.factors(), &v.factors())
}

/// 1-jet of the quadratic source `sum C_ij A_i B_j`.
pub fn source_jet(c: &[[f64; 5]; 5], u: &Jet2, v: &Jet2) -> Jet1 {
    let a = u.jet1().factors();
    let b = v.jet1().factors();
    let mut d = [0.0; 4];
    for (g, dg) in d.iter_mut().enumerate() {
        let da = factor_derivative(u, g);
        let db = factor_derivative(v, g);
        *dg = bilinear(c, &da, &b) + bilinear(c, &a, &db);
    }
    Jet1::new(bilinear(c, &a, &b), d)
}

/// `d_g` of every factor of [`Jet1::factors`].
#[inline]
fn factor_derivative(f: &Jet2, g: usize) -> [f64; 5] {
    [f.d[g], f.dd[0][g], f.dd[1][g], f.dd[2][g], f.dd[3][g]]
}

/// Multiplier of `d_gamma A_i d^gamma B_j` produced by `-box(A_i B_j)`.
pub const NULL_COEFFICIENT: f64 = -2.0;

/// Quadratic null terms of the equation for `U = u + Q_u`:
/// `N = -2 sum_ij C_ij d_gamma A_i d^gamma B_j`.
pub fn null_terms(c: &[[f64; 5]; 5], u: &Jet2, v: &Jet2) -> f64 {
    let mut acc = 0.0;
    for i in 0..5 {
        let gi = u.factor_gradient(i);
        for j in 0..5 {
            if c[i][j] != 0.0 {
                acc += c[i][j] * null_form(&gi, &v.factor_gradient(j));
            }
        }
    }
    NULL_COEFFICIENT * acc
}

/// Cubic remainder of the equation for `U = u + Q_u`.
///
/// `H = sum_ij C_ij [ (d^(i) Q_u) B_j + A_i (d^(j) Q_v) ]`, where `d^(0) Q = Q`
/// and `d^(a+1) Q = d_a Q`. This is what remains of
/// `sum C_ij [(-box A_i) B_j + A_i (-box B_j)]` after the equations are used
/// and the mass term cancels against `Q_u`.
pub fn cubic_terms(cu: &[[f64; 5]; 5], cv: &[[f64; 5]; 5], u: &Jet2, v: &Jet2) -> f64 {
    let qu = source_jet(cu, u, v).factors();
    let qv = source_jet(cv, u, v).factors();
    let a = u.jet1().factors();
    let b = v.jet1().factors();
    bilinear(cu, &qu, &b) + bilinear(cu, &a, &qv)
}
