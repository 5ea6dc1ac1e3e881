use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constant couplings of both quadratic nonlinearities.
///
/// With `A = (u, d_0 u, .., d_3 u)` and `B = (v, d_0 v, .., d_3 v)` the wave
/// source is `Q_u = sum_ij C_ij A_i B_j`, where `C_00 = mu`,
/// `C_0(b+1) = mu_a[b]`, `C_(a+1)0 = nu_a[a]`, `C_(a+1)(b+1) = nu_ab[a][b]`;
/// the Klein-Gordon source is built the same way from the `v`-coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub mu: f64,
    pub mu_a: [f64; 4],
    pub nu_a: [f64; 4],
    pub nu_ab: [[f64; 4]; 4],
    pub mv: f64,
    pub mv_a: [f64; 4],
    pub nv_a: [f64; 4],
    pub nv_ab: [[f64; 4]; 4],
}

/// One of the eight coefficient groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CouplingFamily {
    Mu,
    MuA,
    NuA,
    NuAb,
    Mv,
    MvA,
    NvA,
    NvAb,
}

impl CouplingFamily {
    pub const ALL: [CouplingFamily; 8] = [
        CouplingFamily::Mu,
        CouplingFamily::MuA,
        CouplingFamily::NuA,
        CouplingFamily::NuAb,
        CouplingFamily::Mv,
        CouplingFamily::MvA,
        CouplingFamily::NvA,
        CouplingFamily::NvAb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CouplingFamily::Mu => "mu",
            CouplingFamily::MuA => "mu-a",
            CouplingFamily::NuA => "nu-a",
            CouplingFamily::NuAb => "nu-ab",
            CouplingFamily::Mv => "mv",
            CouplingFamily::MvA => "mv-a",
            CouplingFamily::NvA => "nv-a",
            CouplingFamily::NvAb => "nv-ab",
        }
    }
}

impl fmt::Display for CouplingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CouplingFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown coupling family '{s}'")))
    }
}

impl CoefficientSet {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Every entry of every family equal to one.
    pub fn all_ones() -> Self {
        let mut c = Self::zero();
        for f in CouplingFamily::ALL {
            c.set_family(f, 1.0);
        }
        c
    }

    /// Every entry of `family` equal to one, everything else zero.
    pub fn single(family: CouplingFamily) -> Self {
        let mut c = Self::zero();
        c.set_family(family, 1.0);
        c
    }

    pub fn set_family(&mut self, family: CouplingFamily, value: f64) {
        match family {
            CouplingFamily::Mu => self.mu = value,
            CouplingFamily::MuA => self.mu_a = [value; 4],
            CouplingFamily::NuA => self.nu_a = [value; 4],
            CouplingFamily::NuAb => self.nu_ab = [[value; 4]; 4],
            CouplingFamily::Mv => self.mv = value,
            CouplingFamily::MvA => self.mv_a = [value; 4],
            CouplingFamily::NvA => self.nv_a = [value; 4],
            CouplingFamily::NvAb => self.nv_ab = [[value; 4]; 4],
        }
    }

    pub fn u_matrix(&self) -> [[f64; 5]; 5] {
        assemble(self.mu, &self.mu_a, &self.nu_a, &self.nu_ab)
    }

    pub fn v_matrix(&self) -> [[f64; 5]; 5] {
        assemble(self.mv, &self.mv_a, &self.nv_a, &self.nv_ab)
    }

    pub fn is_finite(&self) -> bool {
        self.u_matrix()
            .iter()
            .chain(self.v_matrix().iter())
            .flatten()
            .all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// Entry-wise `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let v4 = |x: &[f64; 4], y: &[f64; 4]| std::array::from_fn(|i| a * x[i] + b * y[i]);
        let m4 = |x: &[[f64; 4]; 4], y: &[[f64; 4]; 4]| std::array::from_fn(|i| v4(&x[i], &y[i]));
        Self {
            mu: a * self.mu + b * other.mu,
            mu_a: v4(&self.mu_a, &other.mu_a),
            nu_a: v4(&self.nu_a, &other.nu_a),
            nu_ab: m4(&self.nu_ab, &other.nu_ab),
            mv: a * self.mv + b * other.mv,
            mv_a: v4(&self.mv_a, &other.mv_a),
            nv_a: v4(&self.nv_a, &other.nv_a),
            nv_ab: m4(&self.nv_ab, &other.nv_ab),
        }
    }
}

fn assemble(m: f64, m_a: &[f64; 4], n_a: &[f64; 4], n_ab: &[[f64; 4]; 4]) -> [[f64; 5]; 5] {
    let mut c = [[0.0; 5]; 5];
    c[0][0] = m;
    for a in 0..4 {
        c[0][a + 1] = m_a[a];
        c[a + 1][0] = n_a[a];
        for b in 0..4 {
            c[a + 1][b + 1] = n_ab[a][b];
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_layout() {
        let mut c = CoefficientSet::zero();
        c.mu = 1.0;
        c.mu_a[2] = 2.0;
        c.nu_a[3] = 3.0;
        c.nu_ab[1][0] = 4.0;
        let m = c.u_matrix();
        assert_eq!(m[0][0], 1.0);
        assert_eq!(m[0][3], 2.0);
        assert_eq!(m[4][0], 3.0);
        assert_eq!(m[2][1], 4.0);
        assert_eq!(c.v_matrix(), [[0.0; 5]; 5]);
    }

    #[test]
    fn families_partition_all_ones() {
        let sum = CouplingFamily::ALL
            .iter()
            .fold(CoefficientSet::zero(), |acc, &f| {
                acc.combine(1.0, &CoefficientSet::single(f), 1.0)
            });
        assert_eq!(sum, CoefficientSet::all_ones());
        for f in CouplingFamily::ALL {
            assert_eq!(f.name().parse::<CouplingFamily>().unwrap(), f);
        }
    }
}
