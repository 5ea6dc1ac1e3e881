//! Compactly supported initial data at `t = 2`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{radius, T0};
use crate::grid::{FieldState, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Bump,
    OffsetBump,
    RandomSmooth,
    Cap,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Bump => "bump",
            Profile::OffsetBump => "offset-bump",
            Profile::RandomSmooth => "random-smooth",
            Profile::Cap => "cap",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bump" => Ok(Profile::Bump),
            "offset-bump" => Ok(Profile::OffsetBump),
            "random-smooth" => Ok(Profile::RandomSmooth),
            "cap" => Ok(Profile::Cap),
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }
}

/// `exp(1 - 1/(1 - q^2))` for `q < 1`, zero otherwise; equals 1 at the centre.
#[inline]
pub fn bump(q: f64) -> f64 {
    if q < 1.0 {
        (1.0 - 1.0 / (1.0 - q * q)).exp()
    } else {
        0.0
    }
}

/// Exponent of the polynomial cap `(1 - q^2)^CAP_POWER`.
pub const CAP_POWER: i32 = 7;

/// `(1 - q^2)^CAP_POWER` for `q < 1`, zero otherwise.
///
/// Only finitely smooth at `q = 1`, but its derivatives stay moderate, so
/// refinement studies reach their asymptotic order on coarser grids than with
/// [`bump`], whose derivatives grow factorially near the edge.
#[inline]
pub fn cap(q: f64) -> f64 {
    if q < 1.0 {
        (1.0 - q * q).powi(CAP_POWER)
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    Bump,
    Cap,
}

/// Scaled bump centred at `c` with radius `rho`.
#[derive(Clone, Copy, Debug)]
struct Blob {
    c: [f64; 3],
    rho: f64,
    amp: [f64; 4],
    shape: Shape,
}

impl Blob {
    fn eval(&self, x: [f64; 3]) -> f64 {
        let d = [x[0] - self.c[0], x[1] - self.c[1], x[2] - self.c[2]];
        let q = radius(&d) / self.rho;
        match self.shape {
            Shape::Bump => bump(q),
            Shape::Cap => cap(q),
        }
    }
}

fn blobs(profile: Profile, seed: u64) -> Vec<Blob> {
    match profile {
        Profile::Bump => vec![Blob {
            c: [0.0; 3],
            rho: 1.0,
            amp: [1.0, 0.0, 1.0, 0.0],
            shape: Shape::Bump,
        }],
        Profile::Cap => vec![Blob {
            c: [0.0; 3],
            rho: 1.0,
            amp: [1.0, 0.0, 1.0, 0.0],
            shape: Shape::Cap,
        }],
        Profile::OffsetBump => vec![Blob {
            c: [0.3, 0.2, -0.1],
            rho: 0.6,
            amp: [1.0, 0.5, 1.0, -0.5],
            shape: Shape::Bump,
        }],
        Profile::RandomSmooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..4)
                .map(|_| {
                    let rho = rng.gen_range(0.3..0.6);
                    let reach = 0.95 - rho;
                    let c = loop {
                        let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-reach..reach));
                        if radius(&c) <= reach {
                            break c;
                        }
                    };
                    Blob {
                        c,
                        rho,
                        amp: std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
                        shape: Shape::Bump,
                    }
                })
                .collect()
        }
    }
}

/// `(u, ut, v, vt)` at `t = 2`, supported in `r <= 1` and linear in `epsilon`.
///
/// `bump` uses `u = v = epsilon * psi(r)` at rest; `offset-bump` a smaller
/// off-centre bump with nonzero rates; `random-smooth` four seeded bumps with
/// independent amplitudes for every component; `cap` is `bump` with the
/// polynomial [`cap`] in place of `psi`.
pub fn initial_data(profile: Profile, epsilon: f64, grid: &Grid, seed: u64) -> FieldState {
    let parts = blobs(profile, seed);
    let mut st = FieldState::zeros(grid, T0);
    for (k, tag) in crate::grid::FieldTag::ALL.into_iter().enumerate() {
        *st.field_mut(tag) =
            grid.from_fn(|x| epsilon * parts.iter().map(|b| b.amp[k] * b.eval(x)).sum::<f64>());
    }
    st
}
