//! Numerical laboratory for the coupled semilinear wave / Klein-Gordon system
//!
//! ```text
//! -box u     = Q_u(u, du; v, dv)
//! -box v + v = Q_v(u, du; v, dv)
//! ```
//!
//! in 3+1 dimensions, with compactly supported data at `t = 2`, studied on the
//! hyperboloids `t^2 - r^2 = s^2`.

// NaN-rejecting checks are written as negated comparisons; tensor code indexes by component.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod experiment;
pub mod geometry;
pub mod grid;
pub mod hyperdiag;
pub mod oracle;
pub mod physics;
pub mod reduce;
pub mod solver;

pub use error::{Error, Result};
