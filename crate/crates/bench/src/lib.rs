//! Fixtures shared by the benchmarks.

use hwkg::grid::{FieldState, Grid};
use hwkg::solver::{initial_data, Profile};

/// Random-smooth data of amplitude 0.05 on `[-8, 8]^3` with `n` nodes per axis.
pub fn fixture(n: usize) -> (Grid, FieldState) {
    let grid = Grid::new(8.0, n).expect("bench grid");
    let state = initial_data(Profile::RandomSmooth, 0.05, &grid, 7);
    (grid, state)
}
