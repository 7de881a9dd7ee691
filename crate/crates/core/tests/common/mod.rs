#![allow(dead_code)]

use proptest::prelude::*;
use twoweight_core::{DyadicCube, DyadicGrid, StepFunction, Weight};

/// 1-D windows `[0, 2^top)` with at most `2^max_depth` cells.
pub fn line_grid(max_depth: i32) -> impl Strategy<Value = DyadicGrid> {
    (-2i32..=2, 1..=max_depth).prop_map(|(top, depth)| DyadicGrid::standard(1, top, top - depth).unwrap())
}

pub fn square_grid(max_depth: i32) -> impl Strategy<Value = DyadicGrid> {
    (-1i32..=1, 1..=max_depth).prop_map(|(top, depth)| DyadicGrid::standard(2, top, top - depth).unwrap())
}

pub fn any_grid() -> impl Strategy<Value = DyadicGrid> {
    prop_oneof![line_grid(6), square_grid(3)]
}

/// Values on a coarse lattice, so that ties and zeros are common.
pub fn step(grid: DyadicGrid, signed: bool) -> impl Strategy<Value = StepFunction> {
    let lo = if signed { -8i32 } else { 0 };
    proptest::collection::vec(lo..=8, grid.cell_count())
        .prop_map(move |v| StepFunction::new(grid, v.into_iter().map(|x| x as f64 * 0.25).collect()).unwrap())
}

pub fn weight(grid: DyadicGrid) -> impl Strategy<Value = Weight> {
    step(grid, false).prop_map(|f| Weight::new(f).unwrap())
}

pub fn grid_and_step(signed: bool) -> impl Strategy<Value = (DyadicGrid, StepFunction)> {
    any_grid().prop_flat_map(move |g| (Just(g), step(g, signed)))
}

pub fn window_cube(grid: DyadicGrid) -> impl Strategy<Value = DyadicCube> {
    let cubes: Vec<DyadicCube> = grid.cubes().collect();
    proptest::sample::select(cubes)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
