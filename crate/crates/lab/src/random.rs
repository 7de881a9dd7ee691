//! Random instances for the experiments. Every generator takes an explicit
//! seed so that trial `i` is reproducible on its own.

use rand::Rng;
use twoweight_core::seed::{derive_seed, rng};
use twoweight_core::{CoefficientMap, DyadicCube, DyadicGrid, StepFunction, Weight};

/// Streams of the seed fan-out, one per kind of random object.
pub mod stream {
    pub const FUNCTION: u64 = 1;
    pub const CUBE: u64 = 2;
    pub const SHIFT: u64 = 3;
    pub const WEIGHT: u64 = 4;
    pub const COEFFICIENTS: u64 = 5;
}

/// Seeded generator for trial `index` of `stream`.
pub fn trial_rng(master: u64, stream: u64, index: u64) -> impl Rng {
    rng(derive_seed(master, stream, index))
}

/// Uniformly chosen window cube with a uniformly chosen level.
pub fn random_cube(grid: &DyadicGrid, r: &mut impl Rng) -> DyadicCube {
    let level = r.random_range(grid.bottom()..=grid.top());
    let count = grid.cubes_at_level_count(level);
    let idx = r.random_range(0..count);
    grid.cubes_at_level(level).nth(idx).expect("index below the level count")
}

/// A sum of 1 to 8 random cube bumps, plus cell noise half of the time.
/// Heights are uniform in `[-1, 1]` (or `[0, 1]` when `signed` is false)
/// times `2^j` with `j` uniform in `-3..=3`.
pub fn random_step(grid: &DyadicGrid, signed: bool, r: &mut impl Rng) -> StepFunction {
    let mut values = vec![0.0; grid.cell_count()];
    let lo = if signed { -1.0 } else { 0.0 };
    for _ in 0..r.random_range(1..=8) {
        let q = random_cube(grid, r);
        let h = r.random_range(lo..=1.0) * 2f64.powi(r.random_range(-3..=3));
        grid.for_each_cell_in(&q, |i| values[i] += h);
    }
    if r.random_bool(0.5) {
        let scale = r.random_range(0.0..0.5);
        for v in values.iter_mut() {
            *v += scale * r.random_range(lo..=1.0);
        }
    }
    StepFunction::new(*grid, values).expect("finite values")
}

/// Cellwise `2^x` with `x` uniform in `[-spread, spread]`, zero with probability `zeros`.
pub fn random_weight(grid: &DyadicGrid, spread: f64, zeros: f64, r: &mut impl Rng) -> Weight {
    let values =
        (0..grid.cell_count()).map(|_| if r.random_bool(zeros) { 0.0 } else { 2f64.powf(r.random_range(-spread..=spread)) }).collect();
    Weight::new(StepFunction::new(*grid, values).expect("finite values")).expect("nonnegative values")
}

/// Each window cube enters with probability `density` and a log-uniform coefficient in `[1/8, 8]`.
pub fn random_coefficients(grid: &DyadicGrid, density: f64, r: &mut impl Rng) -> CoefficientMap {
    let mut alpha = CoefficientMap::new();
    for q in grid.cubes() {
        if r.random_bool(density) {
            alpha.insert(q, 2f64.powf(r.random_range(-3.0..=3.0))).expect("positive coefficient");
        }
    }
    alpha
}
