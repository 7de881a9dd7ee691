//! Dyadic grids restricted to a bounded window, step functions on the finest
//! cells of the window, weights and weighted (strong and weak) norms.
//!
//! A grid is the translate `t + D` of the standard dyadic grid, cut down to the
//! single window cube of side `2^top` with lower corner `t`. Cubes are kept as
//! `(level, integer coordinates)` so containment and equality are exact integer
//! tests; real endpoints are only produced on demand.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Range, Sub};

use crate::error::{Error, Result};
use crate::num;

/// Largest supported dimension.
pub const MAX_DIM: usize = 2;

/// Upper bound on `log2` of the number of finest cells of a window.
const MAX_CELLS_LOG2: u32 = 26;
/// Levels are kept well inside the exponent range of `f64`.
const MAX_ABS_LEVEL: i32 = 400;

/// A dyadic cube `t + 2^level * (coords + [0,1)^n)`.
///
/// Unused trailing coordinates (beyond the grid dimension) are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    level: i32,
    coords: [i64; MAX_DIM],
}

impl DyadicCube {
    /// Panics if more than [`MAX_DIM`] coordinates are given.
    pub fn new(level: i32, coords: &[i64]) -> Self {
        assert!(coords.len() <= MAX_DIM, "at most {MAX_DIM} coordinates");
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Self { level, coords: c }
    }

    /// The interval `[j 2^level, (j+1) 2^level)` of a 1-D grid.
    pub fn interval(level: i32, j: i64) -> Self {
        Self::new(level, &[j])
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn coords(&self) -> &[i64; MAX_DIM] {
        &self.coords
    }

    /// Side length `2^level`.
    pub fn side(&self) -> f64 {
        num::exp2i(self.level)
    }

    /// Lebesgue measure in dimension `dim`.
    pub fn measure(&self, dim: usize) -> f64 {
        num::exp2i(self.level * dim as i32)
    }

    pub fn parent(&self) -> Self {
        self.ancestor(1)
    }

    /// The ancestor `j` levels up (`j = 0` is the cube itself).
    pub fn ancestor(&self, j: u32) -> Self {
        let mut coords = self.coords;
        for c in &mut coords {
            *c >>= j;
        }
        Self { level: self.level + j as i32, coords }
    }

    /// `true` if `other` is this cube or one of its dyadic subcubes.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.level <= self.level && other.ancestor((self.level - other.level) as u32) == *self
    }

    pub fn intersects(&self, other: &DyadicCube) -> bool {
        self.contains(other) || other.contains(self)
    }

    /// The `2^(m n)` subcubes `m` levels down, axis 0 varying fastest.
    pub fn subcubes(&self, dim: usize, m: u32) -> impl Iterator<Item = DyadicCube> + '_ {
        let per_axis = 1i64 << m;
        let count = 1usize << (m as usize * dim);
        let base = self.coords;
        let level = self.level - m as i32;
        (0..count).map(move |mut idx| {
            let mut coords = [0; MAX_DIM];
            for (a, c) in coords.iter_mut().enumerate().take(dim) {
                let off = (idx as i64) % per_axis;
                idx /= per_axis as usize;
                *c = base[a] * per_axis + off;
            }
            DyadicCube { level, coords }
        })
    }

    pub fn children(&self, dim: usize) -> impl Iterator<Item = DyadicCube> + '_ {
        self.subcubes(dim, 1)
    }
}

/// A translated dyadic grid cut down to one window cube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicGrid {
    dim: usize,
    shift: [f64; MAX_DIM],
    top: i32,
    bottom: i32,
}

impl DyadicGrid {
    /// Grid `shift + D` with window of side `2^top` and finest cells of side `2^bottom`.
    pub fn new(dim: usize, shift: &[f64], top: i32, bottom: i32) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if shift.len() != dim {
            return Err(Error::ShapeMismatch { expected: dim, found: shift.len() });
        }
        if let Some(i) = shift.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if bottom > top
            || top.abs() > MAX_ABS_LEVEL
            || bottom.abs() > MAX_ABS_LEVEL
            || (top - bottom) as u32 * dim as u32 > MAX_CELLS_LOG2
        {
            return Err(Error::InvalidWindow { top, bottom });
        }
        let mut s = [0.0; MAX_DIM];
        s[..dim].copy_from_slice(shift);
        Ok(Self { dim, shift: s, top, bottom })
    }

    /// The untranslated grid.
    pub fn standard(dim: usize, top: i32, bottom: i32) -> Result<Self> {
        Self::new(dim, &[0.0; MAX_DIM][..dim.min(MAX_DIM)], top, bottom)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift[..self.dim]
    }

    pub fn top(&self) -> i32 {
        self.top
    }

    pub fn bottom(&self) -> i32 {
        self.bottom
    }

    /// Number of levels below the top, `top - bottom`.
    pub fn depth(&self) -> u32 {
        (self.top - self.bottom) as u32
    }

    pub fn cells_per_axis(&self) -> usize {
        1 << self.depth()
    }

    pub fn cell_count(&self) -> usize {
        1 << (self.depth() as usize * self.dim)
    }

    pub fn cell_measure(&self) -> f64 {
        num::exp2i(self.bottom * self.dim as i32)
    }

    pub fn cell_side(&self) -> f64 {
        num::exp2i(self.bottom)
    }

    pub fn window_measure(&self) -> f64 {
        num::exp2i(self.top * self.dim as i32)
    }

    pub fn top_cube(&self) -> DyadicCube {
        DyadicCube::new(self.top, &[])
    }

    /// Number of window cubes per axis at `level`.
    pub fn cubes_per_axis(&self, level: i32) -> usize {
        debug_assert!(level >= self.bottom && level <= self.top);
        1 << (self.top - level)
    }

    /// Number of window cubes at `level`.
    pub fn cubes_at_level_count(&self, level: i32) -> usize {
        1 << ((self.top - level) as usize * self.dim)
    }

    /// Whether `q` is one of the window cubes (levels `bottom..=top`).
    pub fn contains_cube(&self, q: &DyadicCube) -> bool {
        if q.level < self.bottom || q.level > self.top {
            return false;
        }
        let n = 1i64 << (self.top - q.level);
        q.coords[..self.dim].iter().all(|&c| (0..n).contains(&c))
            && q.coords[self.dim..].iter().all(|&c| c == 0)
    }

    pub(crate) fn check_cube(&self, q: &DyadicCube) -> Result<()> {
        if self.contains_cube(q) {
            Ok(())
        } else {
            Err(Error::CubeOutsideWindow(*q))
        }
    }

    /// Window cubes at `level` in level-index order (empty outside `bottom..=top`).
    pub fn cubes_at_level(&self, level: i32) -> impl Iterator<Item = DyadicCube> + '_ {
        let count = if level < self.bottom || level > self.top {
            0
        } else {
            self.cubes_at_level_count(level)
        };
        (0..count).map(move |i| self.cube_at(level, i))
    }

    /// All window cubes, top level first.
    pub fn cubes(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        (self.bottom..=self.top).rev().flat_map(move |l| self.cubes_at_level(l))
    }

    pub fn cube_count(&self) -> usize {
        (self.bottom..=self.top).map(|l| self.cubes_at_level_count(l)).sum()
    }

    /// Position of a window cube among the cubes of its level.
    pub(crate) fn level_index(&self, q: &DyadicCube) -> usize {
        let n = self.cubes_per_axis(q.level);
        let mut idx = 0usize;
        for a in (0..self.dim).rev() {
            idx = idx * n + q.coords[a] as usize;
        }
        idx
    }

    pub(crate) fn cube_at(&self, level: i32, mut idx: usize) -> DyadicCube {
        let n = self.cubes_per_axis(level);
        let mut coords = [0; MAX_DIM];
        for c in coords.iter_mut().take(self.dim) {
            *c = (idx % n) as i64;
            idx /= n;
        }
        DyadicCube { level, coords }
    }

    /// `D_m(Q)`: the `2^(m n)` subcubes of `q` of side `2^-m l(Q)`.
    pub fn descendants(&self, q: &DyadicCube, m: u32) -> Result<Vec<DyadicCube>> {
        let level = q.level - m as i32;
        if level < self.bottom {
            return Err(Error::LevelUnderflow { level, bottom: self.bottom });
        }
        Ok(q.subcubes(self.dim, m).collect())
    }

    /// The chain `[R_0 = R, R_1, ..., R_jmax]` with `l(R_k) = 2^k l(R)`.
    pub fn ancestors(&self, r: &DyadicCube, jmax: u32) -> Result<Vec<DyadicCube>> {
        let level = r.level + jmax as i32;
        if level > self.top {
            return Err(Error::LevelOverflow { level, top: self.top });
        }
        Ok((0..=jmax).map(|j| r.ancestor(j)).collect())
    }

    /// Lower corner `t + 2^level * coords`.
    pub fn cube_corner(&self, q: &DyadicCube) -> [f64; MAX_DIM] {
        let side = q.side();
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = self.shift[a] + side * q.coords[a] as f64;
        }
        x
    }

    /// The grid cube of `level` containing `x` (not necessarily a window cube).
    pub fn cube_of_point(&self, level: i32, x: &[f64]) -> DyadicCube {
        let side = num::exp2i(level);
        let mut coords = [0; MAX_DIM];
        for a in 0..self.dim {
            coords[a] = num::floor((x[a] - self.shift[a]) / side) as i64;
        }
        DyadicCube { level, coords }
    }

    /// Index of the finest cell containing `x`, if `x` lies in the window.
    pub fn cell_of_point(&self, x: &[f64]) -> Option<usize> {
        let q = self.cube_of_point(self.bottom, x);
        self.contains_cube(&q).then(|| self.level_index(&q))
    }

    pub fn cell_cube(&self, idx: usize) -> DyadicCube {
        self.cube_at(self.bottom, idx)
    }

    pub fn cell_index(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.dim {
            return None;
        }
        let q = DyadicCube::new(self.bottom, coords);
        self.contains_cube(&q).then(|| self.level_index(&q))
    }

    pub fn cell_midpoint(&self, idx: usize) -> [f64; MAX_DIM] {
        let q = self.cell_cube(idx);
        let mut x = self.cube_corner(&q);
        let h = 0.5 * self.cell_side();
        for v in x.iter_mut().take(self.dim) {
            *v += h;
        }
        x
    }

    /// Per-axis finest-cell index ranges covered by `q`, clipped to the window.
    /// Cubes finer than a cell map to the cell containing them.
    pub fn cell_ranges(&self, q: &DyadicCube) -> [Range<usize>; MAX_DIM] {
        let n = self.cells_per_axis() as i64;
        let mut out: [Range<usize>; MAX_DIM] = [0..1, 0..1];
        for a in 0..self.dim {
            let (lo, hi) = if q.level >= self.bottom {
                let w = 1i64 << (q.level - self.bottom).min(62);
                let lo = q.coords[a].saturating_mul(w);
                (lo, lo.saturating_add(w))
            } else {
                let c = q.coords[a] >> (self.bottom - q.level);
                (c, c + 1)
            };
            out[a] = (lo.clamp(0, n) as usize)..(hi.clamp(0, n) as usize);
        }
        out
    }

    /// Calls `f` with every finest-cell index covered by `q` (clipped to the window).
    pub fn for_each_cell_in(&self, q: &DyadicCube, mut f: impl FnMut(usize)) {
        let r = self.cell_ranges(q);
        let n = self.cells_per_axis();
        match self.dim {
            1 => r[0].clone().for_each(f),
            _ => {
                for b in r[1].clone() {
                    for a in r[0].clone() {
                        f(a + n * b);
                    }
                }
            }
        }
    }
}

/// Integrals of a step function over every window cube, level by level.
#[derive(Clone, Debug)]
pub struct CubeSums {
    grid: DyadicGrid,
    /// `levels[i]` holds the cubes of level `bottom + i` in level-index order.
    levels: Vec<Vec<f64>>,
}

impl CubeSums {
    pub fn integrals(f: &StepFunction) -> Self {
        let mu = f.grid.cell_measure();
        Self::from_cell_integrals(f.grid, f.values.iter().map(|v| v * mu).collect())
    }

    pub(crate) fn from_cell_integrals(grid: DyadicGrid, cells: Vec<f64>) -> Self {
        let mut levels = Vec::with_capacity(grid.depth() as usize + 1);
        levels.push(cells);
        for level in grid.bottom + 1..=grid.top {
            let prev = levels.last().unwrap();
            let n = grid.cubes_per_axis(level);
            let next = match grid.dim {
                1 => (0..n).map(|j| prev[2 * j] + prev[2 * j + 1]).collect(),
                _ => {
                    let m = 2 * n;
                    let mut out = vec![0.0; n * n];
                    for b in 0..n {
                        for a in 0..n {
                            out[a + n * b] = prev[2 * a + m * 2 * b]
                                + prev[2 * a + 1 + m * 2 * b]
                                + prev[2 * a + m * (2 * b + 1)]
                                + prev[2 * a + 1 + m * (2 * b + 1)];
                        }
                    }
                    out
                }
            };
            levels.push(next);
        }
        Self { grid, levels }
    }

    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    /// Integrals of the cubes at `level`, in level-index order.
    pub fn level(&self, level: i32) -> &[f64] {
        &self.levels[(level - self.grid.bottom) as usize]
    }

    /// Integral over a window cube.
    pub fn integral(&self, q: &DyadicCube) -> f64 {
        self.level(q.level)[self.grid.level_index(q)]
    }

    pub fn average(&self, q: &DyadicCube) -> f64 {
        self.integral(q) / q.measure(self.grid.dim)
    }
}

/// Values attached to window cubes, summed down onto the finest cells.
pub(crate) struct LevelAccumulator {
    grid: DyadicGrid,
    levels: Vec<Vec<f64>>,
}

impl LevelAccumulator {
    pub(crate) fn new(grid: DyadicGrid) -> Self {
        let levels = (grid.bottom..=grid.top).map(|l| vec![0.0; grid.cubes_at_level_count(l)]).collect();
        Self { grid, levels }
    }

    /// Adds `value * chi_q`.
    pub(crate) fn add(&mut self, q: &DyadicCube, value: f64) {
        let i = self.grid.level_index(q);
        self.levels[(q.level - self.grid.bottom) as usize][i] += value;
    }

    pub(crate) fn into_step(mut self) -> StepFunction {
        let g = self.grid;
        for level in (g.bottom + 1..=g.top).rev() {
            let li = (level - g.bottom) as usize;
            let (lower, upper) = self.levels.split_at_mut(li);
            let parent = &upper[0];
            let child = &mut lower[li - 1];
            let n = g.cubes_per_axis(level);
            match g.dim {
                1 => {
                    for (j, &v) in parent.iter().enumerate() {
                        child[2 * j] += v;
                        child[2 * j + 1] += v;
                    }
                }
                _ => {
                    let m = 2 * n;
                    for b in 0..n {
                        for a in 0..n {
                            let v = parent[a + n * b];
                            child[2 * a + m * 2 * b] += v;
                            child[2 * a + 1 + m * 2 * b] += v;
                            child[2 * a + m * (2 * b + 1)] += v;
                            child[2 * a + 1 + m * (2 * b + 1)] += v;
                        }
                    }
                }
            }
        }
        let values = self.levels.swap_remove(0);
        StepFunction { grid: g, values }
    }
}

/// A real function, constant on each finest cell of the window and zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    grid: DyadicGrid,
    values: Vec<f64>,
}

impl StepFunction {
    /// Values are indexed by finest cell, axis 0 varying fastest.
    pub fn new(grid: DyadicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::ShapeMismatch { expected: grid.cell_count(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: DyadicGrid) -> Self {
        Self { grid, values: vec![0.0; grid.cell_count()] }
    }

    pub fn constant(grid: DyadicGrid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.cell_count()])
    }

    /// Builds from a function of the cell index.
    pub fn from_cells(grid: DyadicGrid, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::new(grid, (0..grid.cell_count()).map(f).collect())
    }

    /// `chi_Q` restricted to the window.
    pub fn indicator(grid: DyadicGrid, q: &DyadicCube) -> Self {
        let mut f = Self::zeros(grid);
        grid.for_each_cell_in(q, |i| f.values[i] = 1.0);
        f
    }

    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a point; zero outside the window.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.grid.cell_of_point(x).map_or(0.0, |i| self.values[i])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| num::abs(*v)).collect() }
    }

    /// `f chi_Q`.
    pub fn restrict(&self, q: &DyadicCube) -> Self {
        let mut out = Self::zeros(self.grid);
        self.grid.for_each_cell_in(q, |i| out.values[i] = self.values[i]);
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.grid, values)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_measure()
    }

    /// `int_Q f` for any grid cube (window cubes, sub-cell cubes, or cubes
    /// beyond the window where `f` vanishes).
    pub fn integral_over(&self, q: &DyadicCube) -> f64 {
        if q.level < self.grid.bottom {
            let cell = self.grid.cube_of_point(self.grid.bottom, &self.grid.cube_corner(q));
            return if self.grid.contains_cube(&cell) {
                self.values[self.grid.level_index(&cell)] * q.measure(self.grid.dim)
            } else {
                0.0
            };
        }
        let mut s = 0.0;
        self.grid.for_each_cell_in(q, |i| s += self.values[i]);
        s * self.grid.cell_measure()
    }

    /// `f_Q = |Q|^-1 int_Q f`.
    pub fn average(&self, q: &DyadicCube) -> f64 {
        self.integral_over(q) / q.measure(self.grid.dim)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub(crate) fn check_nonnegative(&self) -> Result<()> {
        match self.values.iter().position(|&v| v < 0.0) {
            Some(index) => Err(Error::NegativeValue { index, value: self.values[index] }),
            None => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(num::abs(*v)))
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn from_raw(grid: DyadicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cell_count());
        Self { grid, values }
    }
}

/// Panics on grid mismatch; use [`StepFunction::checked_add`] to get an error instead.
impl Add for &StepFunction {
    type Output = StepFunction;
    fn add(self, rhs: Self) -> StepFunction {
        self.checked_add(rhs).expect("step functions on different grids")
    }
}

impl Sub for &StepFunction {
    type Output = StepFunction;
    fn sub(self, rhs: Self) -> StepFunction {
        self.checked_sub(rhs).expect("step functions on different grids")
    }
}

impl Mul<&StepFunction> for f64 {
    type Output = StepFunction;
    fn mul(self, rhs: &StepFunction) -> StepFunction {
        rhs.scale(self)
    }
}

impl Neg for &StepFunction {
    type Output = StepFunction;
    fn neg(self) -> StepFunction {
        self.scale(-1.0)
    }
}

/// A nonnegative step function.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight(StepFunction);

impl Weight {
    pub fn new(f: StepFunction) -> Result<Self> {
        f.check_nonnegative()?;
        Ok(Self(f))
    }

    /// Lebesgue measure on the window.
    pub fn lebesgue(grid: DyadicGrid) -> Self {
        Self(StepFunction { grid, values: vec![1.0; grid.cell_count()] })
    }

    pub fn zero(grid: DyadicGrid) -> Self {
        Self(StepFunction::zeros(grid))
    }

    pub fn indicator(grid: DyadicGrid, q: &DyadicCube) -> Self {
        Self(StepFunction::indicator(grid, q))
    }

    pub fn as_step(&self) -> &StepFunction {
        &self.0
    }

    pub fn into_step(self) -> StepFunction {
        self.0
    }

    pub fn grid(&self) -> &DyadicGrid {
        self.0.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.0.values()
    }

    /// `w(Q) = int_Q w`.
    pub fn mass(&self, q: &DyadicCube) -> f64 {
        self.0.integral_over(q)
    }

    pub fn total_mass(&self) -> f64 {
        self.0.integral()
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.0.scale(c))
    }
}

/// Exponents `1 < p < q < inf` of an off-diagonal inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentPair {
    p: f64,
    q: f64,
}

impl ExponentPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0 && p < q && q.is_finite()) {
            return Err(Error::InvalidExponents { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `p' = p / (p - 1)`.
    pub fn p_dual(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn q_dual(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    /// Exponents of the dual inequality `L^{q'} -> L^{p'}`.
    pub fn dual(&self) -> Self {
        Self { p: self.q_dual(), q: self.p_dual() }
    }
}

/// `(p', q')`; always `q' < p'`.
pub fn dual_exponents(e: &ExponentPair) -> (f64, f64) {
    (e.p_dual(), e.q_dual())
}

/// A two-weight pair `(u, sigma)` with `sigma = v^{1-p'}`.
///
/// Regions where `v = inf` are encoded as `sigma = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightPair {
    pub u: Weight,
    pub sigma: Weight,
    pub exponents: ExponentPair,
}

impl WeightPair {
    pub fn new(u: Weight, sigma: Weight, exponents: ExponentPair) -> Result<Self> {
        if u.grid() != sigma.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u, sigma, exponents })
    }

    pub fn grid(&self) -> &DyadicGrid {
        self.u.grid()
    }
}

/// `(int |f|^p w)^{1/p}`, exact for step data.
pub fn lp_norm(f: &StepFunction, w: &Weight, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    if f.grid != *w.grid() {
        return Err(Error::GridMismatch);
    }
    let s: f64 = f
        .values
        .iter()
        .zip(w.values())
        .filter(|(v, _)| **v != 0.0)
        .map(|(&v, &wi)| num::pow(num::abs(v), p) * wi)
        .sum();
    Ok(num::pow(s * f.grid.cell_measure(), 1.0 / p))
}

/// `sup_t t * u({|g| > t})^{1/q}`, evaluated exactly over the distinct values of `|g|`.
pub fn weak_lq_norm(g: &StepFunction, u: &Weight, q: f64) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidExponent(q));
    }
    if g.grid != *u.grid() {
        return Err(Error::GridMismatch);
    }
    let mut pairs: Vec<(f64, f64)> = g
        .values
        .iter()
        .zip(u.values())
        .map(|(&v, &w)| (num::abs(v), w))
        .filter(|&(v, w)| v > 0.0 && w > 0.0)
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mu = g.grid.cell_measure();
    let mut mass = 0.0;
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let t = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == t {
            mass += pairs[i].1;
            i += 1;
        }
        best = best.max(t * num::pow(mass * mu, 1.0 / q));
    }
    Ok(best)
}
