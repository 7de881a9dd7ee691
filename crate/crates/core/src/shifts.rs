//! Haar functions, generalized Haar shifts of complexity `(m, k)` and their
//! truncations, the dyadic Hilbert transform, and the truncated operator of
//! the 1-D Hilbert kernel `K(x, y) = 1 / (x - y)`.
//!
//! All sums over the grid run over the window cubes only.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{CubeSums, DyadicCube, DyadicGrid, LevelAccumulator, StepFunction};
use crate::num;
use crate::operator::LinearOperator;
use crate::seed;

/// A function on `cube`, constant on each of its depth-`depth` subcubes.
///
/// `values` follows the order of [`DyadicCube::subcubes`].
#[derive(Clone, Debug, PartialEq)]
pub struct HaarFunction {
    pub cube: DyadicCube,
    pub depth: u32,
    pub values: Vec<f64>,
}

impl HaarFunction {
    pub fn new(cube: DyadicCube, depth: u32, values: Vec<f64>) -> Self {
        Self { cube, depth, values }
    }

    /// `chi_{left half} - chi_{right half}` on a 1-D interval.
    pub fn unit_haar(cube: DyadicCube) -> Self {
        Self::new(cube, 1, vec![1.0, -1.0])
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.cube, self.depth, self.values.iter().map(|v| c * v).collect())
    }

    /// The function as a step function on `grid`.
    pub fn to_step(&self, grid: &DyadicGrid) -> Result<StepFunction> {
        let report = haar_validate(grid, self);
        if let Some(v) = report.violations.iter().find(|v| matches!(v, HaarViolation::Malformed(_) | HaarViolation::Support)) {
            return Err(Error::InvalidHaar(v.clone()));
        }
        let mut f = StepFunction::zeros(*grid);
        for (sub, &v) in self.cube.subcubes(grid.dim(), self.depth).zip(&self.values) {
            grid.for_each_cell_in(&sub, |i| f.values_mut()[i] = v);
        }
        Ok(f)
    }

    /// `<f, g>` from precomputed cube integrals of `f`.
    fn pair_with(&self, dim: usize, sums: &CubeSums) -> f64 {
        self.cube.subcubes(dim, self.depth).zip(&self.values).map(|(s, &v)| v * sums.integral(&s)).sum()
    }

    fn add_to(&self, dim: usize, c: f64, acc: &mut LevelAccumulator) {
        for (s, &v) in self.cube.subcubes(dim, self.depth).zip(&self.values) {
            if v != 0.0 {
                acc.add(&s, c * v);
            }
        }
    }
}

/// One violated clause of the Haar-function definition.
#[derive(Clone, Debug, PartialEq)]
pub enum HaarViolation {
    /// Nonzero values outside the cube, or the cube is not resolvable on the grid.
    Support,
    /// Not constant on this child of the cube.
    Constancy { child: DyadicCube },
    /// `sup |g|` exceeds 1.
    SupNorm { max: f64 },
    Malformed(&'static str),
}

impl fmt::Display for HaarViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Support => f.write_str("support not contained in the cube"),
            Self::Constancy { child } => write!(f, "not constant on the child {child:?}"),
            Self::SupNorm { max } => write!(f, "sup norm {max} exceeds 1"),
            Self::Malformed(why) => write!(f, "malformed: {why}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HaarReport {
    pub violations: Vec<HaarViolation>,
}

impl HaarReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks support in the cube, constancy on every strict dyadic subcube (that
/// is, on each child) and `sup |g| <= 1`.
pub fn haar_validate(grid: &DyadicGrid, g: &HaarFunction) -> HaarReport {
    let mut report = HaarReport::default();
    let dim = grid.dim();
    if g.depth > 30 || g.values.len() != 1usize << (g.depth as usize * dim) {
        report.violations.push(HaarViolation::Malformed("value count does not match depth"));
        return report;
    }
    if g.values.iter().any(|v| !v.is_finite()) {
        report.violations.push(HaarViolation::Malformed("non-finite value"));
        return report;
    }
    if !grid.contains_cube(&g.cube) || g.cube.level() - (g.depth as i32) < grid.bottom() {
        report.violations.push(HaarViolation::Support);
    }
    if g.depth >= 2 {
        let per_child = 1usize << ((g.depth as usize - 1) * dim);
        let mut firsts: Vec<(DyadicCube, f64)> = Vec::new();
        let mut bad: Vec<DyadicCube> = Vec::new();
        for (s, &v) in g.cube.subcubes(dim, g.depth).zip(&g.values) {
            let child = s.ancestor(g.depth - 1);
            match firsts.iter().find(|(c, _)| *c == child) {
                Some(&(_, first)) if first != v && !bad.contains(&child) => bad.push(child),
                Some(_) => {}
                None => firsts.push((child, v)),
            }
        }
        debug_assert_eq!(firsts.len() * per_child, g.values.len());
        report.violations.extend(bad.into_iter().map(|child| HaarViolation::Constancy { child }));
    }
    let max = g.values.iter().fold(0.0f64, |m, v| m.max(num::abs(*v)));
    if max > 1.0 {
        report.violations.push(HaarViolation::SupNorm { max });
    }
    report
}

/// Checks whether an arbitrary step function is a Haar function for `cube`.
pub fn haar_check_step(f: &StepFunction, cube: &DyadicCube) -> HaarReport {
    let grid = f.grid();
    let mut report = HaarReport::default();
    if !grid.contains_cube(cube) {
        report.violations.push(HaarViolation::Support);
        return report;
    }
    let mut inside = vec![false; grid.cell_count()];
    grid.for_each_cell_in(cube, |i| inside[i] = true);
    if f.values().iter().zip(&inside).any(|(&v, &ins)| !ins && v != 0.0) {
        report.violations.push(HaarViolation::Support);
    }
    if cube.level() > grid.bottom() {
        for child in cube.children(grid.dim()) {
            let mut first = None;
            let mut constant = true;
            grid.for_each_cell_in(&child, |i| match first {
                None => first = Some(f.values()[i]),
                Some(v) => constant &= v == f.values()[i],
            });
            if !constant {
                report.violations.push(HaarViolation::Constancy { child });
            }
        }
    }
    let mut max: f64 = 0.0;
    grid.for_each_cell_in(cube, |i| max = max.max(num::abs(f.values()[i])));
    if max > 1.0 {
        report.violations.push(HaarViolation::SupNorm { max });
    }
    report
}

/// One summand `<f, input> / |Q| * output` of `S_Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftTerm {
    /// The cube `Q`.
    pub cube: DyadicCube,
    /// `g_{Q'}^{Q''}`, supported on `Q' in D_m(Q)`.
    pub input: HaarFunction,
    /// `g_{Q''}^{Q'}`, supported on `Q'' in D_k(Q)`.
    pub output: HaarFunction,
}

/// A generalized Haar shift of complexity type `(m, k)`, times a global scale.
///
/// Pairs `(Q', Q'')` without a stored term contribute nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarShiftSpec {
    grid: DyadicGrid,
    m: u32,
    k: u32,
    scale: f64,
    terms: Vec<ShiftTerm>,
}

impl HaarShiftSpec {
    pub fn new(grid: DyadicGrid, m: u32, k: u32, scale: f64, terms: Vec<ShiftTerm>) -> Result<Self> {
        if !scale.is_finite() {
            return Err(Error::InvalidParameter("shift scale must be finite"));
        }
        for (index, t) in terms.iter().enumerate() {
            if !grid.contains_cube(&t.cube) {
                return Err(Error::InvalidShiftTerm { index, reason: "cube outside the window" });
            }
            let placed = |g: &HaarFunction, depth: u32| {
                g.cube.level() == t.cube.level() - depth as i32 && t.cube.contains(&g.cube)
            };
            if !placed(&t.input, m) {
                return Err(Error::InvalidShiftTerm { index, reason: "input cube is not in D_m(Q)" });
            }
            if !placed(&t.output, k) {
                return Err(Error::InvalidShiftTerm { index, reason: "output cube is not in D_k(Q)" });
            }
            for g in [&t.input, &t.output] {
                if let Some(v) = haar_validate(&grid, g).violations.into_iter().next() {
                    return Err(Error::InvalidHaar(v));
                }
            }
        }
        Ok(Self { grid, m, k, scale, terms })
    }

    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `kappa = max(m, k)`.
    pub fn complexity(&self) -> u32 {
        self.m.max(self.k)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn terms(&self) -> &[ShiftTerm] {
        &self.terms
    }

    /// Levels of the cubes `Q` that carry at least one term.
    pub fn active_levels(&self) -> (i32, i32) {
        let lo = self.terms.iter().map(|t| t.cube.level()).min().unwrap_or(self.grid.top());
        let hi = self.terms.iter().map(|t| t.cube.level()).max().unwrap_or(self.grid.top());
        (lo, hi)
    }

    fn check_input(&self, f: &StepFunction) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Partial sums `sum_{Q : level(Q) in levels} S_Q f`, one per requested slot.
    fn accumulate(&self, f: &StepFunction, mut slot: impl FnMut(i32) -> Option<usize>, slots: usize) -> Vec<StepFunction> {
        let dim = self.grid.dim();
        let sums = CubeSums::integrals(f);
        let mut accs: Vec<LevelAccumulator> = (0..slots).map(|_| LevelAccumulator::new(self.grid)).collect();
        for t in &self.terms {
            let Some(s) = slot(t.cube.level()) else { continue };
            let c = self.scale * t.input.pair_with(dim, &sums) / t.cube.measure(dim);
            if c != 0.0 {
                t.output.add_to(dim, c, &mut accs[s]);
            }
        }
        accs.into_iter().map(LevelAccumulator::into_step).collect()
    }

    /// `S_l f = sum_{Q : level(Q) = l} S_Q f` for every window level, bottom first.
    pub fn level_parts(&self, f: &StepFunction) -> Result<Vec<StepFunction>> {
        self.check_input(f)?;
        let bottom = self.grid.bottom();
        let n = self.grid.depth() as usize + 1;
        Ok(self.accumulate(f, |l| Some((l - bottom) as usize), n))
    }
}

impl LinearOperator for HaarShiftSpec {
    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        shift_apply(self, f)
    }
}

/// `scale * sum_Q sum_{Q', Q''} <f, g_{Q'}^{Q''}> / |Q| * g_{Q''}^{Q'}`.
pub fn shift_apply(spec: &HaarShiftSpec, f: &StepFunction) -> Result<StepFunction> {
    spec.check_input(f)?;
    Ok(spec.accumulate(f, |_| Some(0), 1).pop().unwrap())
}

/// Levels `lo..=hi` of the cubes kept in a truncated sum (`2^lo <= l(Q) <= 2^hi`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TruncationWindow {
    pub lo: i32,
    pub hi: i32,
}

impl TruncationWindow {
    pub fn new(grid: &DyadicGrid, lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidParameter("truncation window with lo > hi"));
        }
        if lo < grid.bottom() {
            return Err(Error::LevelUnderflow { level: lo, bottom: grid.bottom() });
        }
        if hi > grid.top() {
            return Err(Error::LevelOverflow { level: hi, top: grid.top() });
        }
        Ok(Self { lo, hi })
    }

    /// Every admissible window of the grid.
    pub fn all(grid: &DyadicGrid) -> impl Iterator<Item = TruncationWindow> + '_ {
        (grid.bottom()..=grid.top()).flat_map(move |lo| (lo..=grid.top()).map(move |hi| TruncationWindow { lo, hi }))
    }
}

/// `S_{eps, eps'} f`, the sum over cubes whose level lies in `window`.
pub fn shift_window_sum(spec: &HaarShiftSpec, f: &StepFunction, window: TruncationWindow) -> Result<StepFunction> {
    spec.check_input(f)?;
    let w = window;
    Ok(spec.accumulate(f, |l| (w.lo <= l && l <= w.hi).then_some(0), 1).pop().unwrap())
}

/// `S_* f = sup_{eps < eps'} |S_{eps, eps'} f|`.
///
/// With `P_j` the partial sums of the level parts from the bottom up (and
/// `P_{-1} = 0`), every window sum is a difference `P_j - P_i`, so the
/// supremum is `max_j P_j - min_j P_j`.
pub fn shift_truncated(spec: &HaarShiftSpec, f: &StepFunction) -> Result<StepFunction> {
    let parts = spec.level_parts(f)?;
    let grid = *spec.grid();
    let mut out = vec![0.0; grid.cell_count()];
    for (i, o) in out.iter_mut().enumerate() {
        let (mut p, mut hi, mut lo) = (0.0f64, 0.0f64, 0.0f64);
        for part in &parts {
            p += part.values()[i];
            hi = hi.max(p);
            lo = lo.min(p);
        }
        *o = hi - lo;
    }
    Ok(StepFunction::from_raw(grid, out))
}

/// The dyadic Hilbert transform `H^d f = sum_I <f, h_I> (h_{I-} - h_{I+})`
/// with `h_I = |I|^{-1/2} (chi_{I-} - chi_{I+})`, summed over the window
/// intervals whose halves are resolvable by the grid (level `>= bottom + 2`).
pub fn dyadic_hilbert(f: &StepFunction) -> Result<StepFunction> {
    let grid = *f.grid();
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: grid.dim() });
    }
    let sums = CubeSums::integrals(f);
    let mut acc = LevelAccumulator::new(grid);
    for level in grid.bottom() + 2..=grid.top() {
        let halves = sums.level(level - 1);
        let norm_i = 1.0 / num::sqrt(num::exp2i(level));
        let norm_half = 1.0 / num::sqrt(num::exp2i(level - 1));
        for j in 0..grid.cubes_per_axis(level) {
            let coeff = norm_i * (halves[2 * j] - halves[2 * j + 1]);
            if coeff == 0.0 {
                continue;
            }
            let c = coeff * norm_half;
            let base = 4 * j as i64;
            for (off, sign) in [(0, 1.0), (1, -1.0), (2, -1.0), (3, 1.0)] {
                acc.add(&DyadicCube::interval(level - 2, base + off), sign * c);
            }
        }
    }
    Ok(acc.into_step())
}

/// [`dyadic_hilbert`] as an operator.
#[derive(Clone, Copy, Debug, Default)]
pub struct DyadicHilbert;

impl LinearOperator for DyadicHilbert {
    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        dyadic_hilbert(f)
    }
}

/// `H^d` as a Haar shift of complexity type `(0, 1)` with unit sup-norm Haar
/// functions, plus the scalar `gamma = sqrt(2)` with
/// `gamma * shift_apply(spec, f) = dyadic_hilbert(f)`.
///
/// Each interval `I` carries the two terms `(h_I, h_{I-})` and `(h_I, -h_{I+})`
/// where `h_J = chi_{J-} - chi_{J+}`.
pub fn hilbert_as_shift(grid: &DyadicGrid) -> Result<(HaarShiftSpec, f64)> {
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: grid.dim() });
    }
    let mut terms = Vec::new();
    for level in (grid.bottom() + 2..=grid.top()).rev() {
        for cube in grid.cubes_at_level(level) {
            let input = HaarFunction::unit_haar(cube);
            let [left, right] = [0, 1].map(|h| DyadicCube::interval(level - 1, 2 * cube.coords()[0] + h));
            terms.push(ShiftTerm { cube, input: input.clone(), output: HaarFunction::unit_haar(left) });
            terms.push(ShiftTerm { cube, input, output: HaarFunction::unit_haar(right).scaled(-1.0) });
        }
    }
    Ok((HaarShiftSpec::new(*grid, 0, 1, 1.0, terms)?, core::f64::consts::SQRT_2))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RandomShiftOptions {
    /// Force every Haar function to have zero mean.
    pub mean_zero: bool,
}

/// A random Haar shift of complexity type `(m, k)`, deterministic in `seed`.
///
/// Every window cube deep enough to host `D_max(m,k)(Q)` gets
/// `max(|D_m(Q)|, |D_k(Q)|)` terms pairing each input subcube and each output
/// subcube at least once (outputs in a random order). Haar functions take
/// uniform values in `[-1, 1]` on the children of their cube, or a single
/// value on finest cells.
pub fn random_shift(grid: &DyadicGrid, m: u32, k: u32, seed: u64, opts: RandomShiftOptions) -> Result<HaarShiftSpec> {
    let kappa = m.max(k);
    if grid.depth() < kappa {
        return Err(Error::InvalidParameter("window too shallow for the requested complexity"));
    }
    let dim = grid.dim();
    let mut rng = seed::rng(seed);
    let haar = |cube: DyadicCube, rng: &mut rand_chacha::ChaCha8Rng| {
        let depth = u32::from(cube.level() > grid.bottom());
        let mut values: Vec<f64> = (0..1usize << (depth as usize * dim)).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if opts.mean_zero {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            values.iter_mut().for_each(|v| *v -= mean);
            let max = values.iter().fold(0.0f64, |a, v| a.max(num::abs(*v)));
            if max > 1.0 {
                values.iter_mut().for_each(|v| *v /= max);
            }
        }
        HaarFunction::new(cube, depth, values)
    };
    let mut terms = Vec::new();
    for level in (grid.bottom() + kappa as i32..=grid.top()).rev() {
        for cube in grid.cubes_at_level(level) {
            let inputs: Vec<DyadicCube> = cube.subcubes(dim, m).collect();
            let mut outputs: Vec<DyadicCube> = cube.subcubes(dim, k).collect();
            outputs.shuffle(&mut rng);
            for i in 0..inputs.len().max(outputs.len()) {
                let input = haar(inputs[i % inputs.len()], &mut rng);
                let output = haar(outputs[i % outputs.len()], &mut rng);
                terms.push(ShiftTerm { cube, input, output });
            }
        }
    }
    HaarShiftSpec::new(*grid, m, k, 1.0, terms)
}

/// `T_* f(x) = sup_{0 < eps < eps'} |int_{eps < |x-y| < eps'} f(y) / (x - y) dy|`
/// for the 1-D Hilbert kernel, at a single point.
///
/// As a function of the outer radius `r`, the truncated integral has
/// derivative `(f(x - r) - f(x + r)) / r`; between consecutive distances from
/// `x` to cell boundaries both values are constant, so the integral changes by
/// `(f(x - r) - f(x + r)) ln(r_{j+1} / r_j)` and the supremum over
/// `eps < eps'` is the range (max minus min) of the running integral. If the
/// one-sided values at `x` differ, the integral diverges and `+inf` is returned.
pub fn czo_star_at(f: &StepFunction, x: f64) -> Result<f64> {
    let grid = f.grid();
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: grid.dim() });
    }
    let t = grid.shift()[0];
    let h = grid.cell_side();
    let n = grid.cells_per_axis();
    let vals = f.values();
    let value = |y: f64| -> f64 {
        let c = num::floor((y - t) / h);
        if c >= 0.0 && (c as usize) < n {
            vals[c as usize]
        } else {
            0.0
        }
    };
    let boundary = |i: usize| t + i as f64 * h;
    // Distances to boundaries left of x (ascending) and right of x (ascending).
    let split = (0..=n).position(|i| boundary(i) > x).unwrap_or(n + 1);
    let mut left = (0..split).rev().map(|i| x - boundary(i)).filter(|&r| r > 0.0).peekable();
    let mut right = (split..=n).map(|i| boundary(i) - x).peekable();
    let mut radii: Vec<f64> = Vec::with_capacity(n + 2);
    loop {
        let next = match (left.peek(), right.peek()) {
            (Some(&a), Some(&b)) => {
                if a <= b {
                    left.next()
                } else {
                    right.next()
                }
            }
            (Some(_), None) => left.next(),
            (None, Some(_)) => right.next(),
            (None, None) => break,
        };
        let r = next.unwrap();
        if radii.last() != Some(&r) {
            radii.push(r);
        }
    }
    if radii.is_empty() {
        return Ok(0.0);
    }
    let r0 = radii[0];
    if value(x - 0.5 * r0) != value(x + 0.5 * r0) {
        return Ok(f64::INFINITY);
    }
    let (mut psi, mut hi, mut lo) = (0.0f64, 0.0f64, 0.0f64);
    for w in radii.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let jump = value(x - mid) - value(x + mid);
        if jump != 0.0 {
            psi += jump * num::ln(w[1] / w[0]);
            hi = hi.max(psi);
            lo = lo.min(psi);
        }
    }
    Ok(hi - lo)
}

/// [`czo_star_at`] sampled at every finest-cell midpoint.
pub fn czo_star(f: &StepFunction) -> Result<StepFunction> {
    let grid = *f.grid();
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: grid.dim() });
    }
    let values = (0..grid.cell_count())
        .map(|i| czo_star_at(f, grid.cell_midpoint(i)[0]))
        .collect::<Result<Vec<f64>>>()?;
    StepFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(top: i32, bottom: i32) -> DyadicGrid {
        DyadicGrid::standard(1, top, bottom).unwrap()
    }

    #[test]
    fn validate_examples() {
        let g = line(1, -3);
        let q = DyadicCube::interval(0, 0);
        assert!(haar_validate(&g, &HaarFunction::unit_haar(q)).is_valid());
        assert!(haar_validate(&g, &HaarFunction::new(q, 1, vec![1.0, 0.0])).is_valid());
        let bad = haar_validate(&g, &HaarFunction::new(q, 1, vec![2.0, 0.0]));
        assert_eq!(bad.violations, [HaarViolation::SupNorm { max: 2.0 }]);
        let wiggly = haar_validate(&g, &HaarFunction::new(q, 2, vec![1.0, 0.5, 0.0, 0.0]));
        assert_eq!(wiggly.violations, [HaarViolation::Constancy { child: DyadicCube::interval(-1, 0) }]);
        let deep = haar_validate(&g, &HaarFunction::new(q, 4, vec![0.0; 16]));
        assert_eq!(deep.violations, [HaarViolation::Support]);
        let short = haar_validate(&g, &HaarFunction::new(q, 1, vec![0.0]));
        assert!(matches!(short.violations[..], [HaarViolation::Malformed(_)]));
    }

    #[test]
    fn check_step_flags_each_clause() {
        let g = line(1, -2);
        let q = DyadicCube::interval(0, 0);
        let good = StepFunction::new(g, vec![1.0, 1.0, -1.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(haar_check_step(&good, &q).is_valid());
        let leaky = StepFunction::new(g, vec![1.0, 1.0, -1.0, -1.0, 0.0, 0.1, 0.0, 0.0]).unwrap();
        assert_eq!(haar_check_step(&leaky, &q).violations, [HaarViolation::Support]);
        let wiggly = StepFunction::new(g, vec![1.0, 0.0, -1.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(haar_check_step(&wiggly, &q).violations[..], [HaarViolation::Constancy { .. }]));
        let big = good.scale(1.5);
        assert!(matches!(haar_check_step(&big, &q).violations[..], [HaarViolation::SupNorm { .. }]));
    }

    #[test]
    fn hilbert_of_a_haar_function() {
        let g = line(0, -2);
        let f = StepFunction::new(g, vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        let h = dyadic_hilbert(&f).unwrap();
        let s = core::f64::consts::SQRT_2;
        let expected = [s, -s, -s, s];
        for (a, b) in h.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hilbert_of_an_indicator() {
        let g = line(0, -3);
        let one = StepFunction::constant(g, 1.0).unwrap();
        assert!(dyadic_hilbert(&one).unwrap().max_abs() < 1e-15);

        let g = line(1, -1);
        let f = StepFunction::indicator(g, &DyadicCube::interval(0, 0));
        let h = dyadic_hilbert(&f).unwrap();
        let c = 1.0 / core::f64::consts::SQRT_2;
        let expected = [c, -c, -c, c];
        for (a, b) in h.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hilbert_shift_representation() {
        let g = line(2, -3);
        let (spec, gamma) = hilbert_as_shift(&g).unwrap();
        assert_eq!(spec.complexity(), 1);
        assert_eq!(gamma, core::f64::consts::SQRT_2);
        for t in spec.terms() {
            assert!(haar_validate(&g, &t.input).is_valid());
            assert!(haar_validate(&g, &t.output).is_valid());
        }
        let f = StepFunction::from_cells(g, |i| ((i * 37) % 13) as f64 / 6.0 - 1.0).unwrap();
        let a = dyadic_hilbert(&f).unwrap();
        let b = shift_apply(&spec, &f).unwrap().scale(gamma);
        assert!((&a - &b).max_abs() < 1e-12);
    }

    #[test]
    fn shift_linearity_and_zero() {
        let g = line(1, -3);
        let spec = random_shift(&g, 1, 2, 5, RandomShiftOptions::default()).unwrap();
        let f = StepFunction::from_cells(g, |i| (i % 3) as f64 - 1.0).unwrap();
        let h = StepFunction::from_cells(g, |i| (i % 5) as f64 * 0.25).unwrap();
        assert!(shift_apply(&spec, &StepFunction::zeros(g)).unwrap().is_zero());
        let lhs = shift_apply(&spec, &(&f + &h)).unwrap();
        let rhs = &shift_apply(&spec, &f).unwrap() + &shift_apply(&spec, &h).unwrap();
        assert!((&lhs - &rhs).max_abs() < 1e-12);
        assert!(shift_apply(&spec, &StepFunction::zeros(line(1, -2))).is_err());
    }

    #[test]
    fn random_shift_is_deterministic_and_valid() {
        let g = line(1, -4);
        for (m, k) in [(0, 0), (0, 1), (2, 1), (3, 3)] {
            let a = random_shift(&g, m, k, 11, RandomShiftOptions::default()).unwrap();
            let b = random_shift(&g, m, k, 11, RandomShiftOptions::default()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.complexity(), m.max(k));
            assert!(a.terms().iter().all(|t| haar_validate(&g, &t.input).is_valid() && haar_validate(&g, &t.output).is_valid()));
        }
        let z = random_shift(&g, 0, 0, 3, RandomShiftOptions { mean_zero: true }).unwrap();
        assert_eq!(z.complexity(), 0);
        for t in z.terms() {
            assert!(t.input.values.iter().sum::<f64>().abs() < 1e-12);
        }
        assert!(random_shift(&line(0, -2), 3, 0, 1, RandomShiftOptions::default()).is_err());
    }

    #[test]
    fn truncation_of_a_single_cube_shift() {
        let g = line(1, -2);
        let q = DyadicCube::interval(0, 0);
        let term = ShiftTerm { cube: q, input: HaarFunction::unit_haar(q), output: HaarFunction::new(q, 1, vec![0.5, 1.0]) };
        let spec = HaarShiftSpec::new(g, 0, 0, 1.0, vec![term]).unwrap();
        let f = StepFunction::from_cells(g, |i| i as f64 - 3.0).unwrap();
        let s = shift_apply(&spec, &f).unwrap();
        let star = shift_truncated(&spec, &f).unwrap();
        assert_eq!(star, s.abs());
    }

    #[test]
    fn truncation_of_hilbert_on_a_haar_function() {
        let g = line(0, -2);
        let (spec, gamma) = hilbert_as_shift(&g).unwrap();
        let f = StepFunction::new(g, vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        let star = shift_truncated(&spec, &f).unwrap().scale(gamma);
        let h = dyadic_hilbert(&f).unwrap().abs();
        assert!((&star - &h).max_abs() < 1e-15);
    }

    #[test]
    fn truncated_dominates_every_window() {
        let g = line(1, -3);
        let spec = random_shift(&g, 1, 1, 2, RandomShiftOptions::default()).unwrap();
        let f = StepFunction::from_cells(g, |i| ((i * 5) % 7) as f64 - 3.0).unwrap();
        let star = shift_truncated(&spec, &f).unwrap();
        let full = shift_apply(&spec, &f).unwrap();
        for (a, b) in star.values().iter().zip(full.values()) {
            assert!(*a >= b.abs() - 1e-12);
        }
        for w in TruncationWindow::all(&g) {
            let part = shift_window_sum(&spec, &f, w).unwrap();
            for (a, b) in star.values().iter().zip(part.values()) {
                assert!(*a >= b.abs() - 1e-12, "{w:?}");
            }
        }
        assert!(TruncationWindow::new(&g, 1, 0).is_err());
        assert!(TruncationWindow::new(&g, -4, 0).is_err());
    }

    #[test]
    fn czo_star_examples() {
        let g = line(3, -2);
        let f = StepFunction::indicator(g, &DyadicCube::interval(0, 0));
        assert!((czo_star_at(&f, 2.0).unwrap() - core::f64::consts::LN_2).abs() < 1e-12);
        let f = StepFunction::indicator(g, &DyadicCube::interval(0, 1));
        assert!((czo_star_at(&f, 0.0).unwrap() - core::f64::consts::LN_2).abs() < 1e-12);
        assert!(czo_star(&StepFunction::zeros(g)).unwrap().is_zero());
        // Jump at x: the principal value diverges.
        assert_eq!(czo_star_at(&f, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn czo_star_matches_brute_force_radii() {
        // Oracle: direct per-cell log integrals over every pair of candidate radii.
        let g = line(1, -2);
        let f = StepFunction::new(g, vec![0.5, -1.0, 2.0, 0.0, 1.0, 1.0, -0.5, 3.0]).unwrap();
        let star = czo_star(&f).unwrap();
        for i in 0..g.cell_count() {
            let x = g.cell_midpoint(i)[0];
            let radii: Vec<f64> = (0..=16).map(|j| 0.125 + 0.25 * j as f64).collect();
            let trunc = |eps: f64, eps2: f64| -> f64 {
                (0..8)
                    .map(|c| {
                        let (c0, c1) = (0.25 * c as f64, 0.25 * (c + 1) as f64);
                        let mut s = 0.0;
                        for (lo, hi) in [(x - eps2, x - eps), (x + eps, x + eps2)] {
                            let a = c0.max(lo);
                            let b = c1.min(hi);
                            if b > a {
                                s += (x - a).abs().ln() - (x - b).abs().ln();
                            }
                        }
                        f.values()[c] * s
                    })
                    .sum()
            };
            let mut best: f64 = 0.0;
            for (a, &e) in radii.iter().enumerate() {
                for &e2 in &radii[a + 1..] {
                    best = best.max(trunc(e, e2).abs());
                }
            }
            assert!((star.values()[i] - best).abs() < 1e-12, "cell {i}: {} vs {best}", star.values()[i]);
        }
    }
}
