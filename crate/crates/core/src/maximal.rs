//! Dyadic and Hardy–Littlewood maximal functions of step functions, and the
//! Sawyer testing quantities for two-weight bounds of `M`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{CubeSums, DyadicCube, DyadicGrid, StepFunction, Weight, WeightPair, MAX_DIM};
use crate::num;

/// Which of the two Sawyer testing inequalities to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SawyerDirection {
    /// `(int_Q M(sigma chi_Q)^q u)^{1/q} / sigma(Q)^{1/p}`.
    Forward,
    /// `(int_Q M(u chi_Q)^{p'} sigma)^{1/p'} / u(Q)^{1/q'}`.
    Dual,
}

/// Maximal operator used inside the testing integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MaximalKind {
    /// Hardy–Littlewood `M`, sampled pointwise with midpoint quadrature.
    #[default]
    HardyLittlewood,
    /// Dyadic `M_D` of the grid; integrals are exact.
    Dyadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SawyerOptions {
    /// Midpoint samples per finest cell and axis.
    pub resolution: usize,
    pub maximal: MaximalKind,
}

impl Default for SawyerOptions {
    fn default() -> Self {
        Self { resolution: 16, maximal: MaximalKind::HardyLittlewood }
    }
}

/// `M_D f` on the window: for each finest cell, the largest `|f|`-average over
/// the window cubes containing it.
pub fn dyadic_maximal(f: &StepFunction) -> StepFunction {
    let grid = *f.grid();
    let sums = CubeSums::integrals(&f.abs());
    let mut best: Vec<f64> = Vec::from([sums.average(&grid.top_cube())]);
    for level in (grid.bottom()..grid.top()).rev() {
        let mu = num::exp2i(level * grid.dim() as i32);
        let avgs = sums.level(level);
        let parents = &best;
        let next = (0..avgs.len())
            .map(|i| {
                let q = grid.cube_at(level, i);
                let parent = grid.level_index(&q.parent());
                (avgs[i] / mu).max(parents[parent])
            })
            .collect();
        best = next;
    }
    StepFunction::from_raw(grid, best)
}

/// Exact Hardy–Littlewood maximal function of a 1-D step function.
///
/// `|f|` is stored as maximal runs of equal value. For fixed right endpoint
/// the average over `[a, b]` is monotone in `a` between consecutive
/// breakpoints (and symmetrically in `b`), so the supremum over intervals
/// containing `x` is attained with endpoints among the breakpoints and `x`.
#[derive(Clone, Debug)]
pub struct HlMaximal1d {
    /// Breakpoints `b_0 < ... < b_R`; `|f|` is constant on each `[b_i, b_{i+1})`.
    breaks: Vec<f64>,
    /// `F(b_i) = int_{-inf}^{b_i} |f|`.
    cumulative: Vec<f64>,
    values: Vec<f64>,
}

impl HlMaximal1d {
    pub fn new(f: &StepFunction) -> Result<Self> {
        let grid = f.grid();
        if grid.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: grid.dim() });
        }
        Ok(Self::from_cells(grid.shift()[0], grid.cell_side(), f.values()))
    }

    /// Cells `[x0 + i h, x0 + (i+1) h)` carrying `values[i]`; zero elsewhere.
    pub fn from_cells(x0: f64, h: f64, values: &[f64]) -> Self {
        let mut breaks = Vec::new();
        let mut cumulative = Vec::new();
        let mut run_values = Vec::new();
        let mut total = 0.0;
        let mut i = 0;
        while i < values.len() {
            let v = num::abs(values[i]);
            let start = i;
            while i < values.len() && num::abs(values[i]) == v {
                i += 1;
            }
            breaks.push(x0 + start as f64 * h);
            cumulative.push(total);
            run_values.push(v);
            total += v * (i - start) as f64 * h;
        }
        breaks.push(x0 + values.len() as f64 * h);
        cumulative.push(total);
        Self { breaks, cumulative, values: run_values }
    }

    fn cumulative_at(&self, x: f64) -> f64 {
        let n = self.values.len();
        if n == 0 || x <= self.breaks[0] {
            return 0.0;
        }
        if x >= self.breaks[n] {
            return self.cumulative[n];
        }
        let i = self.breaks.partition_point(|&b| b <= x) - 1;
        self.cumulative[i] + self.values[i] * (x - self.breaks[i])
    }

    /// `Mf(x) = sup_{I ∋ x} |I|^{-1} int_I |f|`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let split = self.breaks.partition_point(|&b| b <= x);
        let fx = self.cumulative_at(x);
        let left = self.breaks[..split].iter().zip(&self.cumulative[..split]).map(|(&b, &c)| (b, c));
        let lefts = core::iter::once((x, fx)).chain(left);
        let mut best: f64 = 0.0;
        for (a, fa) in lefts {
            let rights = self.breaks[split..].iter().zip(&self.cumulative[split..]).map(|(&b, &c)| (b, c));
            for (b, fb) in core::iter::once((x, fx)).chain(rights) {
                if b > a {
                    best = best.max((fb - fa) / (b - a));
                }
            }
        }
        best
    }
}

/// Comparability constant of the shifted-grid surrogate used for `n >= 2`.
pub fn shifted_grid_constant(dim: usize) -> f64 {
    num::pow(6.0, dim as f64)
}

/// `Mf(x)` over all cubes with sides parallel to the axes.
///
/// In dimension 1 this is exact. In dimension `n >= 2` it returns
/// `max_alpha M_{D^alpha} f(x)` over the `2^n` shifted grids
/// `D^alpha = { 2^k ([0,1)^n + m + (-1)^k alpha) }`, `alpha in {0, 1/3}^n`
/// (relative to the grid origin, levels `bottom - 3 ..= top + 4`). The result
/// never exceeds `Mf(x)`, and `Mf(x) <= 6^n` times it for `x` in the window at
/// distance at least `2^(bottom-3)` from every cell face.
pub fn hl_maximal_at(f: &StepFunction, x: &[f64]) -> Result<f64> {
    let grid = f.grid();
    if x.len() != grid.dim() {
        return Err(Error::ShapeMismatch { expected: grid.dim(), found: x.len() });
    }
    if grid.dim() == 1 {
        return Ok(HlMaximal1d::new(f)?.eval(x[0]));
    }
    Ok(shifted_grid_maximal(f, x))
}

fn shifted_grid_maximal(f: &StepFunction, x: &[f64]) -> f64 {
    let grid = f.grid();
    let n = grid.dim();
    let mut best: f64 = 0.0;
    for mask in 0..(1usize << n) {
        for level in grid.bottom() - 3..=grid.top() + 4 {
            let side = num::exp2i(level);
            let sign = if level.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let mut lo = [0.0; MAX_DIM];
            for a in 0..n {
                let alpha = if mask >> a & 1 == 1 { sign / 3.0 } else { 0.0 };
                let rel = (x[a] - grid.shift()[a]) / side - alpha;
                lo[a] = grid.shift()[a] + side * (num::floor(rel) + alpha);
            }
            let avg = box_integral(f, &lo[..n], side) / num::pow(side, n as f64);
            best = best.max(avg);
        }
    }
    best
}

/// `int |f|` over the box `lo + [0, side)^n`.
fn box_integral(f: &StepFunction, lo: &[f64], side: f64) -> f64 {
    let grid = f.grid();
    let h = grid.cell_side();
    let cells = grid.cells_per_axis();
    let overlaps: Vec<Vec<(usize, f64)>> = (0..grid.dim())
        .map(|a| {
            let t = grid.shift()[a];
            let (a0, a1) = (lo[a], lo[a] + side);
            let first = num::floor((a0 - t) / h).max(0.0) as usize;
            let last = (num::floor((a1 - t) / h) + 1.0).clamp(0.0, cells as f64) as usize;
            (first..last)
                .filter_map(|i| {
                    let c0 = t + i as f64 * h;
                    let len = (c0 + h).min(a1) - c0.max(a0);
                    (len > 0.0).then_some((i, len))
                })
                .collect()
        })
        .collect();
    let v = f.values();
    match grid.dim() {
        1 => overlaps[0].iter().map(|&(i, l)| num::abs(v[i]) * l).sum(),
        _ => {
            let mut s = 0.0;
            for &(j, lj) in &overlaps[1] {
                for &(i, li) in &overlaps[0] {
                    s += num::abs(v[i + cells * j]) * li * lj;
                }
            }
            s
        }
    }
}

/// Sawyer's testing ratio for the cube `q`; `0/0 = 0` and `x/0 = +inf`.
pub fn sawyer_test(
    pair: &WeightPair,
    q: &DyadicCube,
    dir: SawyerDirection,
    opts: &SawyerOptions,
) -> Result<f64> {
    let grid = *pair.grid();
    grid.check_cube(q)?;
    if opts.resolution == 0 {
        return Err(Error::InvalidParameter("quadrature resolution must be positive"));
    }
    let e = pair.exponents;
    let (source, target, exponent, denom_exp) = match dir {
        SawyerDirection::Forward => (&pair.sigma, &pair.u, e.q(), 1.0 / e.p()),
        SawyerDirection::Dual => (&pair.u, &pair.sigma, e.p_dual(), 1.0 / e.q_dual()),
    };
    let mass = source.mass(q);
    if mass == 0.0 {
        return Ok(0.0);
    }
    let integral = match opts.maximal {
        MaximalKind::Dyadic => {
            let m = dyadic_maximal(&source.as_step().restrict(q));
            let mut s = 0.0;
            grid.for_each_cell_in(q, |i| {
                let w = target.values()[i];
                if w > 0.0 {
                    s += num::pow(m.values()[i], exponent) * w;
                }
            });
            s * grid.cell_measure()
        }
        MaximalKind::HardyLittlewood => hl_testing_integral(&grid, source, target, q, exponent, opts.resolution),
    };
    Ok(num::ratio(num::pow(integral, 1.0 / exponent), num::pow(mass, denom_exp)))
}

/// `int_Q M(source chi_Q)^e target` by midpoint sampling.
fn hl_testing_integral(
    grid: &DyadicGrid,
    source: &Weight,
    target: &Weight,
    q: &DyadicCube,
    exponent: f64,
    resolution: usize,
) -> f64 {
    let h = grid.cell_side();
    let r = resolution as f64;
    let mut sum = 0.0;
    if grid.dim() == 1 {
        let range = grid.cell_ranges(q)[0].clone();
        let x0 = grid.shift()[0] + range.start as f64 * h;
        let m = HlMaximal1d::from_cells(x0, h, &source.values()[range.clone()]);
        for i in range {
            let w = target.values()[i];
            if w == 0.0 {
                continue;
            }
            let c = grid.shift()[0] + i as f64 * h;
            let s: f64 = (0..resolution).map(|k| num::pow(m.eval(c + (k as f64 + 0.5) * h / r), exponent)).sum();
            sum += s * w;
        }
        return sum * grid.cell_measure() / r;
    }
    let restricted = source.as_step().restrict(q);
    grid.for_each_cell_in(q, |i| {
        let w = target.values()[i];
        if w == 0.0 {
            return;
        }
        let corner = grid.cube_corner(&grid.cell_cube(i));
        let mut s = 0.0;
        for kb in 0..resolution {
            for ka in 0..resolution {
                let x = [corner[0] + (ka as f64 + 0.5) * h / r, corner[1] + (kb as f64 + 0.5) * h / r];
                s += num::pow(shifted_grid_maximal(&restricted, &x), exponent);
            }
        }
        sum += s * w;
    });
    sum * grid.cell_measure() / (r * r)
}

/// A testing ratio with a quadrature error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SawyerValue {
    pub value: f64,
    /// `4/3 |v(2r) - v(r)|`, the Richardson estimate for a second-order rule.
    pub error_estimate: f64,
}

/// [`sawyer_test`] together with an estimate of its quadrature error.
pub fn sawyer_test_estimate(
    pair: &WeightPair,
    q: &DyadicCube,
    dir: SawyerDirection,
    opts: &SawyerOptions,
) -> Result<SawyerValue> {
    let value = sawyer_test(pair, q, dir, opts)?;
    if opts.maximal == MaximalKind::Dyadic {
        return Ok(SawyerValue { value, error_estimate: 0.0 });
    }
    let finer = SawyerOptions { resolution: 2 * opts.resolution, ..*opts };
    let refined = sawyer_test(pair, q, dir, &finer)?;
    Ok(SawyerValue { value, error_estimate: 4.0 / 3.0 * num::abs(refined - value) })
}

/// Suprema `(C1, C2)` of the Forward and Dual testing ratios over `cubes`.
pub fn sawyer_constants<'a>(
    pair: &WeightPair,
    cubes: impl IntoIterator<Item = &'a DyadicCube>,
    opts: &SawyerOptions,
) -> Result<(f64, f64)> {
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    let mut any = false;
    for q in cubes {
        any = true;
        c1 = c1.max(sawyer_test(pair, q, SawyerDirection::Forward, opts)?);
        c2 = c2.max(sawyer_test(pair, q, SawyerDirection::Dual, opts)?);
    }
    if !any {
        return Err(Error::InvalidParameter("empty cube collection"));
    }
    Ok((c1, c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ExponentPair;
    use alloc::vec;

    fn line(top: i32, bottom: i32) -> DyadicGrid {
        DyadicGrid::standard(1, top, bottom).unwrap()
    }

    #[test]
    fn dyadic_maximal_of_unit_indicator() {
        let g = line(3, 0);
        let f = StepFunction::indicator(g, &DyadicCube::interval(0, 0));
        let m = dyadic_maximal(&f);
        assert_eq!(m.values(), &[1.0, 0.5, 0.25, 0.25, 0.125, 0.125, 0.125, 0.125]);
        assert!(dyadic_maximal(&StepFunction::zeros(g)).is_zero());
    }

    #[test]
    fn hl_maximal_examples() {
        let g = line(3, -2);
        let f = StepFunction::indicator(g, &DyadicCube::interval(0, 0));
        assert_eq!(hl_maximal_at(&f, &[2.0]).unwrap(), 0.5);
        assert_eq!(hl_maximal_at(&f, &[0.5]).unwrap(), 1.0);
        for x in [1.25, 3.0, 5.5, 7.9] {
            assert!((hl_maximal_at(&f, &[x]).unwrap() - 1.0 / x).abs() < 1e-15);
        }
        assert_eq!(hl_maximal_at(&StepFunction::zeros(g), &[1.0]).unwrap(), 0.0);
        // Outside the window the average still reaches back to the support.
        assert!((hl_maximal_at(&f, &[-1.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hl_dominates_dyadic_maximal() {
        let g = line(2, -3);
        let f = StepFunction::from_cells(g, |i| ((i * 7919) % 11) as f64 - 5.0).unwrap();
        let md = dyadic_maximal(&f);
        let m = HlMaximal1d::new(&f).unwrap();
        for i in 0..g.cell_count() {
            let x = g.cell_midpoint(i)[0];
            assert!(m.eval(x) >= md.values()[i] - 1e-12);
        }
    }

    #[test]
    fn hl_matches_interval_enumeration() {
        // Oracle: every interval with endpoints on a fine lattice containing x.
        let g = line(1, -2);
        let f = StepFunction::new(g, vec![0.0, 3.0, 1.0, 0.0, 2.0, 0.0, 0.0, 5.0]).unwrap();
        let m = HlMaximal1d::new(&f).unwrap();
        let lattice: Vec<f64> = (0..=16).map(|k| k as f64 / 8.0).collect();
        for &x in &[0.3, 0.75, 1.1, 1.9] {
            let mut best: f64 = 0.0;
            for &a in lattice.iter().filter(|&&a| a <= x) {
                for &b in lattice.iter().filter(|&&b| b >= x && b > a) {
                    let cells = (0..8).map(|i| {
                        let (c0, c1) = (i as f64 * 0.25, (i + 1) as f64 * 0.25);
                        f.values()[i] * ((c1.min(b) - c0.max(a)).max(0.0))
                    });
                    best = best.max(cells.sum::<f64>() / (b - a));
                }
            }
            assert!((m.eval(x) - best).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn shifted_grid_surrogate_is_comparable() {
        let g = DyadicGrid::standard(2, 1, -1).unwrap();
        let f = StepFunction::indicator(g, &DyadicCube::new(-1, &[0, 0]));
        assert_eq!(hl_maximal_at(&f, &[0.125, 0.125]).unwrap(), 1.0);
        // Best square for x = (1.2, 1.2) is [0, 1.2]^2.
        let exact = 0.25 / (1.2 * 1.2);
        let v = hl_maximal_at(&f, &[1.2, 1.2]).unwrap();
        assert!(v <= exact + 1e-12);
        assert!(shifted_grid_constant(2) * v >= exact);
    }

    fn example_pair(grid: DyadicGrid) -> WeightPair {
        WeightPair::new(
            Weight::indicator(grid, &DyadicCube::interval(0, 0)),
            Weight::indicator(grid, &DyadicCube::interval(0, 2)),
            ExponentPair::new(2.0, 3.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn sawyer_example_pair_matches_closed_forms() {
        let grid = line(3, -6);
        let pair = example_pair(grid);
        let q = DyadicCube::interval(2, 0);
        let opts = SawyerOptions::default();
        // M(chi_[2,3])(x) = 1/(3-x) on [0,1]; M(chi_[0,1])(x) = 1/x on [2,3].
        let forward_exact = ((0.25 - 1.0 / 9.0) / 2.0f64).powf(1.0 / 3.0);
        let dual_exact = (0.5 - 1.0 / 3.0f64).sqrt();
        let fwd = sawyer_test_estimate(&pair, &q, SawyerDirection::Forward, &opts).unwrap();
        let dual = sawyer_test_estimate(&pair, &q, SawyerDirection::Dual, &opts).unwrap();
        assert!((fwd.value - forward_exact).abs() < 1e-6);
        assert!((dual.value - dual_exact).abs() < 1e-6);
        assert!(fwd.error_estimate < 1e-6 && dual.error_estimate < 1e-6);
    }

    #[test]
    fn sawyer_empty_mass_is_zero() {
        let grid = line(3, -2);
        let pair = example_pair(grid);
        let q = DyadicCube::interval(0, 0);
        let v = sawyer_test(&pair, &q, SawyerDirection::Forward, &SawyerOptions::default()).unwrap();
        assert_eq!(v, 0.0);
        let zero = WeightPair::new(Weight::zero(grid), Weight::zero(grid), pair.exponents).unwrap();
        let cubes: Vec<_> = grid.cubes().collect();
        assert_eq!(sawyer_constants(&zero, &cubes, &SawyerOptions::default()).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn sawyer_singleton_collection() {
        let grid = line(2, -2);
        let pair = example_pair(grid);
        let q = DyadicCube::interval(2, 0);
        let opts = SawyerOptions { resolution: 4, ..Default::default() };
        let (c1, c2) = sawyer_constants(&pair, &[q], &opts).unwrap();
        assert_eq!(c1, sawyer_test(&pair, &q, SawyerDirection::Forward, &opts).unwrap());
        assert_eq!(c2, sawyer_test(&pair, &q, SawyerDirection::Dual, &opts).unwrap());
        assert!(sawyer_constants(&pair, &[], &opts).is_err());
    }

    #[test]
    fn dyadic_testing_is_dominated_by_hl_testing() {
        let grid = line(2, -3);
        let pair = example_pair(grid);
        let hl = SawyerOptions { resolution: 8, ..Default::default() };
        let dy = SawyerOptions { maximal: MaximalKind::Dyadic, ..hl };
        for q in grid.cubes() {
            for dir in [SawyerDirection::Forward, SawyerDirection::Dual] {
                let a = sawyer_test(&pair, &q, dir, &dy).unwrap();
                let b = sawyer_test(&pair, &q, dir, &hl).unwrap();
                assert!(a <= b + 1e-12, "{q:?} {dir:?}: {a} > {b}");
            }
        }
    }
}
