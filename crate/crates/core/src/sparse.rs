//! Sparse families, the positive dyadic operators `A_S` and `T_alpha`, outer
//! truncations `T_alpha^R`, the sparse-versus-maximal comparison and the
//! LSU testing quantities.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::grid::{lp_norm, CubeSums, DyadicCube, DyadicGrid, LevelAccumulator, StepFunction, Weight, WeightPair};
use crate::maximal::{dyadic_maximal, SawyerDirection};
use crate::num;
use crate::operator::LinearOperator;

/// Generations `{Q_j^k}_j` of dyadic cubes, `k = 0, 1, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseFamily {
    grid: DyadicGrid,
    generations: Vec<Vec<DyadicCube>>,
}

impl SparseFamily {
    /// No validation; see [`sparse_validate`].
    pub fn new(grid: DyadicGrid, generations: Vec<Vec<DyadicCube>>) -> Self {
        Self { grid, generations }
    }

    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    pub fn generations(&self) -> &[Vec<DyadicCube>] {
        &self.generations
    }

    pub fn cubes(&self) -> impl Iterator<Item = &DyadicCube> {
        self.generations.iter().flatten()
    }

    pub fn cube_count(&self) -> usize {
        self.generations.iter().map(Vec::len).sum()
    }

    /// Indicator of `Omega_k`, the union of generation `k` (empty past the last one).
    pub fn omega(&self, k: usize) -> StepFunction {
        let mut f = StepFunction::zeros(self.grid);
        if let Some(generation) = self.generations.get(k) {
            for q in generation.iter().filter(|q| self.grid.contains_cube(q)) {
                self.grid.for_each_cell_in(q, |i| f.values_mut()[i] = 1.0);
            }
        }
        f
    }
}

/// One violated clause of the sparse-family definition.
#[derive(Clone, Debug, PartialEq)]
pub enum SparseViolation {
    OutsideWindow { generation: usize, cube: DyadicCube },
    /// The cube meets another cube of its own generation.
    Overlap { generation: usize, cube: DyadicCube },
    /// The cube is not contained in `Omega_{generation - 1}`.
    NotNested { generation: usize, cube: DyadicCube },
    /// `|Omega_{generation + 1} ∩ Q| > |Q| / 2`.
    TooDense { generation: usize, cube: DyadicCube, covered: f64 },
}

impl fmt::Display for SparseViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OutsideWindow { generation, cube } => write!(f, "generation {generation}: {cube:?} is outside the window"),
            Self::Overlap { generation, cube } => write!(f, "generation {generation}: {cube:?} overlaps another cube"),
            Self::NotNested { generation, cube } => {
                write!(f, "generation {generation}: {cube:?} is not inside the previous generation")
            }
            Self::TooDense { generation, cube, covered } => {
                write!(f, "generation {generation}: next generation covers {covered} of {cube:?}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseReport {
    pub violations: Vec<SparseViolation>,
}

impl SparseReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn into_result(self) -> Result<()> {
        match self.violations.into_iter().next() {
            Some(v) => Err(Error::NotSparse(v)),
            None => Ok(()),
        }
    }
}

/// Checks disjointness within generations, `Omega_{k+1} ⊆ Omega_k`, and
/// `|Omega_{k+1} ∩ Q_j^k| <= |Q_j^k| / 2`.
pub fn sparse_validate(s: &SparseFamily) -> SparseReport {
    let grid = s.grid;
    let dim = grid.dim();
    let mut report = SparseReport::default();
    for (k, generation) in s.generations.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for q in generation {
            if !grid.contains_cube(q) {
                report.violations.push(SparseViolation::OutsideWindow { generation: k, cube: *q });
            } else if !seen.insert(*q) {
                report.violations.push(SparseViolation::Overlap { generation: k, cube: *q });
            }
        }
        for q in &seen {
            let clash = (1..=(grid.top() - q.level()) as u32).any(|j| seen.contains(&q.ancestor(j)));
            if clash {
                report.violations.push(SparseViolation::Overlap { generation: k, cube: *q });
            }
        }
    }
    let sums: Vec<CubeSums> = (0..=s.generations.len()).map(|k| CubeSums::integrals(&s.omega(k))).collect();
    for (k, generation) in s.generations.iter().enumerate() {
        for q in generation.iter().filter(|q| grid.contains_cube(q)) {
            let measure = q.measure(dim);
            if k > 0 && sums[k - 1].integral(q) != measure {
                report.violations.push(SparseViolation::NotNested { generation: k, cube: *q });
            }
            let covered = sums[k + 1].integral(q);
            if covered > 0.5 * measure {
                report.violations.push(SparseViolation::TooDense { generation: k, cube: *q, covered: covered / measure });
            }
        }
    }
    report
}

/// Stopping-time family of `f >= 0` below `top`: generation `k + 1` consists of
/// the maximal dyadic subcubes `Q'` of generation-`k` cubes `Q` with
/// `f_{Q'} > factor * f_Q`. The result is validated before it is returned.
pub fn sparse_from_stopping(f: &StepFunction, top: &DyadicCube, factor: f64) -> Result<SparseFamily> {
    let grid = *f.grid();
    grid.check_cube(top)?;
    f.check_nonnegative()?;
    if !(factor > 1.0 && factor.is_finite()) {
        return Err(Error::InvalidParameter("stopping factor must be greater than 1"));
    }
    let sums = CubeSums::integrals(f);
    let dim = grid.dim();
    let mut generations = vec![vec![*top]];
    loop {
        let mut next = Vec::new();
        for q in generations.last().unwrap() {
            let avg = sums.average(q);
            if avg == 0.0 {
                continue;
            }
            let threshold = factor * avg;
            let mut stack: Vec<DyadicCube> = q.children(dim).filter(|c| c.level() >= grid.bottom()).collect();
            stack.reverse();
            while let Some(c) = stack.pop() {
                if sums.average(&c) > threshold {
                    next.push(c);
                } else if c.level() > grid.bottom() {
                    let start = stack.len();
                    stack.extend(c.children(dim));
                    stack[start..].reverse();
                }
            }
        }
        if next.is_empty() {
            break;
        }
        generations.push(next);
    }
    let family = SparseFamily::new(grid, generations);
    sparse_validate(&family).into_result()?;
    Ok(family)
}

/// Nonnegative coefficients `alpha_Q` (absent cubes have `alpha_Q = 0`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientMap {
    entries: BTreeMap<DyadicCube, f64>,
}

impl CoefficientMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, cube: DyadicCube, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite(self.entries.len()));
        }
        if value < 0.0 {
            return Err(Error::NegativeValue { index: self.entries.len(), value });
        }
        self.entries.insert(cube, value);
        Ok(())
    }

    /// `alpha_Q = 1` on the cubes of `s`, `0` elsewhere.
    pub fn indicator(s: &SparseFamily) -> Self {
        Self { entries: s.cubes().map(|q| (*q, 1.0)).collect() }
    }

    pub fn get(&self, cube: &DyadicCube) -> f64 {
        self.entries.get(cube).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DyadicCube, &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut out = Self::new();
        for (q, v) in &self.entries {
            out.insert(*q, c * v)?;
        }
        Ok(out)
    }

    /// Only the cubes that contain `r`.
    pub fn restricted_to_ancestors(&self, r: &DyadicCube) -> Self {
        Self { entries: self.entries.iter().filter(|(q, _)| q.contains(r)).map(|(q, v)| (*q, *v)).collect() }
    }
}

impl FromIterator<(DyadicCube, f64)> for CoefficientMap {
    /// Panics on negative or non-finite values.
    fn from_iter<I: IntoIterator<Item = (DyadicCube, f64)>>(iter: I) -> Self {
        let mut m = Self::new();
        for (q, v) in iter {
            m.insert(q, v).expect("coefficients must be finite and nonnegative");
        }
        m
    }
}

impl LinearOperator for CoefficientMap {
    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        talpha_apply(self, f)
    }

    fn is_positive(&self) -> bool {
        true
    }
}

/// `T_alpha f = sum_Q alpha_Q f_Q chi_Q`.
pub fn talpha_apply(alpha: &CoefficientMap, f: &StepFunction) -> Result<StepFunction> {
    let grid = *f.grid();
    let sums = CubeSums::integrals(f);
    let mut acc = LevelAccumulator::new(grid);
    for (q, &a) in alpha.iter() {
        grid.check_cube(q)?;
        if a != 0.0 {
            acc.add(q, a * sums.average(q));
        }
    }
    Ok(acc.into_step())
}

/// `T_alpha^R f = sum_{Q ⊇ R} alpha_Q f_Q chi_Q`.
pub fn talpha_outer(alpha: &CoefficientMap, r: &DyadicCube, f: &StepFunction) -> Result<StepFunction> {
    f.grid().check_cube(r)?;
    talpha_apply(&alpha.restricted_to_ancestors(r), f)
}

/// `A_S f = sum_{Q in S} f_Q chi_Q` for a valid sparse family.
pub fn sparse_apply(s: &SparseFamily, f: &StepFunction) -> Result<StepFunction> {
    if s.grid != *f.grid() {
        return Err(Error::GridMismatch);
    }
    sparse_validate(s).into_result()?;
    talpha_apply(&CoefficientMap::indicator(s), f)
}

/// `A_S` as an operator; the family is validated once at construction.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    family: SparseFamily,
    alpha: CoefficientMap,
}

impl SparseOperator {
    pub fn new(family: SparseFamily) -> Result<Self> {
        sparse_validate(&family).into_result()?;
        let alpha = CoefficientMap::indicator(&family);
        Ok(Self { family, alpha })
    }

    pub fn family(&self) -> &SparseFamily {
        &self.family
    }
}

impl LinearOperator for SparseOperator {
    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        if self.family.grid != *f.grid() {
            return Err(Error::GridMismatch);
        }
        talpha_apply(&self.alpha, f)
    }

    fn is_positive(&self) -> bool {
        true
    }
}

/// `(1 - 2^-n)^-1`, the geometric-series bound for `A^R (f chi_R) / M_D (f chi_R)`.
pub fn am_sharp_constant(dim: usize) -> f64 {
    1.0 / (1.0 - num::exp2i(-(dim as i32)))
}

/// `sup_x A_S^R(f chi_R)(x) / M_D(f chi_R)(x)` with `0/0 = 0`.
pub fn am_ratio(s: &SparseFamily, r: &DyadicCube, f: &StepFunction) -> Result<f64> {
    if s.grid != *f.grid() {
        return Err(Error::GridMismatch);
    }
    f.check_nonnegative()?;
    sparse_validate(s).into_result()?;
    let g = f.restrict(r);
    let a = talpha_outer(&CoefficientMap::indicator(s), r, &g)?;
    let m = dyadic_maximal(&g);
    Ok(a.values().iter().zip(m.values()).fold(0.0, |best, (&x, &y)| best.max(num::ratio(x, y))))
}

fn lsu_sides(pair: &WeightPair, dir: SawyerDirection) -> (&Weight, &Weight, f64, f64) {
    let e = pair.exponents;
    match dir {
        SawyerDirection::Forward => (&pair.sigma, &pair.u, e.q(), 1.0 / e.p()),
        SawyerDirection::Dual => (&pair.u, &pair.sigma, e.p_dual(), 1.0 / e.q_dual()),
    }
}

/// LSU testing ratio for `R`:
/// Forward `(int T_alpha^R(sigma chi_R)^q u)^{1/q} / sigma(R)^{1/p}`,
/// Dual `(int T_alpha^R(u chi_R)^{p'} sigma)^{1/p'} / u(R)^{1/q'}`.
/// Integrals are exact; `0/0 = 0` and `x/0 = +inf`.
pub fn lsu_test(alpha: &CoefficientMap, pair: &WeightPair, r: &DyadicCube, dir: SawyerDirection) -> Result<f64> {
    let (source, target, exponent, denom_exp) = lsu_sides(pair, dir);
    let g = talpha_outer(alpha, r, &source.as_step().restrict(r))?;
    let num = lp_norm(&g, target, exponent)?;
    Ok(num::ratio(num, num::pow(source.mass(r), denom_exp)))
}

/// `(C1, C2)`: suprema of the Forward and Dual LSU ratios over every window cube.
///
/// Uses the annulus decomposition: `T_alpha^R(w chi_R)` equals
/// `w(R) sum_{j >= k} alpha_{R_j} / |R_j|` on `R_k \ R_{k-1}`.
pub fn lsu_constants(alpha: &CoefficientMap, pair: &WeightPair) -> Result<(f64, f64)> {
    let grid = *pair.grid();
    if let Some((q, _)) = alpha.iter().find(|(q, _)| !grid.contains_cube(q)) {
        return Err(Error::CubeOutsideWindow(*q));
    }
    let dim = grid.dim();
    let u_sums = CubeSums::integrals(pair.u.as_step());
    let s_sums = CubeSums::integrals(pair.sigma.as_step());
    let mut out = [0.0f64; 2];
    for (slot, dir) in [SawyerDirection::Forward, SawyerDirection::Dual].into_iter().enumerate() {
        let (_, _, exponent, denom_exp) = lsu_sides(pair, dir);
        let (src, tgt) = match dir {
            SawyerDirection::Forward => (&s_sums, &u_sums),
            SawyerDirection::Dual => (&u_sums, &s_sums),
        };
        let mut tail = Vec::new();
        for r in grid.cubes() {
            let mass = src.integral(&r);
            if mass == 0.0 {
                continue;
            }
            let chain_len = (grid.top() - r.level()) as u32 + 1;
            tail.clear();
            tail.extend((0..chain_len).map(|j| {
                let q = r.ancestor(j);
                alpha.get(&q) / q.measure(dim)
            }));
            for j in (0..tail.len().saturating_sub(1)).rev() {
                tail[j] += tail[j + 1];
            }
            let mut total = 0.0;
            let mut inner = 0.0;
            for (j, &c) in tail.iter().enumerate() {
                let outer = tgt.integral(&r.ancestor(j as u32));
                let annulus = (outer - inner).max(0.0);
                inner = outer;
                if c > 0.0 && annulus > 0.0 {
                    total += num::pow(mass * c, exponent) * annulus;
                }
            }
            let value = num::ratio(num::pow(total, 1.0 / exponent), num::pow(mass, denom_exp));
            out[slot] = out[slot].max(value);
        }
    }
    Ok((out[0], out[1]))
}

/// `sup_x |op f|(x) / A_S |f|(x)`, `0/0 = 0`.
pub fn pointwise_domination_constant(op: &dyn LinearOperator, f: &StepFunction, s: &SparseFamily) -> Result<f64> {
    let a = sparse_apply(s, &f.abs())?;
    let t = op.apply(f)?;
    Ok(t.values().iter().zip(a.values()).fold(0.0, |best, (&x, &y)| best.max(num::ratio(num::abs(x), y))))
}
