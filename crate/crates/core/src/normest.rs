//! Lower bounds for two-weight operator norms `L^p(v) -> L^q(u)` and
//! `L^p(v) -> L^{q,inf}(u)`.
//!
//! Test functions are written as `f = sigma * h`, so that
//! `||f||_{L^p(v)} = (int |h|^p sigma)^{1/p}` never touches `v` where
//! `sigma = 0`. The operator is tabulated on the cells where `sigma > 0` and
//! the ratio is maximized over a deterministic candidate pool: cube
//! indicators, seeded restarts of a normalized power ascent, and level-set
//! truncations of every ascent iterate. Each reported value is the ratio of
//! its witness recomputed through [`LinearOperator::apply`].

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{lp_norm, weak_lq_norm, StepFunction, Weight, WeightPair};
use crate::num;
use crate::operator::LinearOperator;
use crate::seed::{derive_seed, rng};
use crate::sparse::{lsu_constants, CoefficientMap};

/// Largest tabulated operator, in matrix entries.
const MAX_ENTRIES: usize = 1 << 22;
/// Cube-indicator candidates are skipped above this many multiply-adds.
const MAX_INDICATOR_WORK: usize = 1 << 26;
/// Level-set truncations tried per ascent iterate.
const LEVEL_SETS: usize = 8;
/// Halvings tried by the backtracking rule.
const MAX_HALVINGS: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    Strong,
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StepRule {
    /// Always take the power-iteration update.
    Fixed,
    /// Blend toward the update, halving until the ratio improves.
    #[default]
    Backtracking,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AscentConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub step_rule: StepRule,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self { restarts: 8, max_iterations: 50, step_rule: StepRule::Backtracking, tolerance: 1e-10, seed: 0 }
    }
}

impl AscentConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    /// `target_norm(op witness) / source_norm(witness)`.
    pub value: f64,
    pub witness: StepFunction,
    /// Candidates evaluated.
    pub trials: usize,
    /// Every restart met the tolerance before the iteration cap.
    pub converged: bool,
    pub mode: NormMode,
}

/// `(int |f / sigma|^p sigma)^{1/p}`, `+inf` if `f != 0` somewhere `sigma = 0`.
pub fn source_norm(f: &StepFunction, sigma: &Weight, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    if f.grid() != sigma.grid() {
        return Err(Error::GridMismatch);
    }
    let mut s = 0.0;
    for (&v, &w) in f.values().iter().zip(sigma.values()) {
        if v == 0.0 {
            continue;
        }
        if w == 0.0 {
            return Ok(f64::INFINITY);
        }
        s += num::pow(num::abs(v / w), p) * w;
    }
    Ok(num::pow(s * f.grid().cell_measure(), 1.0 / p))
}

fn target_norm(g: &StepFunction, u: &Weight, q: f64, mode: NormMode) -> Result<f64> {
    match mode {
        NormMode::Strong => lp_norm(g, u, q),
        NormMode::Weak => weak_lq_norm(g, u, q),
    }
}

/// The ratio whose supremum is the norm, evaluated through `op`.
fn witness_ratio(op: &dyn LinearOperator, pair: &WeightPair, f: &StepFunction, mode: NormMode) -> Result<f64> {
    let e = pair.exponents;
    let den = source_norm(f, &pair.sigma, e.p())?;
    let num = target_norm(&op.apply(f)?, &pair.u, e.q(), mode)?;
    Ok(num::ratio(num, den))
}

/// `op` restricted to `{sigma > 0}` in the `h` coordinates.
struct Tabulated<'a> {
    pair: &'a WeightPair,
    active: Vec<usize>,
    columns: Vec<Vec<f64>>,
    positive: bool,
}

struct Pool {
    trials: usize,
    best: [f64; 2],
    best_h: [Vec<f64>; 2],
}

impl Pool {
    fn new(k: usize) -> Self {
        Self {
            trials: 0,
            best: [f64::NEG_INFINITY; 2],
            best_h: [vec![0.0; k], vec![0.0; k]],
        }
    }

    /// Records `h`; the earliest candidate wins ties.
    fn offer(&mut self, h: &[f64], ratios: [f64; 2]) {
        for slot in 0..2 {
            if ratios[slot] > self.best[slot] {
                self.best[slot] = ratios[slot];
                self.best_h[slot].clear();
                self.best_h[slot].extend_from_slice(h);
            }
        }
        self.trials += 1;
    }
}

impl<'a> Tabulated<'a> {
    fn new(op: &dyn LinearOperator, pair: &'a WeightPair) -> Result<Self> {
        let grid = *pair.grid();
        let active: Vec<usize> = (0..grid.cell_count()).filter(|&j| pair.sigma.values()[j] > 0.0).collect();
        if active.len().saturating_mul(grid.cell_count()) > MAX_ENTRIES {
            return Err(Error::InvalidParameter("operator too large to tabulate"));
        }
        let mut columns = Vec::with_capacity(active.len());
        for &j in &active {
            let mut e = StepFunction::zeros(grid);
            e.values_mut()[j] = pair.sigma.values()[j];
            let col = op.apply(&e)?;
            if *col.grid() != grid {
                return Err(Error::GridMismatch);
            }
            columns.push(col.into_values());
        }
        Ok(Self { pair, active, columns, positive: op.is_positive() })
    }

    fn k(&self) -> usize {
        self.active.len()
    }

    fn image(&self, h: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.pair.grid().cell_count()];
        for (col, &c) in self.columns.iter().zip(h) {
            if c != 0.0 {
                for (gi, &b) in g.iter_mut().zip(col) {
                    *gi += c * b;
                }
            }
        }
        g
    }

    fn source(&self, h: &[f64]) -> f64 {
        let p = self.pair.exponents.p();
        let s: f64 = self.active.iter().zip(h).map(|(&j, &c)| num::pow(num::abs(c), p) * self.pair.sigma.values()[j]).sum();
        num::pow(s * self.pair.grid().cell_measure(), 1.0 / p)
    }

    /// `[strong, weak]` ratios of `sigma * h`.
    fn ratios(&self, h: &[f64]) -> [f64; 2] {
        let den = self.source(h);
        let g = StepFunction::from_raw(*self.pair.grid(), self.image(h));
        let q = self.pair.exponents.q();
        let strong = lp_norm(&g, &self.pair.u, q).unwrap_or(0.0);
        let weak = weak_lq_norm(&g, &self.pair.u, q).unwrap_or(0.0);
        [num::ratio(strong, den), num::ratio(weak, den)]
    }

    fn normalize(&self, h: &mut [f64]) -> bool {
        let n = self.source(h);
        if !(n > 0.0 && n.is_finite()) {
            return false;
        }
        h.iter_mut().for_each(|c| *c /= n);
        true
    }

    /// Stationarity map of `||B h||_q` on the unit sphere of `L^p(sigma)`.
    fn power_update(&self, h: &[f64]) -> Option<Vec<f64>> {
        let e = self.pair.exponents;
        let (q, p_dual) = (e.q(), e.p_dual());
        let u = self.pair.u.values();
        let w: Vec<f64> = self
            .image(h)
            .iter()
            .zip(u)
            .map(|(&g, &ui)| if g == 0.0 { 0.0 } else { ui * num::pow(num::abs(g), q - 1.0) * g.signum() })
            .collect();
        let mut next: Vec<f64> = self
            .columns
            .iter()
            .zip(&self.active)
            .map(|(col, &j)| {
                let s: f64 = col.iter().zip(&w).map(|(a, b)| a * b).sum();
                let s = if self.positive { s.max(0.0) } else { s };
                if s == 0.0 {
                    0.0
                } else {
                    s.signum() * num::pow(num::abs(s) / self.pair.sigma.values()[j], p_dual - 1.0)
                }
            })
            .collect();
        self.normalize(&mut next).then_some(next)
    }

    /// Offers `h` and its truncations to `{|h| >= t}` at evenly spaced ranks.
    fn offer_with_level_sets(&self, pool: &mut Pool, h: &[f64]) -> f64 {
        let r = self.ratios(h);
        pool.offer(h, r);
        let mut levels: Vec<f64> = h.iter().map(|c| num::abs(*c)).filter(|c| *c > 0.0).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        if levels.len() > 1 {
            let picks = LEVEL_SETS.min(levels.len() - 1);
            let mut last = f64::NAN;
            for i in 1..=picks {
                let t = levels[i * (levels.len() - 1) / picks];
                if t == last {
                    continue;
                }
                last = t;
                let cut: Vec<f64> = h.iter().map(|&c| if num::abs(c) >= t { c } else { 0.0 }).collect();
                let cr = self.ratios(&cut);
                pool.offer(&cut, cr);
            }
        }
        r[0]
    }

    fn start(&self, restart: usize, seed: u64) -> Vec<f64> {
        if restart == 0 {
            return vec![1.0; self.k()];
        }
        let mut g = rng(derive_seed(seed, 0, restart as u64));
        let lo = if self.positive { 0.0 } else { -1.0 };
        (0..self.k()).map(|_| g.random_range(lo..1.0)).collect()
    }

    /// One seeded restart; returns whether it met the tolerance.
    fn ascend(&self, pool: &mut Pool, restart: usize, cfg: &AscentConfig) -> bool {
        let mut h = self.start(restart, cfg.seed);
        if !self.normalize(&mut h) {
            return true;
        }
        let mut value = self.offer_with_level_sets(pool, &h);
        for _ in 0..cfg.max_iterations {
            let Some(update) = self.power_update(&h) else {
                return true;
            };
            let (next, next_value) = match cfg.step_rule {
                StepRule::Fixed => {
                    let v = self.offer_with_level_sets(pool, &update);
                    (update, v)
                }
                StepRule::Backtracking => {
                    let mut t = 1.0;
                    let mut accepted = None;
                    for _ in 0..=MAX_HALVINGS {
                        let mut trial: Vec<f64> = h.iter().zip(&update).map(|(a, b)| (1.0 - t) * a + t * b).collect();
                        if self.normalize(&mut trial) {
                            let v = self.offer_with_level_sets(pool, &trial);
                            if v >= value {
                                accepted = Some((trial, v));
                                break;
                            }
                        }
                        t *= 0.5;
                    }
                    match accepted {
                        Some(a) => a,
                        None => return true,
                    }
                }
            };
            let done = num::abs(next_value - value) <= cfg.tolerance * value.max(f64::MIN_POSITIVE);
            h = next;
            value = next_value;
            if done {
                return true;
            }
        }
        false
    }

    fn search(&self, cfg: &AscentConfig) -> (Pool, bool) {
        let grid = *self.pair.grid();
        let mut pool = Pool::new(self.k());
        if grid.cube_count().saturating_mul(self.k()).saturating_mul(grid.cell_count()) <= MAX_INDICATOR_WORK {
            for q in grid.cubes() {
                let h: Vec<f64> = self.active.iter().map(|&j| if q.contains(&grid.cell_cube(j)) { 1.0 } else { 0.0 }).collect();
                if h.iter().any(|c| *c != 0.0) {
                    let r = self.ratios(&h);
                    pool.offer(&h, r);
                }
            }
        }
        let mut converged = true;
        for restart in 0..cfg.restarts {
            converged &= self.ascend(&mut pool, restart, cfg);
        }
        (pool, converged)
    }

    fn witness(&self, h: &[f64]) -> StepFunction {
        let mut f = StepFunction::zeros(*self.pair.grid());
        for (&j, &c) in self.active.iter().zip(h) {
            f.values_mut()[j] = c * self.pair.sigma.values()[j];
        }
        f
    }
}

fn finish(op: &dyn LinearOperator, pair: &WeightPair, table: &Tabulated, pool: &Pool, converged: bool, mode: NormMode) -> Result<NormEstimate> {
    let slot = match mode {
        NormMode::Strong => 0,
        NormMode::Weak => 1,
    };
    let witness = table.witness(&pool.best_h[slot]);
    let value = witness_ratio(op, pair, &witness, mode)?;
    Ok(NormEstimate { value, witness, trials: pool.trials, converged, mode })
}

fn degenerate(pair: &WeightPair, mode: NormMode) -> NormEstimate {
    NormEstimate { value: 0.0, witness: StepFunction::zeros(*pair.grid()), trials: 0, converged: true, mode }
}

/// `(strong, weak)` estimates from one shared candidate pool.
pub fn norm_estimates(op: &dyn LinearOperator, pair: &WeightPair, cfg: &AscentConfig) -> Result<(NormEstimate, NormEstimate)> {
    cfg.validate()?;
    let table = Tabulated::new(op, pair)?;
    if table.k() == 0 {
        return Ok((degenerate(pair, NormMode::Strong), degenerate(pair, NormMode::Weak)));
    }
    let (pool, converged) = table.search(cfg);
    Ok((
        finish(op, pair, &table, &pool, converged, NormMode::Strong)?,
        finish(op, pair, &table, &pool, converged, NormMode::Weak)?,
    ))
}

/// Lower bound for the strong or weak two-weight norm of `op`.
pub fn norm_estimate(op: &dyn LinearOperator, pair: &WeightPair, mode: NormMode, cfg: &AscentConfig) -> Result<NormEstimate> {
    let (strong, weak) = norm_estimates(op, pair, cfg)?;
    Ok(match mode {
        NormMode::Strong => strong,
        NormMode::Weak => weak,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestingReport {
    pub c1: f64,
    pub c2: f64,
    pub strong: f64,
    pub weak: f64,
    /// `strong / max(c1, c2)`.
    pub strong_ratio: f64,
    /// `weak / c2`.
    pub weak_ratio: f64,
}

/// LSU testing constants of `T_alpha` next to its estimated norms.
pub fn testing_vs_norm_report(alpha: &CoefficientMap, pair: &WeightPair, cfg: &AscentConfig) -> Result<TestingReport> {
    let (c1, c2) = lsu_constants(alpha, pair)?;
    let (strong, weak) = norm_estimates(alpha, pair, cfg)?;
    Ok(TestingReport {
        c1,
        c2,
        strong: strong.value,
        weak: weak.value,
        strong_ratio: num::ratio(strong.value, c1.max(c2)),
        weak_ratio: num::ratio(weak.value, c2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DyadicCube, DyadicGrid, ExponentPair};
    use crate::operator::Zero;
    use crate::shifts::DyadicHilbert;
    use crate::sparse::{SparseFamily, SparseOperator};

    fn lebesgue(top: i32, bottom: i32) -> WeightPair {
        let g = DyadicGrid::standard(1, top, bottom).unwrap();
        WeightPair::new(Weight::lebesgue(g), Weight::lebesgue(g), ExponentPair::new(2.0, 3.0).unwrap()).unwrap()
    }

    #[test]
    fn source_norm_examples() {
        let pair = lebesgue(0, -2);
        let g = *pair.grid();
        let f = StepFunction::constant(g, 2.0).unwrap();
        assert_eq!(source_norm(&f, &pair.sigma, 2.0).unwrap(), 2.0);
        let half = Weight::indicator(g, &DyadicCube::interval(-1, 0));
        assert_eq!(source_norm(&f, &half, 2.0).unwrap(), f64::INFINITY);
        assert_eq!(source_norm(&StepFunction::zeros(g), &half, 2.0).unwrap(), 0.0);
        // f = sigma h with h = 1: the norm is sigma's mass to the 1/p.
        let s = half.as_step().scale(3.0);
        let w = Weight::new(s.clone()).unwrap();
        assert!((source_norm(&s, &w, 2.0).unwrap() - 1.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_average_has_norm_one() {
        let pair = lebesgue(0, -3);
        let op = SparseOperator::new(SparseFamily::new(*pair.grid(), vec![vec![DyadicCube::interval(0, 0)]])).unwrap();
        let est = norm_estimate(&op, &pair, NormMode::Strong, &AscentConfig::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-2, "{}", est.value);
        assert!(est.value <= 1.0 + 1e-12);
    }

    #[test]
    fn zero_operator_and_degenerate_pair() {
        let pair = lebesgue(0, -3);
        let est = norm_estimate(&Zero, &pair, NormMode::Strong, &AscentConfig::default()).unwrap();
        assert_eq!(est.value, 0.0);
        let g = *pair.grid();
        let dead = WeightPair::new(Weight::lebesgue(g), Weight::zero(g), pair.exponents).unwrap();
        let est = norm_estimate(&DyadicHilbert, &dead, NormMode::Weak, &AscentConfig::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.witness.is_zero());
    }

    #[test]
    fn estimates_are_recomputable_and_ordered() {
        let pair = lebesgue(1, -3);
        let cfg = AscentConfig { restarts: 3, ..AscentConfig::default() };
        let (s, w) = norm_estimates(&DyadicHilbert, &pair, &cfg).unwrap();
        assert_eq!(s.value, witness_ratio(&DyadicHilbert, &pair, &s.witness, NormMode::Strong).unwrap());
        assert_eq!(w.value, witness_ratio(&DyadicHilbert, &pair, &w.witness, NormMode::Weak).unwrap());
        assert!(w.value <= s.value * (1.0 + 1e-12));
        assert!(s.value > 0.0);
        assert_eq!(norm_estimates(&DyadicHilbert, &pair, &cfg).unwrap(), (s, w));
    }

    #[test]
    fn invalid_configs() {
        let pair = lebesgue(0, -2);
        let bad = AscentConfig { restarts: 0, ..AscentConfig::default() };
        assert!(norm_estimate(&Zero, &pair, NormMode::Strong, &bad).is_err());
        let bad = AscentConfig { tolerance: 0.0, ..AscentConfig::default() };
        assert!(norm_estimate(&Zero, &pair, NormMode::Strong, &bad).is_err());
    }

    #[test]
    fn report_examples() {
        let pair = lebesgue(0, -3);
        let cfg = AscentConfig::default();
        let zero = testing_vs_norm_report(&CoefficientMap::new(), &pair, &cfg).unwrap();
        assert_eq!(zero, TestingReport { c1: 0.0, c2: 0.0, strong: 0.0, weak: 0.0, strong_ratio: 0.0, weak_ratio: 0.0 });
        let alpha: CoefficientMap = [(DyadicCube::interval(0, 0), 1.0)].into_iter().collect();
        let r = testing_vs_norm_report(&alpha, &pair, &cfg).unwrap();
        assert_eq!(r.c1, 1.0);
        assert!((r.strong - 1.0).abs() < 1e-2);
        assert!((r.strong_ratio - 1.0).abs() < 1e-2);
        let r3 = testing_vs_norm_report(&alpha.scaled(3.0).unwrap(), &pair, &cfg).unwrap();
        assert!((r3.strong_ratio - r.strong_ratio).abs() < 1e-12);
        assert!((r3.weak_ratio - r.weak_ratio).abs() < 1e-12);
    }
}
