//! The reproduction cases. Each turns [`Settings`] into a [`Report`].
//!
//! Trial `i` draws its randomness from `derive_seed(seed, stream, i)` only,
//! so parallel and serial runs produce identical reports.

use rayon::prelude::*;
use twoweight_core::seed::derive_seed;
use twoweight_core::{
    am_ratio, am_sharp_constant, dyadic_hilbert, hilbert_as_shift, norm_estimates, pointwise_domination_constant,
    random_shift, sawyer_constants, sawyer_test, shift_apply, sparse_from_stopping, testing_vs_norm_report,
    AscentConfig, CoefficientMap, DyadicCube, DyadicGrid, DyadicHilbert, HaarShiftSpec, HlMaximal1d, LinearOperator,
    RandomShiftOptions, SawyerDirection, SawyerOptions, StepFunction, Weight, WeightPair,
};

use crate::calibration::{C_CAL, C_EMP, C_EMP_WEAK};
use crate::config::{Case, Settings};
use crate::random::{random_coefficients, random_cube, random_step, random_weight, stream, trial_rng};
use crate::report::{Comparison, Report};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] twoweight_core::Error),
    #[error("{0}")]
    Unsupported(String),
}

pub type RunResult<T> = Result<T, RunError>;

/// Reference values for the example pair on `Q = [0, 4)`, `p = 2`, `q = 3`.
pub const EXAMPLE_FORWARD: f64 = 0.41135;
pub const EXAMPLE_DUAL: f64 = 0.40825;
pub const EXAMPLE_TOLERANCE: f64 = 1e-2;

/// `(int_0^1 (3 - x)^-3 dx)^{1/3}`.
pub fn example_forward_exact() -> f64 {
    ((0.25 - 1.0 / 9.0) / 2.0f64).cbrt()
}

/// `(int_2^3 x^-2 dx)^{1/2}`.
pub fn example_dual_exact() -> f64 {
    (1.0f64 / 6.0).sqrt()
}

/// Complexity types `(m, k)` with `max(m, k) <= 3` used for random shifts.
pub const SHIFT_TYPES: [(u32, u32); 15] =
    [(0, 1), (1, 0), (1, 1), (0, 2), (2, 0), (1, 2), (2, 1), (2, 2), (0, 3), (3, 0), (1, 3), (3, 1), (2, 3), (3, 2), (3, 3)];

/// Random cancellative shift number `j`, of type `SHIFT_TYPES[j % 15]`.
pub fn shift_family_member(grid: &DyadicGrid, seed: u64, j: usize) -> RunResult<HaarShiftSpec> {
    let (m, k) = SHIFT_TYPES[j % SHIFT_TYPES.len()];
    Ok(random_shift(grid, m, k, derive_seed(seed, stream::SHIFT, j as u64), RandomShiftOptions { mean_zero: true })?)
}

/// Ascent settings shared by the norm experiments and their calibration.
pub fn ascent_config(seed: u64) -> AscentConfig {
    AscentConfig { restarts: 6, max_iterations: 40, seed, ..AscentConfig::default() }
}

/// `f(0), ..., f(n - 1)`, in order, on the rayon pool or serially.
pub fn map_trials<T: Send>(n: usize, parallel: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn run(s: &Settings) -> RunResult<Report> {
    let mut report = Report::new(s.case.name(), s.seed);
    if s.trials == 0 {
        return Ok(report);
    }
    match s.case {
        Case::AmConstant => am_constant(s, &mut report)?,
        Case::ExamplePair => example_pair(s, &mut report)?,
        Case::HilbertShift => hilbert_shift(s, &mut report)?,
        Case::SparseDomination => sparse_domination(s, &mut report)?,
        Case::TestingVsNorm => testing_vs_norm(s, &mut report)?,
        Case::WeakType => weak_type(s, &mut report)?,
    }
    Ok(report)
}

fn require_line(s: &Settings) -> RunResult<()> {
    if s.grid.dim() != 1 {
        return Err(RunError::Unsupported(format!("{} needs a one-dimensional grid", s.case.name())));
    }
    Ok(())
}

/// `A_S^R(f chi_R) <= (1 - 2^-n)^-1 M_D(f chi_R)` on random triples.
fn am_constant(s: &Settings, report: &mut Report) -> RunResult<()> {
    let runs: Vec<(DyadicGrid, usize)> = if s.grid_overridden {
        vec![(s.grid, s.trials)]
    } else {
        vec![(s.grid, s.trials), (DyadicGrid::standard(2, 1, -4)?, s.trials.div_ceil(4))]
    };
    for (gi, (grid, trials)) in runs.into_iter().enumerate() {
        let label = format!("n={}", grid.dim());
        let ratios = map_trials(trials, s.parallel, |i| -> RunResult<f64> {
            let mut r = trial_rng(s.seed, 10 + gi as u64, i as u64);
            let g = random_step(&grid, false, &mut r);
            let family = sparse_from_stopping(&g, &grid.top_cube(), 2.0)?;
            let cube = random_cube(&grid, &mut r);
            let f = random_step(&grid, false, &mut r);
            Ok(am_ratio(&family, &cube, &f)?)
        })
        .into_iter()
        .collect::<RunResult<Vec<f64>>>()?;
        report.check(format!("max am_ratio ({label})"), max_of(&ratios), Comparison::AtMost, am_sharp_constant(grid.dim()) + 1e-9);
        report.distribution(&format!("am_ratio ({label})"), &ratios);
    }
    Ok(())
}

fn example_weights(grid: &DyadicGrid) -> RunResult<WeightPair> {
    let fits = grid.dim() == 1 && grid.top() >= 2 && grid.bottom() <= 0 && grid.shift()[0] == 0.0;
    if !fits {
        return Err(RunError::Unsupported("example-pair needs an unshifted 1-D window containing [0, 4)".into()));
    }
    let u = Weight::indicator(*grid, &DyadicCube::interval(0, 0));
    let sigma = Weight::indicator(*grid, &DyadicCube::interval(0, 2));
    Ok(WeightPair::new(u, sigma, twoweight_core::ExponentPair::new(2.0, 3.0)?)?)
}

fn example_pair(s: &Settings, report: &mut Report) -> RunResult<()> {
    require_line(s)?;
    let grid = s.grid;
    let pair = example_weights(&grid)?;
    let q = DyadicCube::interval(2, 0);
    let opts = |resolution| SawyerOptions { resolution, maximal: s.maximal };
    let exact = [example_forward_exact(), example_dual_exact()];
    let reference = [EXAMPLE_FORWARD, EXAMPLE_DUAL];
    for (d, dir) in [SawyerDirection::Forward, SawyerDirection::Dual].into_iter().enumerate() {
        let name = ["forward", "dual"][d];
        let values = [1, 2, 4]
            .map(|k| sawyer_test(&pair, &q, dir, &opts(k * s.resolution)))
            .into_iter()
            .collect::<Result<Vec<f64>, _>>()?;
        report.measure(format!("{name}/value"), values[0]);
        report.measure(format!("{name}/closed_form"), exact[d]);
        report.check(
            format!("{name} testing ratio on [0,4) within tolerance of {}", reference[d]),
            (values[0] - reference[d]).abs(),
            Comparison::AtMost,
            EXAMPLE_TOLERANCE,
        );
        let errors: Vec<f64> = values.iter().map(|v| (v - exact[d]).abs()).collect();
        for (k, e) in errors.iter().enumerate() {
            report.measure(format!("{name}/error at resolution {}", s.resolution << k), *e);
        }
        report.check(
            format!("{name} error does not grow as resolution doubles"),
            (errors[1] - errors[0]).max(errors[2] - errors[1]),
            Comparison::AtMost,
            1e-12,
        );
    }
    let cubes: Vec<DyadicCube> = grid.cubes().collect();
    let (c1, c2) = sawyer_constants(&pair, &cubes, &opts(s.resolution))?;
    report.measure("sup forward over window", c1);
    report.measure("sup dual over window", c2);
    report.check("sup forward over window is finite", c1, Comparison::AtMost, f64::MAX);
    report.check("sup dual over window is finite", c2, Comparison::AtMost, f64::MAX);

    // M(chi_{[2,3] ∩ Q})(x) <= |[2,3] ∩ Q| for x in [0,1] ∩ Q.
    let unit = DyadicCube::interval(0, 0);
    let samples_per_cell = s.resolution;
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut samples = 0usize;
    for cube in cubes.iter().filter(|c| c.intersects(&unit)) {
        let e = pair.sigma.as_step().restrict(cube);
        let mass = e.integral();
        if mass == 0.0 {
            continue;
        }
        let m = HlMaximal1d::new(&e)?;
        let target = if cube.contains(&unit) { unit } else { *cube };
        let h = grid.cell_side() / samples_per_cell as f64;
        grid.for_each_cell_in(&target, |i| {
            let x0 = grid.cell_midpoint(i)[0] - grid.cell_side() / 2.0;
            for k in 0..samples_per_cell {
                worst = worst.max(m.eval(x0 + (k as f64 + 0.5) * h) - mass);
                samples += 1;
            }
        });
    }
    report.measure("pointwise bound samples", samples as f64);
    report.check("max of M(chi_E)(x) - |E| over samples", worst, Comparison::AtMost, 1e-12);
    Ok(())
}

fn hilbert_shift(s: &Settings, report: &mut Report) -> RunResult<()> {
    require_line(s)?;
    let grid = s.grid;
    let (spec, gamma) = hilbert_as_shift(&grid)?;
    report.check("gamma", gamma, Comparison::Equal, std::f64::consts::SQRT_2);
    report.check("complexity", f64::from(spec.complexity()), Comparison::Equal, 1.0);
    let gaps = map_trials(s.trials, s.parallel, |i| -> RunResult<f64> {
        use rand::Rng;
        let mut r = trial_rng(s.seed, stream::FUNCTION, i as u64);
        let f = StepFunction::from_cells(grid, |_| r.random_range(-1.0..=1.0))?;
        let direct = dyadic_hilbert(&f)?;
        let via = shift_apply(&spec, &f)?;
        Ok(direct.values().iter().zip(via.values()).map(|(a, b)| (a - gamma * b).abs()).fold(0.0, f64::max))
    })
    .into_iter()
    .collect::<RunResult<Vec<f64>>>()?;
    report.check("max |H^d f - gamma S f|", max_of(&gaps), Comparison::AtMost, 1e-12);
    Ok(())
}

/// The operators of the domination experiment: `H^d` on lines, then `count` random shifts.
pub fn domination_operators(grid: &DyadicGrid, seed: u64, count: usize) -> RunResult<Vec<(String, Box<dyn LinearOperator + Send + Sync>)>> {
    let mut ops: Vec<(String, Box<dyn LinearOperator + Send + Sync>)> = Vec::new();
    if grid.dim() == 1 {
        ops.push(("hilbert".into(), Box::new(DyadicHilbert)));
    }
    for j in 0..count {
        let (m, k) = SHIFT_TYPES[j % SHIFT_TYPES.len()];
        if m.max(k) <= grid.depth() {
            ops.push((format!("shift-{j}({m},{k})"), Box::new(shift_family_member(grid, seed, j)?)));
        }
    }
    Ok(ops)
}

/// `sup |T f| / A_S |f|` with `S` the stopping family of `|f|` below the window top.
pub fn domination_constant(op: &dyn LinearOperator, f: &StepFunction) -> RunResult<f64> {
    let family = sparse_from_stopping(&f.abs(), &f.grid().top_cube(), 2.0)?;
    Ok(pointwise_domination_constant(op, f, &family)?)
}

fn sparse_domination(s: &Settings, report: &mut Report) -> RunResult<()> {
    let grid = s.grid;
    let ops = domination_operators(&grid, s.seed, 20)?;
    let rows = map_trials(s.trials, s.parallel, |i| -> RunResult<Vec<f64>> {
        let f = random_step(&grid, true, &mut trial_rng(s.seed, stream::FUNCTION, i as u64));
        let family = sparse_from_stopping(&f.abs(), &grid.top_cube(), 2.0)?;
        ops.iter().map(|(_, op)| Ok(pointwise_domination_constant(op.as_ref(), &f, &family)?)).collect()
    })
    .into_iter()
    .collect::<RunResult<Vec<Vec<f64>>>>()?;
    let all: Vec<f64> = rows.iter().flatten().copied().collect();
    report.check("max pointwise domination constant", max_of(&all), Comparison::AtMost, C_CAL);
    for (j, (name, _)) in ops.iter().enumerate() {
        let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        report.distribution(name, &column);
    }
    report.distribution("all operators", &all);
    Ok(())
}

/// One LSU instance: coefficients and a weight pair.
pub fn testing_instance(grid: &DyadicGrid, s: &Settings, seed: u64, i: usize, dual_only: bool) -> RunResult<(CoefficientMap, WeightPair)> {
    let mut r = trial_rng(seed, stream::COEFFICIENTS, i as u64);
    let alpha = random_coefficients(grid, 0.3, &mut r);
    let mut r = trial_rng(seed, stream::WEIGHT, i as u64);
    let (u, sigma) = if dual_only {
        (random_weight(grid, 3.0, 0.6, &mut r), random_weight(grid, 3.0, 0.0, &mut r))
    } else {
        (random_weight(grid, 2.0, 0.2, &mut r), random_weight(grid, 2.0, 0.2, &mut r))
    };
    Ok((alpha, WeightPair::new(u, sigma, s.exponents)?))
}

fn testing_vs_norm(s: &Settings, report: &mut Report) -> RunResult<()> {
    let grid = s.grid;
    let rows = map_trials(s.trials, s.parallel, |i| -> RunResult<_> {
        let (alpha, pair) = testing_instance(&grid, s, s.seed, i, false)?;
        Ok(testing_vs_norm_report(&alpha, &pair, &ascent_config(derive_seed(s.seed, 6, i as u64)))?)
    })
    .into_iter()
    .collect::<RunResult<Vec<_>>>()?;
    let strong: Vec<f64> = rows.iter().map(|r| r.strong_ratio).collect();
    let weak: Vec<f64> = rows.iter().map(|r| r.weak_ratio).collect();
    let violations = rows.iter().filter(|r| !(r.strong_ratio <= C_EMP && r.weak_ratio <= C_EMP_WEAK)).count();
    report.check("max strong / max(C1, C2)", max_of(&strong), Comparison::AtMost, C_EMP);
    report.check("max weak / C2", max_of(&weak), Comparison::AtMost, C_EMP_WEAK);
    report.check("violations", violations as f64, Comparison::Equal, 0.0);
    report.distribution("strong ratio", &strong);
    report.distribution("weak ratio", &weak);
    for (i, r) in rows.iter().enumerate() {
        for (name, v) in [("c1", r.c1), ("c2", r.c2), ("strong", r.strong), ("weak", r.weak), ("strong_ratio", r.strong_ratio), ("weak_ratio", r.weak_ratio)] {
            report.measure(format!("instance {i}/{name}"), v);
        }
    }
    Ok(())
}

/// Pairs with sparse `u`, where only the dual testing constant is informative.
fn weak_type(s: &Settings, report: &mut Report) -> RunResult<()> {
    let grid = s.grid;
    let rows = map_trials(s.trials, s.parallel, |i| -> RunResult<_> {
        let (alpha, pair) = testing_instance(&grid, s, s.seed, i, true)?;
        let (c1, c2) = twoweight_core::lsu_constants(&alpha, &pair)?;
        let (strong, weak) = norm_estimates(&alpha, &pair, &ascent_config(derive_seed(s.seed, 7, i as u64)))?;
        Ok((c1, c2, strong.value, weak.value))
    })
    .into_iter()
    .collect::<RunResult<Vec<_>>>()?;
    let ratio = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a / b };
    let weak_ratio: Vec<f64> = rows.iter().map(|r| ratio(r.3, r.1)).collect();
    let order: Vec<f64> = rows.iter().map(|r| ratio(r.3, r.2)).collect();
    let balance: Vec<f64> = rows.iter().map(|r| ratio(r.0, r.1)).collect();
    report.check("max weak / C2", max_of(&weak_ratio), Comparison::AtMost, C_EMP_WEAK);
    report.check("max weak / strong", max_of(&order), Comparison::AtMost, 1.0 + 1e-12);
    report.distribution("weak / C2", &weak_ratio);
    report.distribution("C1 / C2", &balance);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((example_forward_exact() - 0.4110353).abs() < 1e-6);
        assert!((example_dual_exact() - 0.408248).abs() < 1e-6);
    }

    #[test]
    fn zero_trials_give_an_empty_pass() {
        for case in Case::ALL {
            let mut s = Settings::for_case(case);
            s.trials = 0;
            let r = run(&s).unwrap();
            assert!(r.passed && r.checks.is_empty(), "{}", case.name());
        }
    }

    #[test]
    fn example_pair_rejects_small_windows() {
        let mut s = Settings::for_case(Case::ExamplePair);
        s.grid = DyadicGrid::standard(1, 1, -3).unwrap();
        assert!(matches!(run(&s), Err(RunError::Unsupported(_))));
    }

    #[test]
    fn trials_do_not_depend_on_scheduling() {
        let mut s = Settings::for_case(Case::HilbertShift);
        s.grid = DyadicGrid::standard(1, 1, -5).unwrap();
        s.trials = 6;
        let a = run(&s).unwrap().without_timestamp();
        s.parallel = false;
        assert_eq!(a, run(&s).unwrap().without_timestamp());
    }
}
