//! Acceptance suite: one line per criterion, exit status 1 if any fails.
//!
//! Runs with its own `main` so the verdict lines reach the terminal under a
//! plain `cargo test`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use twoweight_core::shifts::RandomShiftOptions;
use twoweight_core::{
    czo_star_at, dyadic_maximal, random_shift, sawyer_test, shift_truncated, shift_window_sum, weak_lq_norm, DyadicCube,
    DyadicGrid, ExponentPair, SawyerDirection, SawyerOptions, StepFunction, TruncationWindow, Weight, WeightPair,
};
use twoweight_lab::calibration::{C_CAL, C_EMP, C_EMP_WEAK};
use twoweight_lab::random::trial_rng;
use twoweight_lab::{run, Case, Report, Settings};

const ACCEPTANCE_SEED: u64 = 0xACCE_0001;

const AM_BOUND_LINE: f64 = 2.0 + 1e-9;
const AM_BOUND_PLANE: f64 = 4.0 / 3.0 + 1e-9;
const AM_TRIPLES: (usize, usize) = (200, 50);
const AM_RUNTIME: Duration = Duration::from_secs(60);

const EXAMPLE_FORWARD: f64 = 0.41135;
const EXAMPLE_DUAL: f64 = 0.40825;
const EXAMPLE_TOLERANCE: f64 = 1e-2;
const EXAMPLE_RUNTIME: Duration = Duration::from_secs(30);

const SHIFT_GAP: f64 = 1e-12;
const SHIFT_TRIALS: usize = 50;

const ORACLE_TRIALS: usize = 100;
const ORACLE_MAX_CELLS: usize = 1 << 8;
/// Relative slack for the final `mass^(1/q)` of the weak norm; thresholds and masses are compared exactly.
const WEAK_POW_ULPS: f64 = 4.0;

const DOMINATION_TRIALS: usize = 100;
const DOMINATION_SHIFTS: usize = 20;

const TESTING_TRIALS: usize = 100;

const TRUNCATION_TRIALS: usize = 20;
const TRUNCATION_SLACK: f64 = 1e-12;
const CZO_TOLERANCE: f64 = 1e-6;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn repro(case: Case) -> (Report, Duration) {
    let start = Instant::now();
    let report = run(&Settings::for_case(case)).expect("default settings run");
    (report, start.elapsed())
}

fn check_value(report: &Report, name: &str) -> Option<(f64, f64)> {
    report.checks.iter().find(|c| c.name == name).map(|c| (c.measured.0, c.threshold.0))
}

fn measurement(report: &Report, name: &str) -> Option<f64> {
    report.measurements.iter().find(|m| m.name == name).map(|m| m.value.0)
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "missing".to_string(), |x| x.to_string())
}

fn failed_checks(report: &Report) -> String {
    report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect::<Vec<_>>().join("; ")
}

fn am_constant() -> Outcome {
    let settings = Settings::for_case(Case::AmConstant);
    let (report, elapsed) = repro(Case::AmConstant);
    let line = check_value(&report, "max am_ratio (n=1)");
    let plane = check_value(&report, "max am_ratio (n=2)");
    let samples = (measurement(&report, "am_ratio (n=1)/max"), measurement(&report, "am_ratio (n=2)/max"));
    let (Some((l, lt)), Some((p, pt))) = (line, plane) else {
        return outcome(false, "report lacks the n=1 or n=2 check");
    };
    let ok = l <= AM_BOUND_LINE
        && p <= AM_BOUND_PLANE
        && (lt - AM_BOUND_LINE).abs() < 1e-15
        && (pt - AM_BOUND_PLANE).abs() < 1e-15
        && samples.0 == Some(l)
        && samples.1 == Some(p)
        && settings.trials == AM_TRIPLES.0
        && settings.trials / 4 == AM_TRIPLES.1
        && report.passed
        && elapsed < AM_RUNTIME;
    outcome(ok, format!("max ratio n=1 {l} (<= {AM_BOUND_LINE}), n=2 {p} (<= {AM_BOUND_PLANE}), {elapsed:.2?}"))
}

fn example_pair() -> Outcome {
    let (report, elapsed) = repro(Case::ExamplePair);
    let grid = DyadicGrid::standard(1, 3, -10).unwrap();
    let u = Weight::indicator(grid, &DyadicCube::interval(0, 0));
    let sigma = Weight::indicator(grid, &DyadicCube::interval(0, 2));
    let pair = WeightPair::new(u, sigma, ExponentPair::new(2.0, 3.0).unwrap()).unwrap();
    let q = DyadicCube::interval(2, 0);
    let opts = SawyerOptions::default();
    let forward = sawyer_test(&pair, &q, SawyerDirection::Forward, &opts).unwrap();
    let dual = sawyer_test(&pair, &q, SawyerDirection::Dual, &opts).unwrap();
    // (int_0^1 (3 - x)^-3 dx)^{1/3} and (int_2^3 x^-2 dx)^{1/2}.
    let forward_exact = ((1.0 / 4.0 - 1.0 / 9.0) / 2.0f64).powf(1.0 / 3.0);
    let dual_exact = (1.0 / 2.0 - 1.0 / 3.0f64).sqrt();
    let errors = |prefix: &str| -> Vec<f64> {
        [16, 32, 64].iter().filter_map(|r| measurement(&report, &format!("{prefix}/error at resolution {r}"))).collect()
    };
    let shrinking = |e: &[f64]| e.len() == 3 && e.windows(2).all(|w| w[1] <= w[0]);
    let ok = (forward - EXAMPLE_FORWARD).abs() <= EXAMPLE_TOLERANCE
        && (dual - EXAMPLE_DUAL).abs() <= EXAMPLE_TOLERANCE
        && measurement(&report, "forward/value") == Some(forward)
        && measurement(&report, "dual/value") == Some(dual)
        && (forward - forward_exact).abs() < 1e-6
        && (dual - dual_exact).abs() < 1e-6
        && shrinking(&errors("forward"))
        && shrinking(&errors("dual"))
        && report.passed
        && elapsed < EXAMPLE_RUNTIME;
    let detail = if report.passed {
        format!("forward {forward:.6}, dual {dual:.6} at 16 samples/cell, errors shrink with resolution, {elapsed:.2?}")
    } else {
        format!("failing checks: {}", failed_checks(&report))
    };
    outcome(ok, detail)
}

fn hilbert_shift() -> Outcome {
    let settings = Settings::for_case(Case::HilbertShift);
    let (report, _) = repro(Case::HilbertShift);
    let gamma = check_value(&report, "gamma").map(|c| c.0);
    let kappa = check_value(&report, "complexity").map(|c| c.0);
    let gap = report.checks.iter().find(|c| c.name.starts_with("max |H^d f")).map(|c| c.measured.0);
    let ok = settings.trials == SHIFT_TRIALS
        && gamma == Some(std::f64::consts::SQRT_2)
        && kappa == Some(1.0)
        && gap.is_some_and(|g| g <= SHIFT_GAP)
        && report.passed;
    outcome(ok, format!("gamma {}, complexity {}, max gap {} over {SHIFT_TRIALS} f", show(gamma), show(kappa), show(gap)))
}

/// Values in `k / 64`, `|k| <= 256`: every sum below is exact.
fn dyadic_rational_step(grid: DyadicGrid, signed: bool, r: &mut impl Rng) -> StepFunction {
    let lo = if signed { -256 } else { 0 };
    StepFunction::from_cells(grid, |_| if r.random_bool(0.3) { 0.0 } else { r.random_range(lo..=256) as f64 / 64.0 }).unwrap()
}

fn brute_maximal(f: &StepFunction) -> Vec<f64> {
    let g = *f.grid();
    (0..g.cell_count())
        .map(|i| {
            let cell = g.cell_cube(i);
            let mut best: f64 = 0.0;
            for q in g.cubes().filter(|q| q.contains(&cell)) {
                let mut s = 0.0;
                g.for_each_cell_in(&q, |j| s += f.values()[j].abs());
                best = best.max(s * g.cell_measure() / q.measure(g.dim()));
            }
            best
        })
        .collect()
}

fn brute_weak(f: &StepFunction, u: &StepFunction, q: f64) -> f64 {
    let mu = f.grid().cell_measure();
    let mut best: f64 = 0.0;
    for &t in f.values() {
        let t = t.abs();
        let mass: f64 = f.values().iter().zip(u.values()).filter(|(v, _)| v.abs() >= t).map(|(_, w)| w).sum();
        if t > 0.0 && mass > 0.0 {
            best = best.max(t * (mass * mu).powf(1.0 / q));
        }
    }
    best
}

fn oracle_equivalence() -> Outcome {
    let mut windows = Vec::new();
    for depth in 0..=8 {
        windows.push(DyadicGrid::standard(1, 1, 1 - depth).unwrap());
    }
    for depth in 0..=4 {
        windows.push(DyadicGrid::new(2, &[0.5, -1.0], 0, -depth).unwrap());
    }
    assert!(windows.iter().all(|g| g.cell_count() <= ORACLE_MAX_CELLS));
    let (mut maximal_bad, mut weak_bad) = (0, 0);
    for i in 0..ORACLE_TRIALS {
        let grid = windows[i % windows.len()];
        let mut r = trial_rng(ACCEPTANCE_SEED, 4, i as u64);
        let f = dyadic_rational_step(grid, true, &mut r);
        if dyadic_maximal(&f).values() != &brute_maximal(&f)[..] {
            maximal_bad += 1;
        }
        let u = dyadic_rational_step(grid, false, &mut r);
        let q = [1.5, 2.0, 3.0, 5.0][i % 4];
        let fast = weak_lq_norm(&f, &Weight::new(u.clone()).unwrap(), q).unwrap();
        let slow = brute_weak(&f, &u, q);
        if (fast - slow).abs() > WEAK_POW_ULPS * f64::EPSILON * slow {
            weak_bad += 1;
        }
    }
    outcome(
        maximal_bad == 0 && weak_bad == 0,
        format!("{ORACLE_TRIALS} f on {} windows: maximal mismatches {maximal_bad}, weak-norm mismatches {weak_bad}", windows.len()),
    )
}

fn sparse_domination() -> Outcome {
    let settings = Settings::for_case(Case::SparseDomination);
    let (report, _) = repro(Case::SparseDomination);
    let max = check_value(&report, "max pointwise domination constant");
    let hilbert = measurement(&report, "hilbert/max").is_some();
    let shifts = (0..DOMINATION_SHIFTS).filter(|j| report.measurements.iter().any(|m| m.name.starts_with(&format!("shift-{j}(")))).count();
    let ok = settings.trials == DOMINATION_TRIALS
        && hilbert
        && shifts == DOMINATION_SHIFTS
        && max.is_some_and(|(m, t)| m <= C_CAL && t == C_CAL)
        && report.passed;
    let median = measurement(&report, "all operators/median");
    outcome(ok, format!("max constant {} (C_cal {C_CAL}), median {}, H^d + {shifts} shifts", show(max.map(|m| m.0)), show(median)))
}

fn testing_vs_norm() -> Outcome {
    let settings = Settings::for_case(Case::TestingVsNorm);
    let (report, _) = repro(Case::TestingVsNorm);
    let strong = check_value(&report, "max strong / max(C1, C2)");
    let weak = check_value(&report, "max weak / C2");
    let violations = check_value(&report, "violations");
    let ok = settings.trials == TESTING_TRIALS
        && (settings.exponents.p(), settings.exponents.q()) == (2.0, 3.0)
        && strong.is_some_and(|(m, t)| m <= C_EMP && t == C_EMP)
        && weak.is_some_and(|(m, t)| m <= C_EMP_WEAK && t == C_EMP_WEAK)
        && violations.is_some_and(|(v, _)| v == 0.0)
        && report.passed;
    outcome(
        ok,
        format!(
            "max strong ratio {} (C_emp {C_EMP}), max weak ratio {} (C_emp' {C_EMP_WEAK}), violations {}",
            show(strong.map(|s| s.0)),
            show(weak.map(|w| w.0)),
            show(violations.map(|v| v.0))
        ),
    )
}

fn truncation() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut windows_checked = 0usize;
    for i in 0..TRUNCATION_TRIALS {
        let mut r = trial_rng(ACCEPTANCE_SEED, 7, i as u64);
        let grid = DyadicGrid::standard(1, 1, 1 - r.random_range(3..=7)).unwrap();
        let (m, k) = (r.random_range(0..=3), r.random_range(0..=3));
        let spec = random_shift(&grid, m, k, r.random(), RandomShiftOptions { mean_zero: r.random_bool(0.5) }).unwrap();
        let f = StepFunction::from_cells(grid, |_| r.random_range(-1.0..=1.0)).unwrap();
        let star = shift_truncated(&spec, &f).unwrap();
        for w in TruncationWindow::all(&grid) {
            let part = shift_window_sum(&spec, &f, w).unwrap();
            for (s, p) in star.values().iter().zip(part.values()) {
                worst = worst.max(p.abs() - s);
            }
            windows_checked += 1;
        }
    }
    let grid = DyadicGrid::standard(1, 2, -4).unwrap();
    let chi = StepFunction::indicator(grid, &DyadicCube::interval(0, 0));
    let star = czo_star_at(&chi, 2.0).unwrap();
    let ln2 = std::f64::consts::LN_2;
    outcome(
        worst <= TRUNCATION_SLACK && (star - ln2).abs() <= CZO_TOLERANCE,
        format!("max |window sum| - T_* = {worst:e} over {windows_checked} windows; czo_star(chi[0,1))(2) = {star}"),
    )
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    for case in Case::ALL {
        let mut parallel = Settings::for_case(case);
        parallel.parallel = true;
        let mut serial = parallel.clone();
        serial.parallel = false;
        let render = |s: &Settings| {
            let r = run(s).unwrap().without_timestamp();
            let (mut json, mut csv) = (Vec::new(), Vec::new());
            r.write_json(&mut json).unwrap();
            r.write_csv(&mut csv).unwrap();
            (json, csv)
        };
        let first = render(&parallel);
        if first != render(&parallel) || first != render(&serial) {
            differing.push(case.name());
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} cases identical across reruns and serial/parallel", Case::ALL.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("averaging-operator sharp constant", am_constant),
        ("example pair", example_pair),
        ("Haar-shift form of H^d", hilbert_shift),
        ("oracle equivalence", oracle_equivalence),
        ("pointwise sparse domination", sparse_domination),
        ("testing vs norm", testing_vs_norm),
        ("truncation consistency", truncation),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let o = criterion();
        println!("criterion {} ({name}): {}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failures += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
