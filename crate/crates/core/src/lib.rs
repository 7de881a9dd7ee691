//! Exact dyadic harmonic analysis on step functions.
//!
//! Everything here works on a bounded dyadic window: functions are piecewise
//! constant on the finest cells of a [`DyadicGrid`] and vanish outside it, so
//! every dyadic sum is finite and (apart from the Hardy–Littlewood testing
//! integrals) exact.
//!
//! * [`grid`]: cubes, step functions, weights and weighted norms.
//! * [`maximal`]: dyadic and Hardy–Littlewood maximal functions, Sawyer testing.
//! * [`shifts`]: Haar functions, Haar shifts and their truncations, the dyadic
//!   Hilbert transform and a truncated Hilbert-kernel operator.
//! * [`sparse`]: sparse families, positive dyadic operators and LSU testing.
//! * [`normest`]: lower bounds for two-weight operator norms.
#![no_std]

extern crate alloc;

pub mod error;
pub mod grid;
pub mod maximal;
pub mod normest;
pub mod operator;
pub mod seed;
pub mod shifts;
pub mod sparse;

mod num;

pub use error::{Error, Result};
pub use grid::{
    dual_exponents, lp_norm, weak_lq_norm, CubeSums, DyadicCube, DyadicGrid, ExponentPair,
    StepFunction, Weight, WeightPair, MAX_DIM,
};
pub use maximal::{
    dyadic_maximal, hl_maximal_at, sawyer_constants, sawyer_test, HlMaximal1d, MaximalKind,
    SawyerDirection, SawyerOptions,
};
pub use normest::{
    norm_estimate, norm_estimates, source_norm, testing_vs_norm_report, AscentConfig, NormEstimate,
    NormMode, StepRule, TestingReport,
};
pub use operator::LinearOperator;
pub use shifts::{
    czo_star, czo_star_at, dyadic_hilbert, haar_check_step, haar_validate, hilbert_as_shift,
    random_shift, shift_apply, shift_truncated, shift_window_sum, DyadicHilbert, HaarFunction,
    RandomShiftOptions,
    HaarReport, HaarShiftSpec, HaarViolation, ShiftTerm, TruncationWindow,
};
pub use sparse::{
    am_ratio, am_sharp_constant, lsu_constants, lsu_test, pointwise_domination_constant,
    sparse_apply, sparse_from_stopping, sparse_validate, talpha_apply, talpha_outer,
    CoefficientMap, SparseFamily, SparseOperator, SparseReport, SparseViolation,
};
