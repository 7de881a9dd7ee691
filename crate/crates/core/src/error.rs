use crate::grid::DyadicCube;
use crate::shifts::HaarViolation;
use crate::sparse::SparseViolation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported dimension {0} (supported: 1 and 2)")]
    UnsupportedDimension(usize),
    #[error("operation requires dimension {expected}, grid has dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid window: top level {top}, finest level {bottom}")]
    InvalidWindow { top: i32, bottom: i32 },
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("negative value {value} at index {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("level {level} is below the finest level {bottom}")]
    LevelUnderflow { level: i32, bottom: i32 },
    #[error("level {level} is above the window top level {top}")]
    LevelOverflow { level: i32, top: i32 },
    #[error("cube {0:?} is not a cube of the window")]
    CubeOutsideWindow(DyadicCube),
    #[error("inputs live on different grids")]
    GridMismatch,
    #[error("exponents must satisfy 1 < p < q < inf (got p = {p}, q = {q})")]
    InvalidExponents { p: f64, q: f64 },
    #[error("invalid exponent {0}")]
    InvalidExponent(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("not a sparse family: {0}")]
    NotSparse(SparseViolation),
    #[error("invalid Haar function: {0}")]
    InvalidHaar(HaarViolation),
    #[error("shift term {index}: {reason}")]
    InvalidShiftTerm { index: usize, reason: &'static str },
}
