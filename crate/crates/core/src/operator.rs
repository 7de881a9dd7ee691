//! Linear operators acting on step functions of one grid.

use crate::error::Result;
use crate::grid::StepFunction;

/// A linear map on the step functions of a fixed grid.
pub trait LinearOperator {
    fn apply(&self, f: &StepFunction) -> Result<StepFunction>;

    /// `true` if nonnegative inputs always give nonnegative outputs.
    fn is_positive(&self) -> bool {
        false
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        (**self).apply(f)
    }

    fn is_positive(&self) -> bool {
        (**self).is_positive()
    }
}

/// The zero operator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Zero;

impl LinearOperator for Zero {
    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        Ok(StepFunction::zeros(*f.grid()))
    }

    fn is_positive(&self) -> bool {
        true
    }
}

/// `c * T`.
#[derive(Clone, Copy, Debug)]
pub struct Scaled<T> {
    pub factor: f64,
    pub inner: T,
}

impl<T: LinearOperator> LinearOperator for Scaled<T> {
    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        Ok(self.inner.apply(f)?.scale(self.factor))
    }

    fn is_positive(&self) -> bool {
        self.factor >= 0.0 && self.inner.is_positive()
    }
}
