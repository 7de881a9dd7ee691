//! Float helpers that work without `std`.

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `2^k`, exact for every exponent the grids allow.
#[inline]
pub(crate) fn exp2i(k: i32) -> f64 {
    libm::ldexp(1.0, k)
}

/// `a / b` with the testing-ratio conventions `0/0 = 0` and `x/0 = +inf`.
#[inline]
pub(crate) fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}
