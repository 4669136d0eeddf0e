//! Float helpers backed by `libm` so the crate builds without `std`.

#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Round to nearest, ties to even.
#[inline]
pub(crate) fn round_half_even(x: f64) -> f64 {
    let r = libm::round(x);
    if (r - x).abs() == 0.5 {
        2.0 * libm::round(x / 2.0)
    } else {
        r
    }
}

/// `ceil(n * rate)` with a small guard so that e.g. `10 * 0.8` is 8 and not 9.
pub(crate) fn ceil_count(n: usize, rate: f64) -> usize {
    let v = n as f64 * rate;
    let r = libm::round(v);
    if (v - r).abs() < 1e-9 {
        r as usize
    } else {
        ceil(v) as usize
    }
}
