// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

pub(crate) use core::f64::consts::{FRAC_PI_2, LN_2, PI, TAU};

pub(crate) fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Tolerance under which an angle difference is treated as an exact
/// multiple of π.
pub(crate) fn pi_multiple_tolerance(scale: f64) -> f64 {
    8.0 * f64::EPSILON * scale.abs().max(PI)
}

/// Returns `m` when `delta` is within rounding of `m·π`.
pub(crate) fn near_pi_multiple(delta: f64) -> Option<i64> {
    let m = libm::round(delta / PI);
    let residual = delta - m * PI;
    (residual.abs() <= pi_multiple_tolerance(delta)).then_some(m as i64)
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn fitted_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_multiples() {
        assert_eq!(near_pi_multiple(0.3 + PI - 0.3), Some(1));
        assert_eq!(near_pi_multiple(-TAU), Some(-2));
        assert_eq!(near_pi_multiple(1e-9), None);
        assert_eq!(near_pi_multiple(0.0), Some(0));
    }

    #[test]
    fn factorials() {
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(10) - libm::log(3628800.0)).abs() < 1e-12);
    }
}
