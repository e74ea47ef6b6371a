// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Cartan development of λ-scaled paths into SL₂(ℝ).
//!
//! The path direction `(cos β, sin β)` is sent to
//! `M(β) = cos β·E₁ + sin β·E₂`, and the development solves
//! `dΓ/dt = λ·Γ·M(β_t)`. Since `M(β)² = I`, each constant-angle segment
//! contributes `exp(λΔ·M) = cosh(λΔ)·I + sinh(λΔ)·M` exactly.

use alloc::vec::Vec;
use core::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::{
    math::{fitted_slope, near_pi_multiple, LN_2},
    path::AngularPath,
    schedule::LambdaSchedule,
};

/// A real 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sl2Matrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

pub const E1: Sl2Matrix = Sl2Matrix::new(1.0, 0.0, 0.0, -1.0);
pub const E2: Sl2Matrix = Sl2Matrix::new(0.0, 1.0, 1.0, 0.0);
pub const E3: Sl2Matrix = Sl2Matrix::new(0.0, 1.0, -1.0, 0.0);

impl Sl2Matrix {
    pub const IDENTITY: Self = Self::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    /// Singular values `(σ_max, σ_min)` in closed form.
    pub fn singular_values(&self) -> (f64, f64) {
        let e = 0.5 * (self.m11 + self.m22);
        let f = 0.5 * (self.m11 - self.m22);
        let g = 0.5 * (self.m21 + self.m12);
        let h = 0.5 * (self.m21 - self.m12);
        let q = libm::hypot(e, h);
        let r = libm::hypot(f, g);
        (q + r, (q - r).abs())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.m11 - other.m11,
            self.m12 - other.m12,
            self.m21 - other.m21,
            self.m22 - other.m22,
        ]
        .iter()
        .fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Mul for Sl2Matrix {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.m11 * b.m11 + a.m12 * b.m21,
            a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21,
            a.m21 * b.m12 + a.m22 * b.m22,
        )
    }
}

/// `M(β) = cos β·E₁ + sin β·E₂`.
pub fn direction_matrix(angle: f64) -> Sl2Matrix {
    let (s, c) = libm::sincos(angle);
    Sl2Matrix::new(c, s, s, -c)
}

/// A matrix stored as `exp(log_scale)·unit`.
///
/// Rescaling of `unit` is done by exact powers of two whose exponents are
/// counted separately, so renormalization never perturbs the represented
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaledMatrix {
    pub unit: Sl2Matrix,
    log_base: f64,
    exp2: i64,
}

impl LogScaledMatrix {
    pub const IDENTITY: Self = Self {
        unit: Sl2Matrix::IDENTITY,
        log_base: 0.0,
        exp2: 0,
    };

    pub fn new(unit: Sl2Matrix, log_scale: f64) -> Self {
        Self {
            unit,
            log_base: log_scale,
            exp2: 0,
        }
        .renormalized()
    }

    pub fn log_scale(&self) -> f64 {
        self.log_base + self.exp2 as f64 * LN_2
    }

    fn renormalized(mut self) -> Self {
        let (smax, _) = self.unit.singular_values();
        if smax > 0.0 && smax.is_finite() && !(0.5..=2.0).contains(&smax) {
            let (_, e) = libm::frexp(smax);
            let k = i64::from(e);
            self.unit = self.unit.scale(libm::ldexp(1.0, -e));
            self.exp2 += k;
        }
        self
    }

    /// Log of the operator norm.
    pub fn log_norm(&self) -> f64 {
        libm::log(self.unit.singular_values().0) + self.log_scale()
    }

    /// `log |self·v|`.
    pub fn log_norm_applied(&self, v: [f64; 2]) -> f64 {
        let w = self.unit.apply(v);
        libm::log(libm::hypot(w[0], w[1])) + self.log_scale()
    }

    /// `log |det|` of the represented matrix.
    pub fn log_abs_det(&self) -> f64 {
        libm::log(self.unit.det().abs()) + 2.0 * self.log_scale()
    }

    /// The represented matrix; overflows once the scale passes ~709.
    pub fn to_matrix(&self) -> Sl2Matrix {
        self.unit.scale(libm::exp(self.log_scale()))
    }
}

impl Mul for LogScaledMatrix {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self {
            unit: self.unit * rhs.unit,
            log_base: self.log_base + rhs.log_base,
            exp2: self.exp2 + rhs.exp2,
        }
        .renormalized()
    }
}

/// `exp(s·M(β))` for a signed exponent `s`.
///
/// Written as `e^{|s|}·[(1 + e^{−2|s|})/2·I ± (1 − e^{−2|s|})/2·M]`; the
/// bracket has operator norm exactly 1.
pub fn signed_propagator(angle: f64, s: f64) -> LogScaledMatrix {
    let a = s.abs();
    let decay = libm::exp(-2.0 * a);
    let even = 0.5 * (1.0 + decay);
    let odd = -0.5 * libm::expm1(-2.0 * a) * if s < 0.0 { -1.0 } else { 1.0 };
    let m = direction_matrix(angle);
    let unit = Sl2Matrix::new(
        even + odd * m.m11,
        odd * m.m12,
        odd * m.m21,
        even + odd * m.m22,
    );
    LogScaledMatrix {
        unit,
        log_base: a,
        exp2: 0,
    }
}

/// `exp(λΔ·M(β))` for `λΔ ≥ 0`.
pub fn segment_propagator(angle: f64, lambda_dt: f64) -> LogScaledMatrix {
    debug_assert!(lambda_dt >= 0.0);
    signed_propagator(angle, lambda_dt)
}

/// Collapses runs of segments whose angles differ by multiples of π into
/// signed durations, dropping runs that cancel.
///
/// `M(β + π) = −M(β)`, so such runs commute and their propagators combine
/// exactly; this makes retraced pieces develop to the identity.
pub fn reduce_path(path: &AngularPath) -> Vec<(f64, f64)> {
    let mut stack: Vec<(f64, f64)> = Vec::with_capacity(path.len());
    for seg in path.segments() {
        let mut incoming = (seg.angle, seg.duration);
        if let Some(&(angle, signed)) = stack.last() {
            if let Some(m) = near_pi_multiple(seg.angle - angle) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let merged = signed + sign * seg.duration;
                stack.pop();
                let tiny = 4.0 * f64::EPSILON * signed.abs().max(seg.duration);
                if merged.abs() <= tiny {
                    continue;
                }
                incoming = (angle, merged);
            }
        }
        stack.push(incoming);
    }
    stack
}

/// `Γ_L^λ = Π exp(λΔᵢ·M(βᵢ))` in path order.
pub fn develop(path: &AngularPath, lambda: f64) -> LogScaledMatrix {
    reduce_path(path)
        .into_iter()
        .fold(LogScaledMatrix::IDENTITY, |acc, (angle, signed)| {
            acc * signed_propagator(angle, lambda * signed)
        })
}

/// Development without the π-run reduction.
pub fn develop_unreduced(path: &AngularPath, lambda: f64) -> LogScaledMatrix {
    path.segments()
        .iter()
        .fold(LogScaledMatrix::IDENTITY, |acc, seg| {
            acc * segment_propagator(seg.angle, lambda * seg.duration)
        })
}

/// Log operator norm.
pub fn operator_norm(m: &LogScaledMatrix) -> f64 {
    m.log_norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DevelopmentPoint {
    pub lambda: f64,
    pub log_norm: f64,
    pub log_norm_over_lambda: f64,
}

/// `log‖Γ_L^λ‖/λ` over a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevelopmentReport {
    pub length: f64,
    pub curve: Vec<DevelopmentPoint>,
    pub max: f64,
    pub argmax_lambda: f64,
    /// Slope of the bound against `log λ` over the last three points.
    pub tail_slope: Option<f64>,
    /// Fitted slope of `log(L − bound)` against `log λ`; near −1 when the
    /// gap closes like `1/λ`.
    pub gap_slope: Option<f64>,
    /// Every point is at most `L + 1e−9`.
    pub certified: bool,
}

pub(crate) fn tail_slope(lambdas: &[f64], values: &[f64]) -> Option<f64> {
    let n = lambdas.len();
    if n < 2 {
        return None;
    }
    let from = n.saturating_sub(3);
    let xs: Vec<f64> = lambdas[from..].iter().map(|l| libm::log(*l)).collect();
    fitted_slope(&xs, &values[from..])
}

pub(crate) fn gap_slope(length: f64, lambdas: &[f64], values: &[f64]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(values)
        .filter(|(_, v)| length - **v > 1e-12 * length)
        .map(|(l, v)| (libm::log(*l), libm::log(length - v)))
        .unzip();
    fitted_slope(&xs, &ys)
}

/// Evaluates `log‖Γ_L^λ‖/λ` for every λ in the schedule.
///
/// Each value is a lower bound for the normalized signature limit because
/// `v ↦ M(v)` has operator norm one.
pub fn development_length_bound(path: &AngularPath, lambdas: &LambdaSchedule) -> DevelopmentReport {
    let curve: Vec<DevelopmentPoint> = lambdas
        .values()
        .iter()
        .map(|&lambda| {
            let log_norm = develop(path, lambda).log_norm();
            DevelopmentPoint {
                lambda,
                log_norm,
                log_norm_over_lambda: log_norm / lambda,
            }
        })
        .collect();
    summarize(path.length(), curve)
}

pub(crate) fn summarize(length: f64, curve: Vec<DevelopmentPoint>) -> DevelopmentReport {
    let (argmax_lambda, max) = curve.iter().fold((f64::NAN, f64::NEG_INFINITY), |best, p| {
        if p.log_norm_over_lambda > best.1 {
            (p.lambda, p.log_norm_over_lambda)
        } else {
            best
        }
    });
    let lambdas: Vec<f64> = curve.iter().map(|p| p.lambda).collect();
    let values: Vec<f64> = curve.iter().map(|p| p.log_norm_over_lambda).collect();
    DevelopmentReport {
        length,
        max,
        argmax_lambda,
        tail_slope: tail_slope(&lambdas, &values),
        gap_slope: gap_slope(length, &lambdas, &values),
        certified: values.iter().all(|v| *v <= length + 1e-9),
        curve,
    }
}
