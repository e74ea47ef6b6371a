// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form angle dynamics of the developed vector.
//!
//! Writing the developed vector as `ρ(cos φ, sin φ)` splits the linear
//! system `dv/dt = λ·M(α_t)·v` into
//!
//! ```text
//! dφ/dt = λ sin(α − 2φ),      d log ρ/dt = λ cos(α − 2φ).
//! ```
//!
//! On a constant-α segment, `ψ = 2φ − α` obeys `dψ/dt = −2λ sin ψ`, solved
//! by `tan(ψ/2) = tan(ψ₀/2)·e^{−2λt}`. The state is therefore kept as a sign
//! and `l = log|tan(ψ/2)|`, which the flow shifts by `−2λt` exactly. The
//! unstable point `ψ = π` is `l = +∞` and the stable point `ψ = 0` is
//! `l = −∞`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{
    intervals::IntervalSet,
    math::{pi_multiple_tolerance, FRAC_PI_2, PI, TAU},
    path::AngularPath,
    schedule::LambdaSchedule,
    Error, Result,
};

/// `ψ ∈ (−π, π]` encoded as `sign·2·atan(e^{log_tan})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfAngleState {
    pub sign: f64,
    pub log_tan: f64,
}

/// `log tan(x/2)` for `x ∈ [0, π]`, accurate near both ends.
fn log_tan_half(x: f64) -> f64 {
    if x <= FRAC_PI_2 {
        libm::log(libm::tan(0.5 * x))
    } else {
        -libm::log(libm::tan(0.5 * (PI - x)))
    }
}

impl HalfAngleState {
    pub const ZERO: Self = Self {
        sign: 1.0,
        log_tan: f64::NEG_INFINITY,
    };

    pub const UNSTABLE: Self = Self {
        sign: 1.0,
        log_tan: f64::INFINITY,
    };

    /// Folds any real angle into `(−π, π]` first.
    pub fn from_psi(psi: f64) -> Self {
        let folded = psi - TAU * libm::round(psi / TAU);
        let folded = if folded <= -PI { folded + TAU } else { folded };
        if folded.abs() <= FRAC_PI_2 {
            Self::from_chart(0, folded)
        } else if folded > 0.0 {
            Self::from_chart(1, folded - PI)
        } else {
            Self::from_chart(-1, folded + PI)
        }
    }

    /// `ψ = p·π + off`, with `off ≤ 0` for `p = 1` and `off > 0` for
    /// `p = −1`.
    fn from_chart(p: i64, off: f64) -> Self {
        match p {
            0 => Self {
                sign: if off < 0.0 { -1.0 } else { 1.0 },
                log_tan: libm::log(libm::tan(0.5 * off.abs())),
            },
            _ => Self {
                sign: p as f64,
                log_tan: -libm::log(libm::tan(0.5 * off.abs())),
            },
        }
    }

    /// Inverse of [`HalfAngleState::from_chart`]; the offset keeps full
    /// relative precision near either fixed point.
    fn chart(&self) -> (i64, f64) {
        if self.log_tan <= 0.0 {
            (0, self.sign * 2.0 * libm::atan(libm::exp(self.log_tan)))
        } else {
            let off = 2.0 * libm::atan(libm::exp(-self.log_tan));
            if self.sign > 0.0 {
                (1, -off)
            } else {
                (-1, off)
            }
        }
    }

    pub fn psi(&self) -> f64 {
        if self.log_tan <= 0.0 {
            self.sign * 2.0 * libm::atan(libm::exp(self.log_tan))
        } else {
            self.sign * (PI - 2.0 * libm::atan(libm::exp(-self.log_tan)))
        }
    }

    /// `|ψ|` measured from π; exact near the unstable point.
    pub fn distance_to_pi(&self) -> f64 {
        if self.log_tan <= 0.0 {
            PI - 2.0 * libm::atan(libm::exp(self.log_tan))
        } else {
            2.0 * libm::atan(libm::exp(-self.log_tan))
        }
    }

    pub fn is_fixed_point(&self) -> bool {
        self.log_tan.is_infinite()
    }

    /// State after flowing for time `dt` at rate λ.
    pub fn flowed(&self, lambda: f64, dt: f64) -> Self {
        Self {
            sign: self.sign,
            log_tan: self.log_tan - 2.0 * lambda * dt,
        }
    }

    /// Re-bases ψ after the driving angle moves by `delta`.
    ///
    /// Returns the new state and the integer `m` with
    /// `ψ_new = ψ − delta − 2πm`. When the state sits exactly on a fixed
    /// point and the result lands within rounding of π, it is set to π
    /// exactly.
    pub fn jump(&self, delta: f64) -> (Self, i64) {
        let (p, off) = self.chart();
        let y = p as f64 * PI - delta + off;
        let mut m = libm::round(y / TAU) as i64;
        let z = y - m as f64 * TAU;
        let mut q: i64 = if z.abs() <= FRAC_PI_2 {
            0
        } else if z > 0.0 {
            1
        } else {
            -1
        };
        let j = p - q - 2 * m;
        let mut off_new = off + (j as f64 * PI - delta);
        if q != 0 && self.is_fixed_point() && off_new.abs() <= pi_multiple_tolerance(delta) {
            if q == -1 {
                m -= 1;
            }
            q = 1;
            off_new = 0.0;
        }
        // an exact multiple of π leaves the offset untouched; its sign
        // then comes from the state even if the offset underflowed
        let exact = j as f64 * PI - delta == 0.0 && !self.is_fixed_point();
        let positive = if exact {
            match p {
                0 => self.sign > 0.0,
                1 => false,
                _ => true,
            }
        } else {
            off_new > 0.0
        };
        if q == 1 && positive {
            q = -1;
            m += 1;
        } else if q == -1 && !positive {
            q = 1;
            m -= 1;
        }
        if exact {
            // l maps to ±l, which keeps offsets far below the subnormal range
            let log_tan = if (p == 0) != (q == 0) {
                -self.log_tan
            } else {
                self.log_tan
            };
            let sign = match (q, p) {
                (0, 0) => self.sign,
                (0, 1) => -1.0,
                (0, _) => 1.0,
                _ => q as f64,
            };
            return (Self { sign, log_tan }, m);
        }
        (Self::from_chart(q, off_new), m)
    }
}

/// Advances `ψ₀` by `dt` under `dψ/dt = −2λ sin ψ`.
pub fn sine_flow_step(psi0: f64, lambda: f64, dt: f64) -> f64 {
    HalfAngleState::from_psi(psi0).flowed(lambda, dt).psi()
}

/// `∫₀^dt cos ψ` along one segment starting from `log_tan = l0`.
fn segment_integral(l0: f64, lambda: f64, dt: f64) -> f64 {
    if l0 == f64::INFINITY {
        return -dt;
    }
    if l0 == f64::NEG_INFINITY || dt == 0.0 {
        return dt;
    }
    let g = 2.0 * lambda * dt;
    let x0 = 2.0 * l0;
    let x1 = x0 - 2.0 * g;
    // log(1 + T²) at the end minus at the start
    let d = if x1 > 0.0 {
        -2.0 * g + libm::log1p(libm::exp(-x1)) - libm::log1p(libm::exp(-x0))
    } else if x0 <= 0.0 {
        libm::log1p(libm::exp(x1)) - libm::log1p(libm::exp(x0))
    } else {
        libm::log1p(libm::exp(x1)) - x0 - libm::log1p(libm::exp(-x0))
    };
    dt + d / (2.0 * lambda)
}

/// One constant-α piece of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub start: f64,
    pub duration: f64,
    pub alpha: f64,
    /// `2φ = α + 2π·wrap + ψ` on this segment.
    pub wrap: i64,
    /// ψ at the segment start.
    pub state: HalfAngleState,
}

impl TrajectorySegment {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    fn base(&self) -> f64 {
        self.alpha + TAU * self.wrap as f64
    }
}

/// `level − 2φ` for state `st` on `seg`. When the level sits exactly on
/// the chart center, an offset too small to survive still decides the
/// sign, returned as `±MIN_POSITIVE`.
fn gap_from(seg: &TrajectorySegment, st: HalfAngleState, level: f64) -> f64 {
    let (p, off) = st.chart();
    let center = (level - seg.alpha) - TAU * seg.wrap as f64 - p as f64 * PI;
    if center != 0.0 || st.is_fixed_point() || off != 0.0 {
        return center - off;
    }
    let off_negative = match p {
        0 => st.sign < 0.0,
        1 => true,
        _ => false,
    };
    if off_negative {
        f64::MIN_POSITIVE
    } else {
        -f64::MIN_POSITIVE
    }
}

/// A breakpoint: segment start time, φ there, and the driving angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub time: f64,
    pub phi: f64,
    pub alpha: f64,
}

/// One row of a trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub alpha: f64,
    pub two_phi: f64,
    pub psi: f64,
    pub cumulative_integral: f64,
}

/// Exact solution of the angle dynamics for a piecewise-constant α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleTrajectory {
    pub lambda: f64,
    pub initial_half_angle: f64,
    pub segments: Vec<TrajectorySegment>,
    /// `I = ∫₀ᴸ cos(α_t − 2φ_t) dt`.
    pub radial_log_integral: f64,
    pub length: f64,
}

/// Solves the angle dynamics forward from `φ₀`; `path` holds α.
pub fn propagate(path: &AngularPath, lambda: f64, phi0: f64) -> AngleTrajectory {
    let segs = path.segments();
    let two_phi0 = 2.0 * phi0;
    let (mut state, mut wrap) = HalfAngleState::ZERO.jump(segs[0].angle - two_phi0);
    let mut out = Vec::with_capacity(segs.len());
    let mut t = 0.0;
    for (i, seg) in segs.iter().enumerate() {
        if i > 0 {
            let (next, m) = state.jump(seg.angle - segs[i - 1].angle);
            state = next;
            wrap += m;
        }
        out.push(TrajectorySegment {
            start: t,
            duration: seg.duration,
            alpha: seg.angle,
            wrap,
            state,
        });
        state = state.flowed(lambda, seg.duration);
        t += seg.duration;
    }
    AngleTrajectory::assemble(lambda, phi0, out, path.length())
}

/// Solves the angle dynamics with `2φ` prescribed at time `anchor`,
/// integrating backward on `[0, anchor]` and forward after it.
pub fn propagate_anchored(
    path: &AngularPath,
    lambda: f64,
    anchor: f64,
    two_phi_at_anchor: f64,
) -> AngleTrajectory {
    let segs = path.segments();
    let starts = path.start_times();
    let i0 = path.segment_index_at(anchor);
    let (anchor_state, anchor_wrap) = HalfAngleState::ZERO.jump(segs[i0].angle - two_phi_at_anchor);
    let back = (anchor - starts[i0]).max(0.0);

    let mut out: Vec<TrajectorySegment> = Vec::with_capacity(segs.len());
    let mut state = anchor_state.flowed(lambda, -back);
    let mut wrap = anchor_wrap;
    let mut backward = Vec::with_capacity(i0 + 1);
    backward.push(TrajectorySegment {
        start: starts[i0],
        duration: segs[i0].duration,
        alpha: segs[i0].angle,
        wrap,
        state,
    });
    for i in (0..i0).rev() {
        let (prev_end, m) = state.jump(segs[i].angle - segs[i + 1].angle);
        wrap += m;
        state = prev_end.flowed(lambda, -segs[i].duration);
        backward.push(TrajectorySegment {
            start: starts[i],
            duration: segs[i].duration,
            alpha: segs[i].angle,
            wrap,
            state,
        });
    }
    backward.reverse();
    out.extend(backward);

    let mut state = out[i0].state.flowed(lambda, segs[i0].duration);
    let mut wrap = out[i0].wrap;
    for i in i0 + 1..segs.len() {
        let (next, m) = state.jump(segs[i].angle - segs[i - 1].angle);
        wrap += m;
        out.push(TrajectorySegment {
            start: starts[i],
            duration: segs[i].duration,
            alpha: segs[i].angle,
            wrap,
            state: next,
        });
        state = next.flowed(lambda, segs[i].duration);
    }
    let first = out[0];
    let phi0 = 0.5 * (first.base() + first.state.psi());
    AngleTrajectory::assemble(lambda, phi0, out, path.length())
}

impl AngleTrajectory {
    fn assemble(lambda: f64, phi0: f64, segments: Vec<TrajectorySegment>, length: f64) -> Self {
        let radial_log_integral = segments
            .iter()
            .map(|s| segment_integral(s.state.log_tan, lambda, s.duration))
            .sum();
        Self {
            lambda,
            initial_half_angle: phi0,
            segments,
            radial_log_integral,
            length,
        }
    }

    /// `λ·I`, the log of the developed vector's length.
    pub fn radial_value(&self) -> f64 {
        self.lambda * self.radial_log_integral
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = Breakpoint> + '_ {
        self.segments.iter().map(|s| Breakpoint {
            time: s.start,
            phi: 0.5 * (s.base() + s.state.psi()),
            alpha: s.alpha,
        })
    }

    /// Index of the segment containing `t`.
    pub fn segment_index_at(&self, t: f64) -> usize {
        let i = self.segments.partition_point(|s| s.start <= t);
        i.saturating_sub(1)
    }

    fn local(&self, t: f64) -> (&TrajectorySegment, HalfAngleState) {
        let seg = &self.segments[self.segment_index_at(t)];
        let tau = (t - seg.start).clamp(0.0, seg.duration);
        (seg, seg.state.flowed(self.lambda, tau))
    }

    pub fn state_at(&self, t: f64) -> HalfAngleState {
        self.local(t).1
    }

    pub fn psi_at(&self, t: f64) -> f64 {
        self.local(t).1.psi()
    }

    pub fn alpha_at(&self, t: f64) -> f64 {
        self.local(t).0.alpha
    }

    pub fn two_phi_at(&self, t: f64) -> f64 {
        let (seg, st) = self.local(t);
        seg.base() + st.psi()
    }

    pub fn phi_at(&self, t: f64) -> f64 {
        0.5 * self.two_phi_at(t)
    }

    /// φ at the end of the path.
    pub fn final_phi(&self) -> f64 {
        let seg = self.segments.last().expect("nonempty");
        0.5 * (seg.base() + seg.state.flowed(self.lambda, seg.duration).psi())
    }

    /// `level − 2φ_t`, evaluated so that a boundary level sitting at an
    /// exact multiple of π from the base gets an exactly signed result.
    pub fn gap_to(&self, t: f64, level: f64) -> f64 {
        let (seg, st) = self.local(t);
        gap_from(seg, st, level)
    }

    /// `level − 2φ` at the start of segment `i` and just before its end.
    pub fn segment_gaps(&self, i: usize, level: f64) -> (f64, f64) {
        let seg = &self.segments[i];
        let end = seg.state.flowed(self.lambda, seg.duration);
        (gap_from(seg, seg.state, level), gap_from(seg, end, level))
    }

    /// `∫_{t0}^{t1} cos(α − 2φ)`.
    pub fn integral_between(&self, t0: f64, t1: f64) -> f64 {
        let mut total = 0.0;
        for seg in &self.segments {
            let a = seg.start.max(t0);
            let b = seg.end().min(t1);
            if b <= a {
                continue;
            }
            let st = seg.state.flowed(self.lambda, a - seg.start);
            total += segment_integral(st.log_tan, self.lambda, b - a);
        }
        total
    }

    /// Local times within `seg` (relative to `seg.start`), restricted to
    /// `[tau0, tau1]`, where ψ lies in `[lo, hi]`.
    fn psi_preimage(
        &self,
        seg: &TrajectorySegment,
        lo: f64,
        hi: f64,
        tau0: f64,
        tau1: f64,
    ) -> Option<(f64, f64)> {
        let s0 = seg.state.flowed(self.lambda, tau0);
        if s0.log_tan == f64::NEG_INFINITY {
            return (lo <= 0.0 && 0.0 <= hi).then_some((tau0, tau1));
        }
        // Mirror negative ψ so that |ψ| decreases toward 0 from above.
        let (lo, hi) = if s0.sign < 0.0 { (-hi, -lo) } else { (lo, hi) };
        let psi_a = s0.psi().abs();
        let s1 = seg.state.flowed(self.lambda, tau1);
        let psi_b = s1.psi().abs();
        let time_at = |x: f64| tau0 + (s0.log_tan - log_tan_half(x)) / (2.0 * self.lambda);
        if hi < psi_b || lo > psi_a {
            return None;
        }
        let enter = if psi_a <= hi { tau0 } else { time_at(hi) };
        let leave = if psi_b >= lo || lo <= 0.0 {
            tau1
        } else {
            time_at(lo)
        };
        let enter = enter.clamp(tau0, tau1);
        let leave = leave.clamp(tau0, tau1);
        (enter <= leave).then_some((enter, leave))
    }

    /// First time in `[from, until]` with `2φ ∈ [lo, hi]`, located by
    /// inverting the closed-form flow.
    pub fn first_entry(&self, lo: f64, hi: f64, from: f64, until: f64) -> Option<f64> {
        let first = self.segment_index_at(from);
        for seg in &self.segments[first..] {
            if seg.start > until {
                break;
            }
            let tau0 = (from - seg.start).max(0.0);
            let tau1 = (until.min(seg.end()) - seg.start).max(tau0);
            let t_here = seg.start + tau0;
            if self.gap_to(t_here, hi) >= 0.0 && self.gap_to(t_here, lo) <= 0.0 {
                return Some(t_here);
            }
            let base = seg.base();
            if let Some((enter, _)) = self.psi_preimage(seg, lo - base, hi - base, tau0, tau1) {
                return Some(seg.start + enter);
            }
        }
        None
    }

    /// `{t : |2φ_t − α_t| > threshold}` as an exact interval union.
    pub fn excess_set(&self, threshold: f64) -> IntervalSet {
        let mut parts = Vec::new();
        for seg in &self.segments {
            let shift = TAU * seg.wrap as f64;
            // inside the tube iff ψ ∈ [−threshold − shift, threshold − shift]
            let inside = self.psi_preimage(seg, -threshold - shift, threshold - shift, 0.0, seg.duration);
            match inside {
                None => parts.push((seg.start, seg.end())),
                Some((a, b)) => {
                    if a > 0.0 {
                        parts.push((seg.start, seg.start + a));
                    }
                    if b < seg.duration {
                        parts.push((seg.start + b, seg.end()));
                    }
                }
            }
        }
        IntervalSet::new(parts).expect("ordered segment times")
    }

    /// `sup_{t ∈ [from, until]} |2φ_t − α_t|`, attained at segment starts
    /// because |ψ| only shrinks inside a segment.
    pub fn max_deviation(&self, from: f64, until: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for seg in &self.segments {
            if seg.end() < from || seg.start > until {
                continue;
            }
            let tau = (from - seg.start).max(0.0);
            let psi = seg.state.flowed(self.lambda, tau).psi();
            let dev = (psi + TAU * seg.wrap as f64).abs();
            worst = worst.max(dev);
            // with a nonzero wrap the largest value can sit at the end
            if seg.wrap != 0 {
                let tau_end = (until - seg.start).min(seg.duration);
                let psi_end = seg.state.flowed(self.lambda, tau_end).psi();
                worst = worst.max((psi_end + TAU * seg.wrap as f64).abs());
            }
        }
        worst
    }

    /// Uniformly spaced trace rows, breakpoints excluded.
    pub fn sample(&self, count: usize) -> Vec<TracePoint> {
        let count = count.max(2);
        let mut out = Vec::with_capacity(count);
        let mut seg_idx = 0;
        let mut seg_acc_start = 0.0;
        for j in 0..count {
            let t = self.length * j as f64 / (count - 1) as f64;
            while seg_idx + 1 < self.segments.len() && self.segments[seg_idx + 1].start <= t {
                let seg = &self.segments[seg_idx];
                seg_acc_start += segment_integral(seg.state.log_tan, self.lambda, seg.duration);
                seg_idx += 1;
            }
            let seg = &self.segments[seg_idx];
            let tau = (t - seg.start).clamp(0.0, seg.duration);
            let st = seg.state.flowed(self.lambda, tau);
            out.push(TracePoint {
                t,
                alpha: seg.alpha,
                two_phi: seg.base() + st.psi(),
                psi: st.psi(),
                cumulative_integral: seg_acc_start
                    + segment_integral(seg.state.log_tan, self.lambda, tau),
            });
        }
        out
    }
}

/// How to choose the initial half-angle φ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Phi0Policy {
    /// `2φ₀ = α₀`.
    Aligned,
    /// A given φ₀.
    Fixed { phi0: f64 },
    /// Choose φ so that `2φ_κ` lies in `window`: at `α_κ` when that is in
    /// the window, otherwise at the window midpoint.
    EndpointFree { kappa: f64, window: (f64, f64) },
}

impl Phi0Policy {
    /// Parses `aligned`, `fixed:<phi0>`, or `endpoint-free:<kappa>:<lo>:<hi>`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let mut num = |what: &'static str| -> Result<f64> {
            parts
                .next()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::param("phi0", alloc::format!("`{s}`: missing or bad {what}")))
        };
        match name {
            "aligned" => Ok(Self::Aligned),
            "fixed" => Ok(Self::Fixed { phi0: num("value")? }),
            "endpoint-free" => Ok(Self::EndpointFree {
                kappa: num("kappa")?,
                window: (num("window start")?, num("window end")?),
            }),
            _ => Err(Error::param("phi0", alloc::format!("unknown policy `{name}`"))),
        }
    }
}

/// Solves the dynamics on α under a φ₀ policy.
pub fn propagate_with(path: &AngularPath, lambda: f64, policy: Phi0Policy) -> AngleTrajectory {
    match policy {
        Phi0Policy::Aligned => propagate(path, lambda, 0.5 * path.segments()[0].angle),
        Phi0Policy::Fixed { phi0 } => propagate(path, lambda, phi0),
        Phi0Policy::EndpointFree { kappa, window } => {
            let alpha = path.angle_at(kappa);
            let target = if window.0 <= alpha && alpha <= window.1 {
                alpha
            } else {
                0.5 * (window.0 + window.1)
            };
            propagate_anchored(path, lambda, kappa, target)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralPoint {
    pub lambda: f64,
    pub integral: f64,
}

/// `I_λ` over a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub length: f64,
    pub policy: Phi0Policy,
    pub curve: Vec<IntegralPoint>,
    pub max: f64,
    pub argmax_lambda: f64,
    pub certified: bool,
}

/// `I_λ = ∫ cos(α − 2φ^λ)` for every λ; each is a lower bound for the
/// normalized signature limit.
pub fn integral_lower_bound(
    path: &AngularPath,
    lambdas: &LambdaSchedule,
    policy: Phi0Policy,
) -> IntegralReport {
    let curve: Vec<IntegralPoint> = lambdas
        .values()
        .iter()
        .map(|&lambda| IntegralPoint {
            lambda,
            integral: propagate_with(path, lambda, policy).radial_log_integral,
        })
        .collect();
    let (argmax_lambda, max) = curve.iter().fold((f64::NAN, f64::NEG_INFINITY), |b, p| {
        if p.integral > b.1 {
            (p.lambda, p.integral)
        } else {
            b
        }
    });
    IntegralReport {
        length: path.length(),
        policy,
        certified: curve.iter().all(|p| p.integral <= path.length() + 1e-9),
        curve,
        max,
        argmax_lambda,
    }
}
