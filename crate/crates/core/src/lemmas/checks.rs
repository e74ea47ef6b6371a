// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

use alloc::{format, vec::Vec};

use super::{LemmaHypothesis, LemmaId, LemmaParams, LemmaVerdict, VerdictStatus};
use crate::{
    dynamics::AngleTrajectory,
    intervals::IntervalSet,
    math::PI,
    path::AngularPath,
};

/// Uniform samples added to the breakpoint checks.
const DENSE_SAMPLES: usize = 1000;

/// Tolerance of the comparison check.
const COMPARISON_TOLERANCE: f64 = 1e-10;

/// Dispatches on the lemma id.
pub fn verify(h: &LemmaHypothesis) -> LemmaVerdict {
    match h.lemma() {
        LemmaId::RangePhi => verify_range_invariance(h),
        LemmaId::DeviPhi => verify_deviation_bound(h),
        LemmaId::CatTim => verify_capture_time(h),
        LemmaId::EntryTime => verify_entry_time_localized(h),
        LemmaId::BadSet => verify_bad_set_measure(h),
        LemmaId::Comparison => verify_comparison(h),
        LemmaId::C1Convergence | LemmaId::SmallAngleEntry => verify_c1_convergence(h),
    }
}

fn wrong_params(h: &LemmaHypothesis, want: LemmaId) -> LemmaVerdict {
    LemmaVerdict::skip(want, format!("parameters are for {}", h.lemma()))
}

fn angles_within(path: &AngularPath, lo: f64, hi: f64) -> bool {
    path.segments().iter().all(|s| lo <= s.angle && s.angle <= hi)
}

/// Angles of segments meeting `set` in positive measure lie in `[lo, hi]`.
fn angles_within_on(path: &AngularPath, set: &IntervalSet, lo: f64, hi: f64) -> bool {
    path.angle_range_on(set)
        .map_or(true, |(min, max)| lo <= min && max <= hi)
}

/// Times checked besides the breakpoints.
fn dense_times(length: f64) -> impl Iterator<Item = f64> {
    (0..=DENSE_SAMPLES).map(move |k| length * k as f64 / DENSE_SAMPLES as f64)
}

/// `min_t min(2φ_t − lo, hi − 2φ_t)` over segment ends and dense samples.
///
/// A segment start is read from the end of the previous segment: the same
/// point, but held relative to the angle 2φ was approaching, where the
/// offset keeps its precision.
fn min_clearance(traj: &AngleTrajectory, lo: f64, hi: f64) -> f64 {
    let mut worst = f64::INFINITY;
    for i in 0..traj.segments.len() {
        let (l0, l1) = traj.segment_gaps(i, lo);
        let (u0, u1) = traj.segment_gaps(i, hi);
        if i == 0 {
            worst = worst.min(-l0).min(u0);
        }
        worst = worst.min(-l1).min(u1);
    }
    for t in dense_times(traj.length) {
        let i = traj.segment_index_at(t);
        if i > 0 && traj.segments[i].start == t {
            continue;
        }
        worst = worst.min(-traj.gap_to(t, lo)).min(traj.gap_to(t, hi));
    }
    worst
}

/// `2φ ∈ (a, a + π)` for all time when α stays in `[a, a + π]`.
pub fn verify_range_invariance(h: &LemmaHypothesis) -> LemmaVerdict {
    let id = LemmaId::RangePhi;
    let LemmaParams::RangePhi { a } = h.params else {
        return wrong_params(h, id);
    };
    let b = a + PI;
    if !angles_within(&h.path, a, b) {
        return LemmaVerdict::skip(id, "α leaves [a, a + π]");
    }
    let two_phi0 = 2.0 * h.phi0;
    if !(a < two_phi0 && two_phi0 < b) {
        return LemmaVerdict::skip(id, "2φ₀ not in (a, a + π)");
    }
    let traj = h.trajectory();
    let (g_lo, _) = traj.segment_gaps(0, a);
    let (g_hi, _) = traj.segment_gaps(0, b);
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return LemmaVerdict::skip(id, "2φ₀ rounds onto the boundary");
    }
    let clearance = min_clearance(&traj, a, b);
    let pass = clearance > 0.0;
    LemmaVerdict {
        lemma: id,
        status: if pass {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Fail
        },
        predicted_bound: 0.0,
        observed: -clearance,
        margin: clearance,
        vacuous: false,
        trace_ref: None,
        detail: None,
    }
}

/// `2φ ∈ [a − r, b + r]` with `r = 2λ·μ{α ∉ [a, b]}`.
pub fn verify_deviation_bound(h: &LemmaHypothesis) -> LemmaVerdict {
    let id = LemmaId::DeviPhi;
    let LemmaParams::DeviPhi { a, b } = h.params else {
        return wrong_params(h, id);
    };
    if !(0.0 < b - a && b - a < PI) {
        return LemmaVerdict::skip(id, "need 0 < b − a < π");
    }
    let r = 2.0 * h.lambda * h.path.measure_where(|x| !(a <= x && x <= b));
    if !(b - a + r < PI) {
        return LemmaVerdict::skip(id, "need b − a + r < π");
    }
    let two_phi0 = 2.0 * h.phi0;
    if !(a <= two_phi0 && two_phi0 <= b) {
        return LemmaVerdict::skip(id, "2φ₀ not in [a, b]");
    }
    let traj = h.trajectory();
    let excursion = -min_clearance(&traj, a - r, b + r);
    LemmaVerdict::upper(id, 0.0, excursion).with_detail(format!("r = {r}"))
}

/// `(b − a)/(2λ sin ε) + (1 + sin ε)/sin ε · μ(Bᶜ)`.
pub fn capture_time_bound(a: f64, b: f64, epsilon: f64, lambda: f64, bad_measure: f64) -> f64 {
    let s = libm::sin(epsilon);
    (b - a) / (2.0 * lambda * s) + (1.0 + s) / s * bad_measure
}

/// The first entry time into `[c − ε, d + ε]` obeys [`capture_time_bound`].
pub fn verify_capture_time(h: &LemmaHypothesis) -> LemmaVerdict {
    let id = LemmaId::CatTim;
    let LemmaParams::CatTim { a, b, c, d, epsilon } = h.params else {
        return wrong_params(h, id);
    };
    if !(0.0 < b - a && b - a < PI) {
        return LemmaVerdict::skip(id, "need 0 < b − a < π");
    }
    if !(c <= d && a < c - epsilon && d + epsilon < b) {
        return LemmaVerdict::skip(id, "need [c − ε, d + ε] ⊆ (a, b)");
    }
    if !(epsilon > 0.0 && epsilon < PI - (b - a)) {
        return LemmaVerdict::skip(id, "need 0 < ε < π − (b − a)");
    }
    if !angles_within(&h.path, a, b) {
        return LemmaVerdict::skip(id, "α leaves [a, b]");
    }
    let two_phi0 = 2.0 * h.phi0;
    if !(a < two_phi0 && two_phi0 < b) {
        return LemmaVerdict::skip(id, "2φ₀ not in (a, b)");
    }
    let bad = h.path.measure_where(|x| !(c <= x && x <= d));
    let predicted = capture_time_bound(a, b, epsilon, h.lambda, bad);
    let (lo, hi) = (c - epsilon, d + epsilon);
    if lo <= two_phi0 && two_phi0 <= hi {
        return LemmaVerdict::upper(id, predicted, 0.0).with_detail("starts inside the band");
    }
    let traj = h.trajectory();
    let length = traj.length;
    match traj.first_entry(lo, hi, 0.0, length) {
        Some(tau) => LemmaVerdict::upper(id, predicted, tau),
        None => {
            let mut v = LemmaVerdict::upper(id, predicted, length).with_detail("never enters");
            v.vacuous = predicted >= length;
            v
        }
    }
}

/// Splits `f1` into about `n` cells: each component gets a share of `n`
/// proportional to its length (largest remainder, at least one) and is
/// cut into equal pieces.
pub fn entry_cells(f1: &IntervalSet, n: usize) -> Vec<(f64, f64)> {
    let comps: Vec<(f64, f64)> = f1.parts().iter().copied().filter(|(lo, hi)| hi > lo).collect();
    let total: f64 = comps.iter().map(|(lo, hi)| hi - lo).sum();
    if comps.is_empty() {
        return Vec::new();
    }
    let shares: Vec<f64> = comps
        .iter()
        .map(|(lo, hi)| n as f64 * (hi - lo) / total)
        .collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| libm::floor(*s) as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by(|&i, &j| {
        let fi = shares[i] - libm::floor(shares[i]);
        let fj = shares[j] - libm::floor(shares[j]);
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    let mut cells = Vec::new();
    for (&(lo, hi), &k) in comps.iter().zip(&counts) {
        let k = k.max(1);
        let w = (hi - lo) / k as f64;
        for j in 0..k {
            let a = lo + w * j as f64;
            let b = if j + 1 == k { hi } else { lo + w * (j + 1) as f64 };
            cells.push((a, b));
        }
    }
    cells
}

/// `⌊ε sin ε · λ⌋ + 1`.
fn cell_count(epsilon: f64, lambda: f64) -> usize {
    let c = epsilon * libm::sin(epsilon);
    let n = libm::floor(c * lambda);
    if n >= 1e7 {
        10_000_000
    } else {
        n as usize + 1
    }
}

/// Per-cell angle range on `f2`, restricted to the cell.
struct CellScan<'a> {
    path: &'a AngularPath,
    starts: Vec<f64>,
    f2: &'a IntervalSet,
}

impl<'a> CellScan<'a> {
    fn new(path: &'a AngularPath, f2: &'a IntervalSet) -> Self {
        Self {
            path,
            starts: path.start_times(),
            f2,
        }
    }

    fn range(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let segs = self.path.segments();
        let mut i = self.starts.partition_point(|&s| s <= lo).saturating_sub(1);
        let mut out: Option<(f64, f64)> = None;
        while i < segs.len() && self.starts[i] < hi {
            let a = self.starts[i].max(lo);
            let b = (self.starts[i] + segs[i].duration).min(hi);
            if b > a && self.f2.overlap(a, b) > 0.0 {
                let x = segs[i].angle;
                out = Some(out.map_or((x, x), |(m, n)| (m.min(x), n.max(x))));
            }
            i += 1;
        }
        out
    }
}

/// Shared filter of the localized estimates.
#[allow(clippy::too_many_arguments)]
fn localized_filter(
    h: &LemmaHypothesis,
    a: f64,
    a_delta: f64,
    b_delta: f64,
    epsilon: f64,
    eta: f64,
    f1: &IntervalSet,
    f2: &IntervalSet,
) -> Result<(), &'static str> {
    let b = a + PI;
    let length = h.path.length();
    if !(a < a_delta && a_delta <= b_delta && b_delta < b) {
        return Err("need a < a_δ ≤ b_δ < a + π");
    }
    let cap = (a_delta - a).min(b - b_delta).min(PI / 3.0);
    if !(epsilon > 0.0 && epsilon < cap) {
        return Err("need 0 < ε < min(a_δ − a, b − b_δ, π/3)");
    }
    if !angles_within(&h.path, a, b) {
        return Err("α leaves [a, a + π]");
    }
    if !(f1.is_subset_of(&IntervalSet::interval(0.0, length).expect("finite")) && f2.is_subset_of(f1)) {
        return Err("need F₂ ⊆ F₁ ⊆ [0, L]");
    }
    if !angles_within_on(&h.path, f2, a_delta, b_delta) {
        return Err("α leaves [a_δ, b_δ] on F₂");
    }
    if !(f1.measure_minus(f2) <= eta) {
        return Err("need μ(F₁ \\ F₂) ≤ η");
    }
    let two_phi0 = 2.0 * h.phi0;
    if !(a < two_phi0 && two_phi0 < b) {
        return Err("2φ₀ not in (a, a + π)");
    }
    Ok(())
}

/// Per-cell entry times into `[α_i − ε, β_i + ε]` against
/// `π/(2λ sin ε) + (1 + sin ε)/sin ε · μ((F₁ \ F₂) ∩ I_i)`, and their sum
/// against `π n/(2λ sin ε) + (1 + sin ε) η/sin ε`.
pub fn verify_entry_time_localized(h: &LemmaHypothesis) -> LemmaVerdict {
    let id = LemmaId::EntryTime;
    let LemmaParams::EntryTime {
        a,
        a_delta,
        b_delta,
        epsilon,
        eta,
        ref f1,
        ref f2,
    } = h.params
    else {
        return wrong_params(h, id);
    };
    if let Err(reason) = localized_filter(h, a, a_delta, b_delta, epsilon, eta, f1, f2) {
        return LemmaVerdict::skip(id, reason);
    }
    let traj = h.trajectory();
    let s = libm::sin(epsilon);
    let lead = PI / (2.0 * h.lambda * s);
    let cells = entry_cells(f1, cell_count(epsilon, h.lambda));
    let scan = CellScan::new(&h.path, f2);

    let mut worst: Option<LemmaVerdict> = None;
    let mut total = 0.0;
    let mut checked = 0usize;
    for &(lo, hi) in &cells {
        let Some((alpha_i, beta_i)) = scan.range(lo, hi) else {
            continue;
        };
        checked += 1;
        let bad = (hi - lo) - f2.overlap(lo, hi);
        let bound = lead + (1.0 + s) / s * bad;
        let sigma = traj
            .first_entry(alpha_i - epsilon, beta_i + epsilon, lo, hi)
            .map_or(hi - lo, |tau| tau - lo);
        total += sigma;
        let v = LemmaVerdict::upper(id, bound, sigma);
        let replace = match &worst {
            None => true,
            Some(w) => (v.is_fail() && !w.is_fail()) || (v.is_fail() == w.is_fail() && v.margin < w.margin),
        };
        if replace {
            worst = Some(v);
        }
    }
    let Some(cell_verdict) = worst else {
        return LemmaVerdict::skip(id, "no cell meets F₂");
    };
    let aggregate_bound = lead * cells.len() as f64 + (1.0 + s) / s * eta;
    let aggregate = LemmaVerdict::upper(id, aggregate_bound, total);
    let detail = format!(
        "{checked} of {} cells; sum of entry times {total} against {aggregate_bound}",
        cells.len()
    );
    if aggregate.is_fail() && !cell_verdict.is_fail() {
        aggregate.with_detail(detail)
    } else {
        cell_verdict.with_detail(detail)
    }
}

/// Largest ρ such that `s, t ∈ F₂`, `|t − s| < ρ` imply `|α_t − α_s| < ε`;
/// infinite when no pair of F₂ times differs by ε.
pub fn continuity_radius(path: &AngularPath, f2: &IntervalSet, epsilon: f64) -> f64 {
    let starts = path.start_times();
    let pieces: Vec<(f64, f64, f64)> = path
        .segments()
        .iter()
        .zip(&starts)
        .filter_map(|(seg, &t)| {
            let part = f2.clip(t, t + seg.duration);
            let parts = part.parts();
            let first = parts.iter().find(|(lo, hi)| hi > lo)?;
            let last = parts.iter().rev().find(|(lo, hi)| hi > lo)?;
            Some((seg.angle, first.0, last.1))
        })
        .collect();
    let mut rho = f64::INFINITY;
    for (i, &(x, _, end_i)) in pieces.iter().enumerate() {
        for &(y, start_j, _) in &pieces[i + 1..] {
            if (x - y).abs() >= epsilon {
                rho = rho.min((start_j - end_i).max(0.0));
            }
        }
    }
    rho
}

/// Measure of `{t ∈ F₂ ∩ [s, L] : |2φ − α| > 2ε + 2Mη/(ε sin ε)}` against
/// `πε/2 + (1 + sin ε) η/sin ε + L/M`.
pub fn verify_bad_set_measure(h: &LemmaHypothesis) -> LemmaVerdict {
    let id = LemmaId::BadSet;
    let LemmaParams::BadSet {
        a,
        a_delta,
        b_delta,
        epsilon,
        eta,
        delta,
        m,
        big_lambda,
        s: restart,
        ref f1,
        ref f2,
    } = h.params
    else {
        return wrong_params(h, id);
    };
    if let Err(reason) = localized_filter(h, a, a_delta, b_delta, epsilon, eta, f1, f2) {
        return LemmaVerdict::skip(id, reason);
    }
    let length = h.path.length();
    let sin_e = libm::sin(epsilon);
    if !(m > 0.0) {
        return LemmaVerdict::skip(id, "need M > 0");
    }
    if !(f1.complement_in(0.0, length).measure() < delta) {
        return LemmaVerdict::skip(id, "need μ(F₁ᶜ) < δ");
    }
    let spread = 2.0 * m * eta / (epsilon * sin_e);
    if !(3.0 * epsilon + spread < PI) {
        return LemmaVerdict::skip(id, "need 3ε + 2Mη/(ε sin ε) < π");
    }
    if !(0.0 <= restart && restart < length) {
        return LemmaVerdict::skip(id, "need s ∈ [0, L)");
    }
    let threshold_lambda = big_lambda.unwrap_or_else(|| {
        let rho = continuity_radius(&h.path, f2, epsilon);
        10.0 * h.path.angle_sup_norm() / (rho * sin_e)
    });
    if !(h.lambda > threshold_lambda) {
        return LemmaVerdict::skip(id, format!("λ = {} not above Λ = {threshold_lambda}", h.lambda));
    }
    let traj = h.trajectory();
    if !(traj.gap_to(restart, a) < 0.0 && traj.gap_to(restart, a + PI) > 0.0) {
        return LemmaVerdict::skip(id, "2φ_s not in (a, a + π)");
    }
    let f1_tail = f1.clip(restart, length);
    let scan = CellScan::new(&h.path, f2);
    for (lo, hi) in entry_cells(&f1_tail, cell_count(epsilon, h.lambda)) {
        if let Some((x, y)) = scan.range(lo, hi) {
            if !(y - x < epsilon) {
                return LemmaVerdict::skip(id, "cell oscillation of α on F₂ reaches ε at this λ");
            }
        }
    }
    let threshold = 2.0 * epsilon + spread;
    let observed = traj
        .excess_set(threshold)
        .intersect(f2)
        .clip(restart, length)
        .measure();
    let predicted = PI * epsilon / 2.0 + (1.0 + sin_e) / sin_e * eta + length / m;
    LemmaVerdict::upper(id, predicted, observed)
        .with_detail(format!("threshold {threshold}, Λ = {threshold_lambda}"))
}

/// `φ_t ≤ ψ_t` on `[L/2, L]`, with ψ the tree-like solution. The two
/// paths agree on `[0, L/2]` and the tree-like one retraces it, so
/// `ψ_t = φ_{L−t}`. For `c = 1` the two solutions coincide; direct
/// propagation through the exact reversal would only measure rounding in
/// the cusp jump.
pub fn verify_comparison(h: &LemmaHypothesis) -> LemmaVerdict {
    let id = LemmaId::Comparison;
    let LemmaParams::Comparison {
        ref spec,
        resolution,
        samples,
    } = h.params
    else {
        return wrong_params(h, id);
    };
    if spec.validate().is_err() {
        return LemmaVerdict::skip(id, "invalid singular cusp");
    }
    if h.path.len() != 2 * resolution || (h.path.length() - spec.length).abs() > 1e-9 * spec.length {
        return LemmaVerdict::skip(id, "path does not match the cusp spec");
    }
    let traj = h.trajectory();
    let length = spec.length;
    let half = length / 2.0;
    let samples = samples.max(1);
    if spec.c == 1.0 {
        let mut v = LemmaVerdict::upper(id, 0.0, 0.0);
        v.detail = Some("tree-like: φ and ψ solve the same equation".into());
        return v;
    }
    let mut worst = f64::NEG_INFINITY;
    for k in 0..=samples {
        let t = half + half * k as f64 / samples as f64;
        worst = worst.max(traj.phi_at(t) - traj.phi_at(length - t));
    }
    let pass = worst <= COMPARISON_TOLERANCE;
    LemmaVerdict {
        lemma: id,
        status: if pass {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Fail
        },
        predicted_bound: 0.0,
        observed: worst,
        margin: -worst,
        vacuous: false,
        trace_ref: None,
        detail: None,
    }
}

/// `Λ₁ = ‖α‖∞/(h sin ε)` with `h = ε/Lip`.
pub(crate) fn c1_threshold(path: &AngularPath, epsilon: f64, lipschitz: f64) -> f64 {
    let h = epsilon / lipschitz;
    path.angle_sup_norm() / (h * libm::sin(epsilon))
}

/// Longest initial stretch `[0, δ)` on which `|α_t − α_0| < width`.
fn initial_stretch(path: &AngularPath, width: f64) -> f64 {
    let a0 = path.segments()[0].angle;
    let mut t = 0.0;
    for seg in path.segments() {
        if (seg.angle - a0).abs() >= width {
            return t;
        }
        t += seg.duration;
    }
    t
}

/// Uniform convergence of `2φ` to α. With an aligned start the deviation
/// is checked on all of `[0, L]` at `λ > Λ₁`; with a start κ off, the
/// entry into the ε-tube before `t₀` and the deviation on `[t₀, L]` are
/// checked at `λ > max(Λ₁, Λ₂)`, `Λ₂ = (2‖α‖∞ + κ)/(2δ sin ε)`. The
/// predicted bound is `2ε + Lip·grid`, the second term covering the
/// staircase.
pub fn verify_c1_convergence(h: &LemmaHypothesis) -> LemmaVerdict {
    let (id, epsilon, lipschitz, grid, start) = match h.params {
        LemmaParams::C1Convergence {
            epsilon,
            lipschitz,
            grid,
        } => (LemmaId::C1Convergence, epsilon, lipschitz, grid, None),
        LemmaParams::SmallAngleEntry {
            epsilon,
            lipschitz,
            grid,
            kappa,
            t0,
        } => (LemmaId::SmallAngleEntry, epsilon, lipschitz, grid, Some((kappa, t0))),
        _ => return wrong_params(h, LemmaId::C1Convergence),
    };
    if !(epsilon > 0.0 && epsilon < PI / 4.0) {
        return LemmaVerdict::skip(id, "need ε ∈ (0, π/4)");
    }
    if !(lipschitz > 0.0 && grid > 0.0) {
        return LemmaVerdict::skip(id, "need positive Lipschitz constant and grid");
    }
    if h.path.segments().iter().any(|s| s.duration > grid * (1.0 + 1e-12)) {
        return LemmaVerdict::skip(id, "a step is longer than the grid");
    }
    let length = h.path.length();
    let alpha0 = h.path.segments()[0].angle;
    let start_offset = (2.0 * h.phi0 - alpha0).abs();
    let lambda1 = c1_threshold(&h.path, epsilon, lipschitz);
    let predicted = 2.0 * epsilon + lipschitz * grid;
    match start {
        None => {
            if start_offset > 1e-12 * alpha0.abs().max(1.0) {
                return LemmaVerdict::skip(id, "start is not aligned");
            }
            if !(h.lambda > lambda1) {
                return LemmaVerdict::skip(id, format!("λ not above Λ₁ = {lambda1}"));
            }
            let traj = h.trajectory();
            LemmaVerdict::upper(id, predicted, traj.max_deviation(0.0, length))
        }
        Some((kappa, t0)) => {
            if !(kappa > 0.0 && kappa < PI) {
                return LemmaVerdict::skip(id, "need κ ∈ (0, π)");
            }
            if !(t0 > 0.0 && t0 < length) {
                return LemmaVerdict::skip(id, "need t₀ ∈ (0, L)");
            }
            if !(start_offset <= kappa) {
                return LemmaVerdict::skip(id, "|2φ₀ − α₀| exceeds κ");
            }
            let kappa_mid = 0.5 * (kappa + PI);
            let delta = initial_stretch(&h.path, kappa_mid - kappa).min(0.999 * t0);
            if !(delta > 0.0) {
                return LemmaVerdict::skip(id, "α moves by κ′ − κ immediately");
            }
            let lambda2 = (2.0 * h.path.angle_sup_norm() + kappa) / (2.0 * delta * libm::sin(epsilon));
            let big = lambda1.max(lambda2);
            if !(h.lambda > big) {
                return LemmaVerdict::skip(id, format!("λ not above Λ = {big}"));
            }
            let traj = h.trajectory();
            let tube = traj.excess_set(epsilon).complement_in(0.0, length);
            let entry = tube.parts().first().map(|p| p.0);
            match entry {
                Some(s) if s <= t0 => {
                    let observed = traj.max_deviation(t0, length);
                    LemmaVerdict::upper(id, predicted, observed)
                        .with_detail(format!("enters the ε-tube at {s}"))
                }
                _ => {
                    let mut v = LemmaVerdict::upper(id, t0, entry.unwrap_or(length));
                    v.status = VerdictStatus::Fail;
                    v.with_detail("no entry into the ε-tube before t₀")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{make_singular_cusp, Segment, SingularCuspSpec};
    use alloc::vec;

    fn hyp(params: LemmaParams, pairs: &[(f64, f64)], lambda: f64, phi0: f64) -> LemmaHypothesis {
        LemmaHypothesis::new(params, AngularPath::from_pairs(pairs).unwrap(), lambda, phi0).unwrap()
    }

    fn status(v: &LemmaVerdict) -> VerdictStatus {
        v.status
    }

    #[test]
    fn range_fixed_point_stays() {
        let a = 0.25;
        let mid = a + PI / 2.0;
        let v = verify_range_invariance(&hyp(LemmaParams::RangePhi { a }, &[(2.0, mid)], 10.0, mid / 2.0));
        assert_eq!(status(&v), VerdictStatus::Pass);
        assert!((v.margin - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn range_boundary_start_is_skipped() {
        let a = 0.25;
        let v = verify_range_invariance(&hyp(
            LemmaParams::RangePhi { a },
            &[(1.0, a + 1.0)],
            10.0,
            (a + PI) / 2.0,
        ));
        assert_eq!(status(&v), VerdictStatus::Skip);
    }

    #[test]
    fn range_holds_against_boundary_driving_angles() {
        let a = -0.5;
        let b = a + PI;
        // α sits on either boundary; 2φ is pushed toward it but never reaches
        let h = hyp(
            LemmaParams::RangePhi { a },
            &[(3.0, a), (0.5, b), (4.0, a), (2.0, b)],
            100.0,
            (a + 1.0) / 2.0,
        );
        let v = verify_range_invariance(&h);
        assert_eq!(status(&v), VerdictStatus::Pass, "{v:?}");
        assert!(v.margin > 0.0);
    }

    #[test]
    fn range_detects_an_escape() {
        // α outside the hypothesis range would drag 2φ out; the filter skips it
        let a = 0.0;
        let h = hyp(LemmaParams::RangePhi { a }, &[(1.0, -0.5)], 10.0, 0.5);
        assert_eq!(status(&verify_range_invariance(&h)), VerdictStatus::Skip);
    }

    #[test]
    fn deviation_without_bad_time_stays_in_band() {
        let h = hyp(
            LemmaParams::DeviPhi { a: 0.0, b: 1.0 },
            &[(1.0, 0.2), (1.0, 0.9), (1.0, 0.0)],
            10.0,
            0.5,
        );
        let v = verify_deviation_bound(&h);
        assert_eq!(status(&v), VerdictStatus::Pass);
        assert!(v.observed <= 0.0);
    }

    #[test]
    fn deviation_with_one_burst() {
        // a = 0, b = 1, λ = 10, burst of 0.02 at α = 2.5: r = 0.4
        let h = hyp(
            LemmaParams::DeviPhi { a: 0.0, b: 1.0 },
            &[(0.5, 0.9), (0.02, 2.5), (0.5, 0.5)],
            10.0,
            0.45,
        );
        let v = verify_deviation_bound(&h);
        assert_eq!(status(&v), VerdictStatus::Pass, "{v:?}");
        assert_eq!(v.detail.as_deref(), Some("r = 0.4"));
        let traj = h.trajectory();
        let top = (0..=200)
            .map(|k| traj.two_phi_at(1.02 * k as f64 / 200.0))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(top > 1.0 && top <= 1.4, "{top}");
    }

    #[test]
    fn capture_bound_formula() {
        // 2/(20 sin 0.5) + (1 + sin 0.5)/sin 0.5 · 0.1
        let s = libm::sin(0.5);
        let want = 2.0 / (20.0 * s) + (1.0 + s) / s * 0.1;
        assert!((capture_time_bound(0.0, 2.0, 0.5, 10.0, 0.1) - want).abs() < 1e-15);
        assert!((want - 0.517166).abs() < 1e-5);
    }

    #[test]
    fn capture_example_with_touching_band_is_skipped() {
        // c − ε = a, so [c − ε, d + ε] is not inside the open (a, b)
        let h = hyp(
            LemmaParams::CatTim {
                a: 0.0,
                b: 2.0,
                c: 0.5,
                d: 1.5,
                epsilon: 0.5,
            },
            &[(0.9, 1.0), (0.1, 1.8)],
            10.0,
            0.95,
        );
        assert_eq!(status(&verify_capture_time(&h)), VerdictStatus::Skip);
    }

    #[test]
    fn capture_example_with_narrower_margin() {
        let params = LemmaParams::CatTim {
            a: 0.0,
            b: 2.0,
            c: 0.5,
            d: 1.5,
            epsilon: 0.4,
        };
        let h = hyp(params, &[(0.05, 1.8), (0.9, 1.0), (0.05, 1.8)], 10.0, 0.97);
        let v = verify_capture_time(&h);
        assert_eq!(status(&v), VerdictStatus::Pass, "{v:?}");
        let s = libm::sin(0.4);
        assert!((v.predicted_bound - (2.0 / (20.0 * s) + (1.0 + s) / s * 0.1)).abs() < 1e-12);
        assert!(v.observed > 0.0);
    }

    #[test]
    fn capture_single_segment_matches_closed_form() {
        // α ≡ 1 inside [c, d]; start at b − ε/2 and fall to d + ε
        let (a, b, c, d, e) = (0.0, 2.0, 0.8, 1.2, 0.3);
        let lambda = 10.0;
        let two_phi0 = b - e / 2.0;
        let h = hyp(
            LemmaParams::CatTim {
                a,
                b,
                c,
                d,
                epsilon: e,
            },
            &[(5.0, 1.0)],
            lambda,
            two_phi0 / 2.0,
        );
        let v = verify_capture_time(&h);
        assert_eq!(status(&v), VerdictStatus::Pass);
        let psi0: f64 = two_phi0 - 1.0;
        let psi1: f64 = d + e - 1.0;
        let exact = (libm::log(libm::tan(psi0 / 2.0)) - libm::log(libm::tan(psi1 / 2.0))) / (2.0 * lambda);
        assert!((v.observed - exact).abs() < 1e-12, "{} vs {exact}", v.observed);
        assert!(v.observed < (b - a) / (2.0 * lambda * libm::sin(e)));
    }

    #[test]
    fn capture_from_inside_band_is_immediate() {
        let h = hyp(
            LemmaParams::CatTim {
                a: 0.0,
                b: 2.0,
                c: 0.8,
                d: 1.2,
                epsilon: 0.3,
            },
            &[(1.0, 1.0)],
            10.0,
            0.5,
        );
        let v = verify_capture_time(&h);
        assert_eq!(v.observed, 0.0);
        assert_eq!(status(&v), VerdictStatus::Pass);
    }

    #[test]
    fn capture_never_entering_is_flagged_vacuous() {
        // α outside [c, d] throughout but inside [a, b]; the bound exceeds L
        let h = hyp(
            LemmaParams::CatTim {
                a: 0.0,
                b: 2.0,
                c: 0.8,
                d: 1.0,
                epsilon: 0.1,
            },
            &[(0.3, 1.9)],
            1.0,
            0.95,
        );
        let v = verify_capture_time(&h);
        assert!(v.vacuous, "{v:?}");
        assert_eq!(status(&v), VerdictStatus::Pass);
    }

    #[test]
    fn cells_split_components_by_length() {
        let f1 = IntervalSet::new([(0.0, 1.0), (2.0, 5.0)]).unwrap();
        let cells = entry_cells(&f1, 4);
        assert_eq!(cells, vec![(0.0, 1.0), (2.0, 3.0), (3.0, 4.0), (4.0, 5.0)]);
        // each component gets a cell even when n is smaller
        assert_eq!(entry_cells(&f1, 1).len(), 2);
    }

    fn entry_params(f1: IntervalSet, f2: IntervalSet, eta: f64) -> LemmaParams {
        LemmaParams::EntryTime {
            a: 0.0,
            a_delta: 0.5,
            b_delta: PI - 0.5,
            epsilon: 0.3,
            eta,
            f1,
            f2,
        }
    }

    #[test]
    fn entry_time_on_smooth_staircase() {
        let steps: Vec<(f64, f64)> = (0..60).map(|k| (0.05, 0.6 + 0.03 * k as f64)).collect();
        let length = AngularPath::from_pairs(&steps).unwrap().length();
        let full = IntervalSet::interval(0.0, length).unwrap();
        for lambda in [5.0, 50.0, 500.0] {
            let h = hyp(entry_params(full.clone(), full.clone(), 0.0), &steps, lambda, 1.4);
            let v = verify_entry_time_localized(&h);
            assert_eq!(status(&v), VerdictStatus::Pass, "{v:?}");
        }
    }

    #[test]
    fn entry_time_single_cell_bound() {
        // λ small enough for a single cell; no bad measure
        let full = IntervalSet::interval(0.0, 2.0).unwrap();
        let h = hyp(entry_params(full.clone(), full, 0.0), &[(2.0, 1.0)], 3.0, 1.4);
        let v = verify_entry_time_localized(&h);
        assert_eq!(status(&v), VerdictStatus::Pass);
        let want = PI / (2.0 * 3.0 * libm::sin(0.3));
        assert!((v.predicted_bound - want).abs() < 1e-12);
        assert!(v.observed > 0.0 && v.observed < want);
    }

    #[test]
    fn entry_time_start_inside_band_is_zero() {
        let full = IntervalSet::interval(0.0, 2.0).unwrap();
        let h = hyp(entry_params(full.clone(), full, 0.0), &[(2.0, 1.0)], 3.0, 0.5);
        let v = verify_entry_time_localized(&h);
        assert_eq!(v.observed, 0.0);
    }

    #[test]
    fn entry_time_rejects_window_violation() {
        let full = IntervalSet::interval(0.0, 2.0).unwrap();
        let h = hyp(entry_params(full.clone(), full, 0.0), &[(2.0, 0.2)], 3.0, 0.5);
        assert_eq!(status(&verify_entry_time_localized(&h)), VerdictStatus::Skip);
    }

    #[test]
    fn continuity_radius_of_a_staircase() {
        let p = AngularPath::from_pairs(&[(1.0, 0.0), (1.0, 0.1), (1.0, 0.3)]).unwrap();
        let all = IntervalSet::interval(0.0, 3.0).unwrap();
        assert_eq!(continuity_radius(&p, &all, 0.5), f64::INFINITY);
        assert_eq!(continuity_radius(&p, &all, 0.25), 1.0);
        assert_eq!(continuity_radius(&p, &all, 0.1), 0.0);
        let holed = IntervalSet::new([(0.0, 0.8), (1.5, 3.0)]).unwrap();
        assert!((continuity_radius(&p, &holed, 0.25) - 1.2).abs() < 1e-12);
    }

    fn staircase(from: f64, to: f64, steps: usize, length: f64) -> Vec<(f64, f64)> {
        (0..steps)
            .map(|k| {
                let x = from + (to - from) * (k as f64 + 0.5) / steps as f64;
                (length / steps as f64, x)
            })
            .collect()
    }

    fn total(steps: &[(f64, f64)]) -> f64 {
        steps.iter().fold(0.0, |t, s| t + s.0)
    }

    fn bad_set_params(f1: IntervalSet, f2: IntervalSet, eta: f64) -> LemmaParams {
        LemmaParams::BadSet {
            a: 0.0,
            a_delta: 0.4,
            b_delta: PI - 0.4,
            epsilon: 0.2,
            eta,
            delta: 1e-2,
            m: 50.0,
            big_lambda: None,
            s: 0.0,
            f1,
            f2,
        }
    }

    #[test]
    fn bad_set_on_smooth_staircase() {
        let steps = staircase(0.6, 2.4, 200, 4.0);
        let full = IntervalSet::interval(0.0, total(&steps)).unwrap();
        let h = hyp(bad_set_params(full.clone(), full, 1e-3), &steps, 1e4, 0.3);
        let v = verify_bad_set_measure(&h);
        assert_eq!(status(&v), VerdictStatus::Pass, "{v:?}");
        assert!(v.margin > 0.0);
    }

    #[test]
    fn bad_set_trivial_path_is_empty() {
        let full = IntervalSet::interval(0.0, 1.0).unwrap();
        let h = hyp(bad_set_params(full.clone(), full, 0.0), &[(1.0, 1.0)], 1e3, 0.5);
        let v = verify_bad_set_measure(&h);
        assert_eq!(status(&v), VerdictStatus::Pass);
        assert_eq!(v.observed, 0.0);
    }

    #[test]
    fn bad_set_with_burst_at_the_eta_budget() {
        // F₁ \ F₂ is a single burst of measure exactly η at the far end of the range
        let eta = 1e-3;
        let mut steps = staircase(1.0, 1.5, 50, 1.0);
        steps.push((eta, 0.01));
        steps.extend(staircase(1.5, 2.0, 50, 1.0));
        let burst_start = total(&steps[..50]);
        let f1 = IntervalSet::interval(0.0, total(&steps)).unwrap();
        let f2 = IntervalSet::new([(0.0, burst_start), (burst_start + eta, total(&steps))]).unwrap();
        let h = hyp(bad_set_params(f1, f2, eta), &steps, 1e4, 0.5);
        let v = verify_bad_set_measure(&h);
        assert_eq!(status(&v), VerdictStatus::Pass, "{v:?}");
    }

    #[test]
    fn bad_set_skips_below_threshold_lambda() {
        let steps = staircase(0.6, 2.4, 200, 4.0);
        let full = IntervalSet::interval(0.0, total(&steps)).unwrap();
        let h = hyp(bad_set_params(full.clone(), full, 1e-3), &steps, 1.0, 0.3);
        assert_eq!(status(&verify_bad_set_measure(&h)), VerdictStatus::Skip);
    }

    fn comparison(c: f64, lambda: f64, resolution: usize) -> LemmaHypothesis {
        let spec = SingularCuspSpec::linear(2.0, 0.2, 0.3, c).unwrap();
        let path = make_singular_cusp(&spec, resolution).unwrap();
        let phi0 = path.segments()[0].angle / 2.0;
        LemmaHypothesis::new(
            LemmaParams::Comparison {
                spec,
                resolution,
                samples: 2000,
            },
            path,
            lambda,
            phi0,
        )
        .unwrap()
    }

    #[test]
    fn comparison_tree_like_is_identical() {
        let v = verify_comparison(&comparison(1.0, 10.0, 500));
        assert_eq!(status(&v), VerdictStatus::Pass, "{v:?}");
        assert_eq!(v.observed, 0.0);
    }

    #[test]
    fn comparison_half_speed_retrace() {
        for lambda in [1.0, 10.0, 100.0] {
            let v = verify_comparison(&comparison(0.5, lambda, 2000));
            assert_eq!(status(&v), VerdictStatus::Pass, "λ = {lambda}: {v:?}");
        }
    }

    #[test]
    fn c1_constant_angle_has_zero_deviation() {
        let h = hyp(
            LemmaParams::C1Convergence {
                epsilon: 0.1,
                lipschitz: 1.0,
                grid: 1.0,
            },
            &[(1.0, 0.7), (1.0, 0.7)],
            200.0,
            0.35,
        );
        let v = verify_c1_convergence(&h);
        assert_eq!(status(&v), VerdictStatus::Pass);
        assert_eq!(v.observed, 0.0);
    }

    fn sine_staircase(steps: usize) -> AngularPath {
        let h = 3.0 / steps as f64;
        AngularPath::new(
            (0..steps)
                .map(|k| Segment::new(h, libm::sin((k as f64 + 0.5) * h)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn c1_sine_at_twice_the_threshold() {
        let path = sine_staircase(3000);
        let lambda = 2.0 * c1_threshold(&path, 0.1, 1.0);
        let phi0 = path.segments()[0].angle / 2.0;
        let h = LemmaHypothesis::new(
            LemmaParams::C1Convergence {
                epsilon: 0.1,
                lipschitz: 1.0,
                grid: 1e-3,
            },
            path,
            lambda,
            phi0,
        )
        .unwrap();
        let v = verify_c1_convergence(&h);
        assert_eq!(status(&v), VerdictStatus::Pass, "{v:?}");
        assert!(v.observed < 0.05);
    }

    #[test]
    fn small_angle_far_start_enters_before_t0() {
        let path = sine_staircase(3000);
        let kappa = PI - 0.01;
        let alpha0 = path.segments()[0].angle;
        let params = LemmaParams::SmallAngleEntry {
            epsilon: 0.1,
            lipschitz: 1.0,
            grid: 1e-3,
            kappa,
            t0: 0.5,
        };
        let probe = LemmaHypothesis::new(params.clone(), path.clone(), 1.0, (alpha0 + kappa) / 2.0).unwrap();
        // step λ up until the threshold filter accepts it
        let mut lambda = 1.0;
        let mut v = verify_c1_convergence(&probe);
        while v.status == VerdictStatus::Skip && lambda < 1e9 {
            lambda *= 2.0;
            let h = LemmaHypothesis { lambda, ..probe.clone() };
            v = verify_c1_convergence(&h);
        }
        assert_eq!(status(&v), VerdictStatus::Pass, "{v:?}");
        let h = LemmaHypothesis { lambda, ..probe };
        let traj = h.trajectory();
        assert!(traj.max_deviation(0.5, 3.0) <= 0.2 + 1e-3);
    }

    #[test]
    fn small_angle_rejects_kappa_at_pi() {
        let path = sine_staircase(100);
        let h = LemmaHypothesis::new(
            LemmaParams::SmallAngleEntry {
                epsilon: 0.1,
                lipschitz: 1.0,
                grid: 0.03,
                kappa: PI,
                t0: 0.5,
            },
            path,
            1e4,
            0.0,
        )
        .unwrap();
        assert_eq!(status(&verify_c1_convergence(&h)), VerdictStatus::Skip);
    }
}
