// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Length recovery: signature-side corroboration plus certified
//! development-side lower bounds, and the window cover used to chain
//! regular-cusp pieces together.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{
    dynamics::{propagate_with, Phi0Policy},
    math::PI,
    path::{make_singular_cusp, AngularPath, RegularCuspHypothesis, SingularCuspSpec},
    schedule::LambdaSchedule,
    signature::level_norms,
    sl2::{develop, gap_slope},
    Error, Result,
};

/// Grid used for the rank-one signature proxy.
pub const RANK_ONE_GRID: usize = 720;

const SOUNDNESS_SLACK: f64 = 1e-9;
const CONSISTENCY_TOLERANCE: f64 = 1e-8;

/// A relatively open window of `[0, L]` carrying a regular-cusp witness.
///
/// `start ≤ 0` means the window contains 0, `end ≥ L` that it contains L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverWindow {
    pub start: f64,
    pub end: f64,
    pub hypothesis: RegularCuspHypothesis,
}

impl CoverWindow {
    fn contains(&self, t: f64, length: f64) -> bool {
        let left = if self.start <= 0.0 { t >= 0.0 } else { t > self.start };
        let right = if self.end >= length { t <= length } else { t < self.end };
        left && right
    }
}

/// A chain `0 = v₀ < v₁ < … < v_k = L` with handoff points
/// `u₀ = 0, uᵢ ∈ (v_{i−1}, vᵢ)`; piece `i` is `[u_{i−1}, vᵢ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub v_points: Vec<f64>,
    /// `u₀, …, u_{k−1}`.
    pub u_points: Vec<f64>,
    /// The chosen windows as `(start, end)`, one per piece.
    pub windows: Vec<(f64, f64)>,
    pub window_hypotheses: Vec<RegularCuspHypothesis>,
}

impl Cover {
    pub fn pieces(&self) -> usize {
        self.window_hypotheses.len()
    }

    /// `[u_{i−1}, vᵢ]` for `i = 1..=k`.
    pub fn piece(&self, i: usize) -> (f64, f64) {
        (self.u_points[i - 1], self.v_points[i])
    }
}

/// Greedy chaining: from the current point, take the unused window that
/// covers it and reaches furthest right.
pub fn build_cover(length: f64, windows: &[CoverWindow]) -> Result<Cover> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::param("length", "must be positive"));
    }
    let mut used = alloc::vec![false; windows.len()];
    let mut chosen: Vec<usize> = Vec::new();
    let mut v_points = alloc::vec![0.0];
    let mut point = 0.0;
    while point < length {
        let pick = windows
            .iter()
            .enumerate()
            .filter(|(j, w)| !used[*j] && w.contains(point, length))
            .max_by(|x, y| x.1.end.total_cmp(&y.1.end))
            .map(|(j, _)| j)
            .ok_or(Error::Uncovered { point })?;
        used[pick] = true;
        chosen.push(pick);
        point = windows[pick].end.min(length);
        v_points.push(point);
    }

    let mut u_points = alloc::vec![0.0];
    for i in 1..chosen.len() {
        let lo = windows[chosen[i]].start.max(v_points[i - 1]);
        u_points.push(0.5 * (lo + v_points[i]));
    }
    Ok(Cover {
        v_points,
        u_points,
        windows: chosen.iter().map(|&j| (windows[j].start, windows[j].end)).collect(),
        window_hypotheses: chosen.iter().map(|&j| windows[j].hypothesis.clone()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignatureRow {
    pub n: usize,
    pub normalized_hs: f64,
    pub normalized_rank_one: f64,
    pub max_abs_coefficient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DevelopmentRow {
    pub lambda: f64,
    pub log_norm_over_lambda: f64,
    pub integral: f64,
    /// `λ·I` agrees with `log|Γξ|` for the trajectory's own ξ; the
    /// integral only enters the headline when it does.
    pub integral_consistent: bool,
}

impl DevelopmentRow {
    fn compute(beta: &AngularPath, alpha: &AngularPath, lambda: f64, policy: Phi0Policy) -> Self {
        let g = develop(beta, lambda);
        let traj = propagate_with(alpha, lambda, policy);
        let phi0 = traj.initial_half_angle;
        let applied = g.log_norm_applied([libm::cos(phi0), libm::sin(phi0)]);
        let radial = traj.radial_value();
        Self {
            lambda,
            log_norm_over_lambda: g.log_norm() / lambda,
            integral: traj.radial_log_integral,
            integral_consistent: (radial - applied).abs()
                <= CONSISTENCY_TOLERANCE * applied.abs().max(1.0),
        }
    }

    /// The certified bound at this λ.
    pub fn best(&self) -> f64 {
        if self.integral_consistent {
            self.log_norm_over_lambda.max(self.integral)
        } else {
            self.log_norm_over_lambda
        }
    }
}

/// Push-in check and proof-structured bound at one `t₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspProbe {
    pub offset: f64,
    pub t2: f64,
    pub lambda: f64,
    pub two_phi: f64,
    pub push_in: bool,
    /// `I_{[0,L/2]} − (t₂ − L/2) + I_{[t₂,L]}`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub true_length: f64,
    pub signature_estimates: Vec<SignatureRow>,
    pub development_estimates: Vec<DevelopmentRow>,
    pub headline_lower: f64,
    pub headline_upper: f64,
    pub endpoint_margin: f64,
    /// Fitted slope of `log(L − bound)` against `log λ` for the best
    /// per-λ bound.
    pub gap_slope: Option<f64>,
    pub cusp_probes: Vec<CuspProbe>,
    /// Every reported lower bound is at most `L + 1e−9`.
    pub certified: bool,
}

impl EstimateReport {
    fn assemble(
        length: f64,
        signature_estimates: Vec<SignatureRow>,
        development_estimates: Vec<DevelopmentRow>,
        endpoint_margin: f64,
        cusp_probes: Vec<CuspProbe>,
    ) -> Self {
        let best: Vec<f64> = development_estimates.iter().map(DevelopmentRow::best).collect();
        let lambdas: Vec<f64> = development_estimates.iter().map(|r| r.lambda).collect();
        let mut headline_lower = best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if endpoint_margin > 0.0 {
            headline_lower -= 4.0 * endpoint_margin;
        }
        let ceiling = length + SOUNDNESS_SLACK;
        let certified = development_estimates
            .iter()
            .all(|r| r.log_norm_over_lambda <= ceiling && r.integral <= ceiling)
            && cusp_probes.iter().all(|p| p.bound <= ceiling)
            && signature_estimates
                .iter()
                .all(|r| r.normalized_hs <= length * (1.0 + SOUNDNESS_SLACK));
        Self {
            true_length: length,
            gap_slope: gap_slope(length, &lambdas, &best),
            signature_estimates,
            development_estimates,
            headline_lower,
            headline_upper: length,
            endpoint_margin,
            cusp_probes,
            certified,
        }
    }
}

/// Runs the full pipeline on β.
///
/// With `kappa > 0`, φ is anchored at `2φ_κ = α_κ` and the headline drops
/// by `4κ`.
pub fn estimate_length(
    path: &AngularPath,
    depth: usize,
    lambdas: &LambdaSchedule,
    kappa: f64,
) -> Result<EstimateReport> {
    let length = path.length();
    if depth < 4 {
        return Err(Error::param("depth", "must be at least 4"));
    }
    if !(kappa >= 0.0 && kappa < length / 4.0) {
        return Err(Error::param("kappa", "must lie in [0, L/4)"));
    }
    let signature_estimates = level_norms(path, depth, RANK_ONE_GRID)
        .iter()
        .map(|l| SignatureRow {
            n: l.n,
            normalized_hs: l.normalized_hs(),
            normalized_rank_one: l.normalized_rank_one(),
            max_abs_coefficient: l.max_abs_coefficient(),
        })
        .collect();

    let alpha = path.reverse_time();
    let policy = if kappa > 0.0 {
        let a = alpha.angle_at(kappa);
        Phi0Policy::EndpointFree {
            kappa,
            window: (a, a),
        }
    } else {
        Phi0Policy::Aligned
    };
    let development_estimates = lambdas
        .values()
        .iter()
        .map(|&lambda| DevelopmentRow::compute(path, &alpha, lambda, policy))
        .collect();
    Ok(EstimateReport::assemble(
        length,
        signature_estimates,
        development_estimates,
        kappa,
        Vec::new(),
    ))
}

/// Development-side estimates for a singular cusp, with the push-in claim
/// `2φ_{t₂} ∈ [a − π − c·r, a − π]` checked at the largest λ for every
/// `t₂ = L/2 + offset`.
pub fn estimate_singular_cusp(
    spec: &SingularCuspSpec,
    resolution: usize,
    lambdas: &LambdaSchedule,
    t2_offsets: &[f64],
) -> Result<EstimateReport> {
    spec.validate()?;
    if spec.c >= 1.0 {
        return Err(Error::param("c", "must lie in (0, 1); c = 1 is tree-like"));
    }
    let length = spec.length;
    let half = 0.5 * length;
    if let Some(bad) = t2_offsets.iter().find(|o| !(**o > 0.0 && **o < half)) {
        return Err(Error::param(
            "t2_offsets",
            alloc::format!("{bad} is outside (0, L/2)"),
        ));
    }
    let alpha = make_singular_cusp(spec, resolution)?;
    let beta = alpha.reverse_time();
    let development_estimates = lambdas
        .values()
        .iter()
        .map(|&lambda| DevelopmentRow::compute(&beta, &alpha, lambda, Phi0Policy::Aligned))
        .collect();

    let lambda = lambdas.max();
    let traj = propagate_with(&alpha, lambda, Phi0Policy::Aligned);
    let first_half = traj.integral_between(0.0, half);
    let top = spec.a - PI;
    let bottom = top - spec.c * spec.r;
    let cusp_probes = t2_offsets
        .iter()
        .map(|&offset| {
            let t2 = half + offset;
            let two_phi = traj.two_phi_at(t2);
            CuspProbe {
                offset,
                t2,
                lambda,
                two_phi,
                push_in: bottom <= two_phi && two_phi <= top,
                bound: first_half - offset + traj.integral_between(t2, length),
            }
        })
        .collect();
    Ok(EstimateReport::assemble(
        length,
        Vec::new(),
        development_estimates,
        0.0,
        cusp_probes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{intervals::IntervalSet, math::FRAC_PI_2, path::CuspWitness};

    fn hyp() -> RegularCuspHypothesis {
        RegularCuspHypothesis {
            a: -1.0,
            witnesses: alloc::vec![CuspWitness {
                delta: 0.1,
                good_set: IntervalSet::interval(0.0, 1.0).unwrap(),
                a_delta: -0.5,
                b_delta: 1.5,
            }],
        }
    }

    fn window(start: f64, end: f64) -> CoverWindow {
        CoverWindow {
            start,
            end,
            hypothesis: hyp(),
        }
    }

    fn assert_cover_invariants(c: &Cover, length: f64) {
        let k = c.pieces();
        assert_eq!(c.v_points.len(), k + 1);
        assert_eq!(c.u_points.len(), k);
        assert_eq!(c.v_points[0], 0.0);
        assert_eq!(c.v_points[k], length);
        assert_eq!(c.u_points[0], 0.0);
        for i in 1..=k {
            assert!(c.v_points[i - 1] < c.v_points[i]);
            let (lo, hi) = c.piece(i);
            let (ws, we) = c.windows[i - 1];
            assert!(ws <= 0.0 && lo == 0.0 || ws < lo, "piece {i} starts outside its window");
            assert!(hi <= we.min(length));
        }
        for i in 1..k {
            assert!(c.v_points[i - 1] < c.u_points[i] && c.u_points[i] < c.v_points[i]);
        }
    }

    #[test]
    fn single_window_is_trivial() {
        let c = build_cover(1.0, &[window(-0.1, 1.1)]).unwrap();
        assert_eq!(c.pieces(), 1);
        assert_eq!(c.v_points, alloc::vec![0.0, 1.0]);
        assert_eq!(c.u_points, alloc::vec![0.0]);
        assert_cover_invariants(&c, 1.0);
    }

    #[test]
    fn four_window_chain() {
        let ws = [
            window(0.5, 0.8),
            window(0.0, 0.3),
            window(0.7, 1.0),
            window(0.2, 0.55),
            window(0.1, 0.25),
        ];
        let c = build_cover(1.0, &ws).unwrap();
        assert_eq!(c.pieces(), 4);
        assert_eq!(c.v_points, alloc::vec![0.0, 0.3, 0.55, 0.8, 1.0]);
        assert_eq!(c.windows[1], (0.2, 0.55));
        // u₁ is the midpoint of (max(0.2, 0), 0.3)
        assert!((c.u_points[1] - 0.25).abs() < 1e-15);
        assert!((c.u_points[2] - 0.525).abs() < 1e-15);
        assert!((c.u_points[3] - 0.75).abs() < 1e-15);
        assert_cover_invariants(&c, 1.0);
    }

    #[test]
    fn prefers_furthest_reaching_window() {
        let ws = [window(0.0, 0.4), window(0.0, 0.6), window(0.3, 0.9), window(0.7, 1.0)];
        let c = build_cover(1.0, &ws).unwrap();
        assert_eq!(c.windows, alloc::vec![(0.0, 0.6), (0.3, 0.9), (0.7, 1.0)]);
        assert_cover_invariants(&c, 1.0);
    }

    #[test]
    fn gap_names_the_point() {
        let err = build_cover(1.0, &[window(0.0, 0.7), window(0.7, 1.0)]).unwrap_err();
        assert_eq!(err, Error::Uncovered { point: 0.7 });
        assert_eq!(
            build_cover(1.0, &[window(0.1, 1.0)]).unwrap_err(),
            Error::Uncovered { point: 0.0 }
        );
    }

    #[test]
    fn line_is_exact() {
        let line = AngularPath::from_pairs(&[(1.0, 0.0)]).unwrap();
        let sched = LambdaSchedule::geometric(1.0, 2.0, 11).unwrap();
        let r = estimate_length(&line, 20, &sched, 0.0).unwrap();
        assert_eq!(r.headline_lower, 1.0);
        assert_eq!(r.headline_upper, 1.0);
        for row in &r.signature_estimates {
            assert!((row.normalized_hs - 1.0).abs() < 1e-12, "{row:?}");
        }
        for row in &r.development_estimates {
            assert!((row.log_norm_over_lambda - 1.0).abs() < 1e-12);
        }
        assert!(r.certified);
    }

    #[test]
    fn tree_like_gives_zero() {
        let tree = AngularPath::from_pairs(&[(1.0, 0.0), (1.0, PI)]).unwrap();
        let sched = LambdaSchedule::geometric(1.0, 2.0, 11).unwrap();
        let r = estimate_length(&tree, 12, &sched, 0.0).unwrap();
        assert!(r.headline_lower.abs() <= 1e-10, "{}", r.headline_lower);
        for row in &r.signature_estimates {
            assert!(row.max_abs_coefficient <= 1e-12, "{row:?}");
        }
    }

    #[test]
    fn l_shape_reaches_the_closed_form() {
        let l = AngularPath::from_pairs(&[(1.0, 0.0), (1.0, FRAC_PI_2)]).unwrap();
        let sched = LambdaSchedule::geometric(1.0, 2.0, 12).unwrap();
        let r = estimate_length(&l, 16, &sched, 0.0).unwrap();
        let lambda = 2048.0;
        let expected = 2.0 - libm::log(libm::sqrt(2.0)) / lambda;
        assert!(r.headline_lower >= 1.99);
        assert!((r.headline_lower - expected).abs() < 3e-4);
        assert!(r.signature_estimates[15].normalized_rank_one >= 1.8);
        assert!(r.certified);
        let slope = r.gap_slope.unwrap();
        assert!((slope + 1.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn endpoint_margin_is_subtracted() {
        let l = AngularPath::from_pairs(&[(1.0, 0.0), (1.0, FRAC_PI_2)]).unwrap();
        let sched = LambdaSchedule::geometric(1.0, 2.0, 8).unwrap();
        let plain = estimate_length(&l, 4, &sched, 0.0).unwrap();
        let relaxed = estimate_length(&l, 4, &sched, 0.01).unwrap();
        assert!(relaxed.headline_lower <= plain.headline_lower - 0.04 + 1e-12);
        assert!(relaxed.headline_lower > 1.9);
    }

    #[test]
    fn unstable_integrals_are_not_certified() {
        // exact retrace: the trajectory rides the repelling branch and
        // rounding takes it off, while the matrix product stays at I
        let spec = SingularCuspSpec::linear(2.0, 0.2, 0.0, 1.0).unwrap();
        let beta = make_singular_cusp(&spec, 2000).unwrap().reverse_time();
        let sched = LambdaSchedule::new(alloc::vec![1.0, 1e3]).unwrap();
        let r = estimate_length(&beta, 4, &sched, 0.0).unwrap();
        let last = r.development_estimates[1];
        assert!(last.integral > 1.0 && !last.integral_consistent, "{last:?}");
        assert!(r.headline_lower.abs() < 1e-9, "{}", r.headline_lower);
    }

    #[test]
    fn rejects_bad_arguments() {
        let l = AngularPath::from_pairs(&[(1.0, 0.0)]).unwrap();
        let sched = LambdaSchedule::default();
        assert!(estimate_length(&l, 3, &sched, 0.0).is_err());
        assert!(estimate_length(&l, 4, &sched, 0.25).is_err());
        let tree = SingularCuspSpec::linear(2.0, 0.2, 0.0, 1.0).unwrap();
        assert!(estimate_singular_cusp(&tree, 100, &sched, &[0.1]).is_err());
    }

    #[test]
    fn singular_cusp_recovers_length() {
        let spec = SingularCuspSpec::linear(2.0, 0.2, 0.0, 0.5).unwrap();
        let sched = LambdaSchedule::new(alloc::vec![10.0, 100.0, 1e3, 1e4]).unwrap();
        let r = estimate_singular_cusp(&spec, 10_000, &sched, &[0.2, 0.1, 0.05]).unwrap();
        let best = r.development_estimates.last().unwrap().integral;
        assert!(best >= 1.8, "{best}");
        assert!(r.cusp_probes.iter().all(|p| p.push_in), "{:?}", r.cusp_probes);
        let bounds: Vec<f64> = r.cusp_probes.iter().map(|p| p.bound).collect();
        assert!(bounds[0] < bounds[1] && bounds[1] < bounds[2], "{bounds:?}");
        assert!(r.certified);
    }
}
