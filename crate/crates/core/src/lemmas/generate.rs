// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded instance generators. Every instance satisfies its lemma's
//! hypotheses by construction, up to rare rounding at the boundaries,
//! which the checks report as skips.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{checks::c1_threshold, continuity_radius, LemmaHypothesis, LemmaId, LemmaParams};
use crate::{
    intervals::IntervalSet,
    math::PI,
    path::{make_singular_cusp, AngularPath, Segment, SingularCuspSpec},
};

const RATES: [f64; 3] = [1.0, 10.0, 100.0];

/// Instance `index` of the suite for `lemma` under `seed`.
pub fn generate(lemma: LemmaId, seed: u64, index: u64) -> LemmaHypothesis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((lemma as u64) << 48) ^ index);
    match lemma {
        LemmaId::RangePhi => range_phi(&mut rng),
        LemmaId::DeviPhi => devi_phi(&mut rng),
        LemmaId::CatTim => cat_tim(&mut rng),
        LemmaId::EntryTime => localized(&mut rng, false),
        LemmaId::BadSet => localized(&mut rng, true),
        LemmaId::Comparison => comparison(&mut rng),
        LemmaId::C1Convergence => c1(&mut rng, false),
        LemmaId::SmallAngleEntry => c1(&mut rng, true),
    }
}

fn build(params: LemmaParams, segments: Vec<Segment>, lambda: f64, two_phi0: f64) -> LemmaHypothesis {
    let path = AngularPath::new(segments).expect("generated durations are positive");
    LemmaHypothesis::new(params, path, lambda, two_phi0 / 2.0).expect("generated rate is valid")
}

fn rate(rng: &mut ChaCha8Rng) -> f64 {
    RATES[rng.random_range(0..RATES.len())]
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    libm::exp(rng.random_range(libm::log(lo)..libm::log(hi)))
}

/// A point of `[lo, hi]`, hitting either endpoint with probability 0.1
/// each.
fn closed_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    match rng.random_range(0..10) {
        0 => lo,
        1 => hi,
        _ => rng.random_range(lo..=hi),
    }
}

/// A point of `(lo, hi)` kept `gap` away from both ends, sometimes close
/// to one of them.
fn open_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64, gap: f64) -> f64 {
    let (lo, hi) = (lo + gap, hi - gap);
    match rng.random_range(0..10) {
        0 => lo + (hi - lo) * 1e-6 * rng.random::<f64>(),
        1 => hi - (hi - lo) * 1e-6 * rng.random::<f64>(),
        _ => rng.random_range(lo..hi),
    }
}

fn range_phi(rng: &mut ChaCha8Rng) -> LemmaHypothesis {
    // a = k/1024 with a + π exact in binary
    let a = rng.random_range(-1100i32..=800) as f64 / 1024.0;
    let b = a + PI;
    let n = rng.random_range(1..=12);
    let segments = (0..n)
        .map(|_| Segment::new(rng.random_range(0.02..1.0), closed_point(rng, a, b)))
        .collect();
    let two_phi0 = open_point(rng, a, b, 1e-9);
    build(LemmaParams::RangePhi { a }, segments, rate(rng), two_phi0)
}

fn devi_phi(rng: &mut ChaCha8Rng) -> LemmaHypothesis {
    let a = rng.random_range(-1.5..1.5);
    let width = rng.random_range(0.05..3.0);
    let b = a + width;
    let lambda = rate(rng);
    let budget = (PI - width) * rng.random_range(0.0..0.9) / (2.0 * lambda);
    let n = rng.random_range(1..=12);
    let bad_count = rng.random_range(0..=n.min(3));
    let mut segments: Vec<Segment> = (0..n)
        .map(|_| Segment::new(rng.random_range(0.02..1.0), closed_point(rng, a, b)))
        .collect();
    if budget > 0.0 && bad_count > 0 {
        let weights: Vec<f64> = (0..bad_count).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in weights {
            let angle = if rng.random_bool(0.5) {
                rng.random_range(b + 1e-6..b + PI)
            } else {
                rng.random_range(a - PI..a - 1e-6)
            };
            let at = rng.random_range(0..=segments.len());
            segments.insert(at, Segment::new(budget * w / total, angle));
        }
    }
    let two_phi0 = closed_point(rng, a, b);
    build(LemmaParams::DeviPhi { a, b }, segments, lambda, two_phi0)
}

fn cat_tim(rng: &mut ChaCha8Rng) -> LemmaHypothesis {
    let a = rng.random_range(-1.0..1.0);
    let width = rng.random_range(0.2..3.0);
    let b = a + width;
    let epsilon = rng.random_range(0.01..(0.95 * (PI - width)).min(0.45 * width));
    let (lo, hi) = (a + epsilon, b - epsilon);
    let x = lo + (hi - lo) * rng.random_range(0.01..0.99);
    let y = lo + (hi - lo) * rng.random_range(0.01..0.99);
    let (c, d) = if x <= y { (x, y) } else { (y, x) };
    let n = rng.random_range(1..=15);
    let segments = (0..n)
        .map(|_| {
            let angle = if rng.random_bool(0.75) {
                rng.random_range(c..=d)
            } else {
                closed_point(rng, a, b)
            };
            Segment::new(rng.random_range(0.01..0.5), angle)
        })
        .collect();
    let below = (c - epsilon) - a;
    let above = b - (d + epsilon);
    let two_phi0 = if rng.random_range(0.0..below + above) < below {
        open_point(rng, a, c - epsilon, 1e-9)
    } else {
        open_point(rng, d + epsilon, b, 1e-9)
    };
    let params = LemmaParams::CatTim { a, b, c, d, epsilon };
    build(params, segments, log_uniform(rng, 1.0, 1000.0), two_phi0)
}

/// A path made of good pieces (in F₂), bursts (in F₁ \ F₂) and gaps
/// (outside F₁). Good pieces are staircases with steps below ε/3 that
/// continue where the previous good piece stopped.
fn localized(rng: &mut ChaCha8Rng, bad_set: bool) -> LemmaHypothesis {
    let a = rng.random_range(-1100i32..=800) as f64 / 1024.0;
    let b = a + PI;
    let a_delta = a + rng.random_range(0.15..0.6);
    let b_delta = b - rng.random_range(0.15..0.6);
    let cap = (a_delta - a).min(b - b_delta).min(PI / 3.0);
    let epsilon = cap * rng.random_range(0.2..0.95);
    let m = rng.random_range(5.0..100.0);
    // bursts stay within the budget that keeps 3ε + 2Mη/(ε sin ε) < π
    let eta_cap = 0.9 * (PI - 3.0 * epsilon) * epsilon * libm::sin(epsilon) / (2.0 * m);

    let pieces = rng.random_range(1..=8);
    let mut segments = Vec::new();
    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    let mut t = 0.0;
    let mut level = rng.random_range(a_delta..=b_delta);
    let step = epsilon / 3.0;
    for p in 0..pieces {
        let kind = if p == 0 { 0 } else { rng.random_range(0..10) };
        match kind {
            0..=7 => {
                let steps = rng.random_range(1..=6);
                let start = t;
                for _ in 0..steps {
                    level = (level + rng.random_range(-step..step)).clamp(a_delta, b_delta);
                    let dt = rng.random_range(0.05..0.4);
                    segments.push(Segment::new(dt, level));
                    t += dt;
                }
                f1.push((start, t));
                f2.push((start, t));
            }
            8 => {
                let dt = if bad_set {
                    eta_cap * rng.random_range(0.05..0.3)
                } else {
                    rng.random_range(0.001..0.05)
                };
                segments.push(Segment::new(dt, closed_point(rng, a, b)));
                f1.push((t, t + dt));
                t += dt;
            }
            _ => {
                let dt = rng.random_range(0.001..0.05);
                segments.push(Segment::new(dt, closed_point(rng, a, b)));
                t += dt;
            }
        }
    }
    let f1 = IntervalSet::new(f1).expect("ordered");
    let f2 = IntervalSet::new(f2).expect("ordered");
    let eta = f1.measure_minus(&f2);
    let two_phi0 = open_point(rng, a, b, 1e-6);
    let path = AngularPath::new(segments).expect("positive durations");
    if !bad_set {
        let params = LemmaParams::EntryTime {
            a,
            a_delta,
            b_delta,
            epsilon,
            eta,
            f1,
            f2,
        };
        let lambda = log_uniform(rng, 1.0, 500.0);
        return LemmaHypothesis::new(params, path, lambda, two_phi0 / 2.0).expect("valid rate");
    }
    let length = path.length();
    let delta = f1.complement_in(0.0, length).measure() + rng.random_range(0.001..0.05);
    let sin_e = libm::sin(epsilon);
    let rho = continuity_radius(&path, &f2, epsilon);
    let default_lambda = 10.0 * path.angle_sup_norm() / (rho * sin_e);
    // enough cells that each is shorter than ρ, even with one per component
    let cells = (f1.measure() / rho) + 2.0 * f1.parts().len() as f64;
    let mesh_lambda = cells / (epsilon * sin_e);
    let lambda = default_lambda.max(mesh_lambda).max(1.0) * rng.random_range(1.1..3.0);
    let s = if rng.random_bool(0.5) {
        0.0
    } else {
        rng.random_range(0.0..0.5 * length)
    };
    let params = LemmaParams::BadSet {
        a,
        a_delta,
        b_delta,
        epsilon,
        eta,
        delta,
        m,
        big_lambda: None,
        s,
        f1,
        f2,
    };
    LemmaHypothesis::new(params, path, lambda, two_phi0 / 2.0).expect("valid rate")
}

fn comparison(rng: &mut ChaCha8Rng) -> LemmaHypothesis {
    let length = rng.random_range(1.0..3.0);
    let r = rng.random_range(0.05..0.7);
    let a = rng.random_range(-1.0..1.0);
    let c = rng.random_range(0.05..0.99);
    let resolution = rng.random_range(50..=400);
    let spec = SingularCuspSpec::linear(length, r, a, c).expect("parameters in range");
    let path = make_singular_cusp(&spec, resolution).expect("resolution ≥ 2");
    let two_phi0 = path.segments()[0].angle;
    let params = LemmaParams::Comparison {
        spec,
        resolution,
        samples: 1000,
    };
    LemmaHypothesis::new(params, path, rate(rng), two_phi0 / 2.0).expect("valid rate")
}

/// A staircase of `A sin(ωt + p) + B` sampled at step midpoints.
fn c1(rng: &mut ChaCha8Rng, far_start: bool) -> LemmaHypothesis {
    let length = rng.random_range(1.0..4.0);
    let amp = rng.random_range(0.1..1.5);
    let freq = rng.random_range(0.3..3.0);
    let phase = rng.random_range(0.0..PI);
    let offset = rng.random_range(-1.0..1.0);
    let steps = rng.random_range(300..=1000);
    let grid = length / steps as f64;
    let segments: Vec<Segment> = (0..steps)
        .map(|k| {
            let t = (k as f64 + 0.5) * grid;
            Segment::new(grid, amp * libm::sin(freq * t + phase) + offset)
        })
        .collect();
    let path = AngularPath::new(segments).expect("positive durations");
    let lipschitz = amp * freq;
    let epsilon = rng.random_range(0.05..0.7);
    let alpha0 = path.segments()[0].angle;
    let lambda1 = c1_threshold(&path, epsilon, lipschitz);
    if !far_start {
        let params = LemmaParams::C1Convergence {
            epsilon,
            lipschitz,
            grid,
        };
        return LemmaHypothesis::new(params, path, 2.0 * lambda1, alpha0 / 2.0).expect("valid rate");
    }
    let kappa = rng.random_range(0.1..3.1);
    let t0 = rng.random_range(0.1..0.5) * length;
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let two_phi0 = alpha0 + sign * kappa * rng.random_range(0.0..=1.0);
    // λ = 2·max(Λ₁, Λ₂) with the δ the check derives from α
    let kappa_mid = 0.5 * (kappa + PI);
    let mut delta = 0.0;
    for seg in path.segments() {
        if (seg.angle - alpha0).abs() >= kappa_mid - kappa {
            break;
        }
        delta += seg.duration;
    }
    let delta = delta.min(0.999 * t0).max(grid);
    let lambda2 = (2.0 * path.angle_sup_norm() + kappa) / (2.0 * delta * libm::sin(epsilon));
    let params = LemmaParams::SmallAngleEntry {
        epsilon,
        lipschitz,
        grid,
        kappa,
        t0,
    };
    let lambda = 2.0 * lambda1.max(lambda2);
    LemmaHypothesis::new(params, path, lambda, two_phi0 / 2.0).expect("valid rate")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemmas::{verify, SuiteSummary, VerdictStatus, DEFAULT_SEED};

    fn suite(id: LemmaId, count: u64) -> SuiteSummary {
        let verdicts: Vec<_> = (0..count)
            .map(|i| {
                let h = generate(id, DEFAULT_SEED, i);
                let v = verify(&h);
                assert_ne!(v.status, VerdictStatus::Fail, "{id} #{i}: {v:?}");
                v
            })
            .collect();
        SuiteSummary::of(id, &verdicts)
    }

    #[test]
    fn every_generator_produces_mostly_accepted_instances() {
        for id in LemmaId::ALL {
            let s = suite(id, 60);
            assert!(s.pass >= 45, "{id}: {s:?}");
        }
    }

    #[test]
    fn streams_differ_across_indices_and_lemmas() {
        let a = generate(LemmaId::RangePhi, DEFAULT_SEED, 0);
        let b = generate(LemmaId::RangePhi, DEFAULT_SEED, 1);
        assert_ne!(a, b);
        let c = generate(LemmaId::RangePhi, DEFAULT_SEED + 1, 0);
        assert_ne!(a, c);
    }
}
