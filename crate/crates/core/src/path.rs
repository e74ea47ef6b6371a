// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Unit-speed planar paths described by a piecewise-constant direction angle.

use alloc::{format, vec::Vec};

use serde::{Deserialize, Serialize};

use crate::{
    intervals::IntervalSet,
    math::{PI, TAU},
    Error, Result,
};

/// One constant-direction piece of an [`AngularPath`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub angle: f64,
}

impl Segment {
    pub fn new(duration: f64, angle: f64) -> Self {
        Self { duration, angle }
    }

    pub fn displacement(&self) -> [f64; 2] {
        let (s, c) = libm::sincos(self.angle);
        [self.duration * c, self.duration * s]
    }
}

/// A piecewise-constant angle function on `[0, L]`.
///
/// Angles are stored as given, without reduction modulo 2π, so interval
/// hypotheses such as `angle ∈ [a, a + π]` read literally. Whether the
/// angles describe the forward direction β or its time reversal α is up to
/// the caller; [`AngularPath::reverse_time`] converts between the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct AngularPath {
    segments: Vec<Segment>,
    length: f64,
}

impl AngularPath {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyPath);
        }
        let mut length = 0.0;
        for (index, seg) in segments.iter().enumerate() {
            if !(seg.duration > 0.0 && seg.duration.is_finite()) {
                return Err(Error::BadDuration {
                    index,
                    value: seg.duration,
                });
            }
            if !seg.angle.is_finite() {
                return Err(Error::BadAngle {
                    index,
                    value: seg.angle,
                });
            }
            length += seg.duration;
        }
        Ok(Self { segments, length })
    }

    /// Builds a path from `(duration, angle)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(d, a)| Segment::new(d, a)).collect())
    }

    /// Direction angles of a polyline, unwrapped so that consecutive angles
    /// differ by at most π.
    pub fn from_vertices(vertices: &[[f64; 2]]) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::EmptyPath);
        }
        let mut segments = Vec::with_capacity(vertices.len() - 1);
        let mut prev: Option<f64> = None;
        for (index, w) in vertices.windows(2).enumerate() {
            let dx = w[1][0] - w[0][0];
            let dy = w[1][1] - w[0][1];
            let duration = libm::hypot(dx, dy);
            if !(duration > 0.0 && duration.is_finite()) {
                return Err(Error::BadDuration {
                    index,
                    value: duration,
                });
            }
            let mut angle = libm::atan2(dy, dx);
            if let Some(p) = prev {
                angle += TAU * libm::round((p - angle) / TAU);
                if angle - p > PI {
                    angle -= TAU;
                } else if p - angle > PI {
                    angle += TAU;
                }
            }
            prev = Some(angle);
            segments.push(Segment::new(duration, angle));
        }
        Self::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Total length, summed left to right.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Start time of every segment.
    pub fn start_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration;
                start
            })
            .collect()
    }

    /// `α_t = β_{L−t}`: segment order reversed, angles untouched.
    pub fn reverse_time(&self) -> Self {
        let mut segments = self.segments.clone();
        segments.reverse();
        Self::new(segments).expect("reversal preserves validity")
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        Self::new(segments).expect("concatenation preserves validity")
    }

    /// The sub-path on `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= self.length) {
            return Err(Error::param(
                "window",
                format!("[{lo}, {hi}] is not a nondegenerate part of [0, {}]", self.length),
            ));
        }
        let mut out = Vec::new();
        let mut t: f64 = 0.0;
        for seg in &self.segments {
            let a = t.max(lo);
            let b = (t + seg.duration).min(hi);
            if b > a {
                out.push(Segment::new(b - a, seg.angle));
            }
            t += seg.duration;
        }
        Self::new(out)
    }

    /// Index of the segment containing `t`; right-continuous except at `L`.
    pub fn segment_index_at(&self, t: f64) -> usize {
        let mut acc = 0.0;
        for (i, seg) in self.segments.iter().enumerate() {
            acc += seg.duration;
            if t < acc {
                return i;
            }
        }
        self.segments.len() - 1
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        self.segments[self.segment_index_at(t)].angle
    }

    pub fn angle_sup_norm(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.angle.abs())
            .fold(0.0, f64::max)
    }

    /// Time set where the angle satisfies `pred`, as an exact interval union.
    pub fn time_set(&self, mut pred: impl FnMut(f64) -> bool) -> IntervalSet {
        let mut parts = Vec::new();
        let mut t = 0.0;
        for seg in &self.segments {
            if pred(seg.angle) {
                parts.push((t, t + seg.duration));
            }
            t += seg.duration;
        }
        IntervalSet::new(parts).expect("segment times are ordered")
    }

    /// Measure of the times where the angle satisfies `pred`.
    pub fn measure_where(&self, mut pred: impl FnMut(f64) -> bool) -> f64 {
        self.segments
            .iter()
            .filter(|s| pred(s.angle))
            .map(|s| s.duration)
            .sum()
    }

    /// Smallest and largest angle over segments meeting `set` in positive
    /// measure.
    pub fn angle_range_on(&self, set: &IntervalSet) -> Option<(f64, f64)> {
        let mut t = 0.0;
        let mut range: Option<(f64, f64)> = None;
        for seg in &self.segments {
            if set.overlap(t, t + seg.duration) > 0.0 {
                range = Some(match range {
                    None => (seg.angle, seg.angle),
                    Some((lo, hi)) => (lo.min(seg.angle), hi.max(seg.angle)),
                });
            }
            t += seg.duration;
        }
        range
    }
}

impl TryFrom<Vec<Segment>> for AngularPath {
    type Error = Error;

    fn try_from(value: Vec<Segment>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<AngularPath> for Vec<Segment> {
    fn from(value: AngularPath) -> Self {
        value.segments
    }
}

/// Vertices of the realized polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarPath {
    pub vertices: Vec<[f64; 2]>,
}

impl PlanarPath {
    pub fn length(&self) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| libm::hypot(w[1][0] - w[0][0], w[1][1] - w[0][1]))
            .sum()
    }

    pub fn displacement(&self) -> [f64; 2] {
        let first = self.vertices[0];
        let last = self.vertices[self.vertices.len() - 1];
        [last[0] - first[0], last[1] - first[1]]
    }
}

/// Integrates the angle function from the origin.
pub fn realize(path: &AngularPath) -> PlanarPath {
    let mut vertices = Vec::with_capacity(path.len() + 1);
    let (mut x, mut y) = (0.0, 0.0);
    vertices.push([x, y]);
    for seg in path.segments() {
        let [dx, dy] = seg.displacement();
        x += dx;
        y += dy;
        vertices.push([x, y]);
    }
    PlanarPath { vertices }
}

/// A regular-cusp witness for one value of δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspWitness {
    pub delta: f64,
    /// The good set `F`: a closed subset of `[0, L]` with complement
    /// measure below `delta`.
    pub good_set: IntervalSet,
    pub a_delta: f64,
    pub b_delta: f64,
}

/// Claimed regular-cusp structure: angles in `[a, a + π]`, and on each
/// witness set strictly inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularCuspHypothesis {
    pub a: f64,
    pub witnesses: Vec<CuspWitness>,
}

impl RegularCuspHypothesis {
    /// The witness to use for `delta`: the one with the largest own δ not
    /// exceeding `delta`.
    pub fn witness_for(&self, delta: f64) -> Option<&CuspWitness> {
        self.witnesses
            .iter()
            .filter(|w| w.delta <= delta)
            .max_by(|x, y| x.delta.total_cmp(&y.delta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CuspViolationKind {
    /// Witness itself is malformed: `a_δ ≤ a`, `b_δ ≥ a + π`, or the
    /// complement of `F` is too large.
    InvalidWitness,
    /// A segment angle lies outside `[a, a + π]`.
    OutsideRange,
    /// A segment meeting `F` has angle outside `[a_δ, b_δ]`.
    OutsideWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CuspCheck {
    Pass,
    Fail {
        kind: CuspViolationKind,
        segment: Option<usize>,
    },
}

impl CuspCheck {
    pub fn is_pass(&self) -> bool {
        matches!(self, CuspCheck::Pass)
    }
}

/// Checks the regular-cusp conditions for one δ against its witness.
pub fn check_regular_cusp(
    path: &AngularPath,
    hyp: &RegularCuspHypothesis,
    delta: f64,
) -> Result<CuspCheck> {
    let w = hyp
        .witness_for(delta)
        .ok_or(Error::MissingWitness { delta })?;
    let top = hyp.a + PI;
    let bad_measure = w.good_set.complement_in(0.0, path.length()).measure();
    if !(w.a_delta > hyp.a && w.b_delta < top && bad_measure < delta) {
        return Ok(CuspCheck::Fail {
            kind: CuspViolationKind::InvalidWitness,
            segment: None,
        });
    }
    let mut t = 0.0;
    for (i, seg) in path.segments().iter().enumerate() {
        if !(hyp.a <= seg.angle && seg.angle <= top) {
            return Ok(CuspCheck::Fail {
                kind: CuspViolationKind::OutsideRange,
                segment: Some(i),
            });
        }
        let on_good = w.good_set.overlap(t, t + seg.duration) > 0.0;
        if on_good && !(w.a_delta <= seg.angle && seg.angle <= w.b_delta) {
            return Ok(CuspCheck::Fail {
                kind: CuspViolationKind::OutsideWindow,
                segment: Some(i),
            });
        }
        t += seg.duration;
    }
    Ok(CuspCheck::Pass)
}

/// Strictly increasing piecewise-linear map given by knots `(t, value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaTable {
    knots: Vec<(f64, f64)>,
}

impl ThetaTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::param("theta", "needs at least two knots"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::param(
                    "theta",
                    format!("knots must be strictly increasing, got {:?} then {:?}", w[0], w[1]),
                ));
            }
        }
        if knots.iter().any(|(t, v)| !(t.is_finite() && v.is_finite())) {
            return Err(Error::param("theta", "knots must be finite"));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|&(s, _)| s <= t).clamp(1, k.len() - 1);
        let (t0, v0) = k[i - 1];
        let (t1, v1) = k[i];
        v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
    }
}

/// Parameters of the singular cusp family.
///
/// The first half follows θ from `a − r` up to `a`, then the direction
/// flips by π and retraces θ backwards at relative angular speed `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularCuspSpec {
    pub length: f64,
    pub r: f64,
    pub a: f64,
    pub c: f64,
    pub theta: ThetaTable,
}

impl SingularCuspSpec {
    /// θ linear from `a − r` at 0 to `a` at `L/2`.
    pub fn linear(length: f64, r: f64, a: f64, c: f64) -> Result<Self> {
        let theta = ThetaTable::new(alloc::vec![(0.0, a - r), (length / 2.0, a)])?;
        let spec = Self {
            length,
            r,
            a,
            c,
            theta,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Accepts `c = 1` as the tree-like limit of the family.
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::param("length", "must be positive"));
        }
        if !(self.r > 0.0 && self.r < PI / 4.0) {
            return Err(Error::param("r", "must lie in (0, π/4)"));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::param("c", "must lie in (0, 1]"));
        }
        if !self.a.is_finite() {
            return Err(Error::param("a", "must be finite"));
        }
        let knots = self.theta.knots();
        let (t_first, v_first) = knots[0];
        let (t_last, v_last) = knots[knots.len() - 1];
        let scale = 1e-12 * (1.0 + self.a.abs());
        if t_first != 0.0 || (t_last - self.length / 2.0).abs() > 1e-12 * self.length {
            return Err(Error::param("theta", "knots must span [0, L/2]"));
        }
        if (v_first - (self.a - self.r)).abs() > scale || (v_last - self.a).abs() > scale {
            return Err(Error::param("theta", "must run from a − r to a"));
        }
        Ok(())
    }

    /// θ with its endpoint values pinned exactly.
    pub fn theta_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            self.a - self.r
        } else if t >= self.length / 2.0 {
            self.a
        } else {
            self.theta.eval(t)
        }
    }

    /// The driving angle α at time `t` on the second half.
    pub fn retrace_angle(&self, t: f64) -> f64 {
        self.c * (self.theta_at(self.length - t) - self.a) + (self.a - PI)
    }
}

/// Samples the singular cusp α at segment midpoints, `resolution` equal
/// segments per half.
pub fn make_singular_cusp(spec: &SingularCuspSpec, resolution: usize) -> Result<AngularPath> {
    spec.validate()?;
    if resolution < 2 {
        return Err(Error::param("resolution", "needs at least 2 samples per half"));
    }
    let half = spec.length / 2.0;
    let h = half / resolution as f64;
    let mut segments = Vec::with_capacity(2 * resolution);
    for j in 0..resolution {
        let t = (j as f64 + 0.5) * h;
        segments.push(Segment::new(h, spec.theta_at(t)));
    }
    for j in 0..resolution {
        let t = half + (j as f64 + 0.5) * h;
        segments.push(Segment::new(h, spec.retrace_angle(t)));
    }
    AngularPath::new(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn realize_examples() {
        let line = AngularPath::from_pairs(&[(1.0, 0.0)]).unwrap();
        assert_eq!(realize(&line).vertices, [[0.0, 0.0], [1.0, 0.0]]);

        let l = AngularPath::from_pairs(&[(1.0, 0.0), (1.0, FRAC_PI_2)]).unwrap();
        let v = realize(&l).vertices;
        assert!(close(v[2][0], 1.0, 1e-15) && close(v[2][1], 1.0, 1e-15));

        let tree = AngularPath::from_pairs(&[(1.0, 0.0), (1.0, PI)]).unwrap();
        let v = realize(&tree).vertices;
        assert!(close(v[2][0], 0.0, 1e-15) && close(v[2][1], 0.0, 1e-15));
    }

    #[test]
    fn construction_rejects_bad_segments() {
        assert_eq!(AngularPath::new(Vec::new()), Err(Error::EmptyPath));
        assert!(matches!(
            AngularPath::from_pairs(&[(1.0, 0.0), (0.0, 1.0)]),
            Err(Error::BadDuration { index: 1, .. })
        ));
        assert!(matches!(
            AngularPath::from_pairs(&[(1.0, f64::NAN)]),
            Err(Error::BadAngle { index: 0, .. })
        ));
    }

    #[test]
    fn reverse_examples() {
        let p = AngularPath::from_pairs(&[(1.0, 0.0), (2.0, 1.0)]).unwrap();
        let r = p.reverse_time();
        assert_eq!(r.segments(), &[Segment::new(2.0, 1.0), Segment::new(1.0, 0.0)]);
        assert_eq!(r.reverse_time(), p);
    }

    #[test]
    fn restrict_and_lookup() {
        let p = AngularPath::from_pairs(&[(1.0, 0.0), (2.0, 1.0), (1.0, 2.0)]).unwrap();
        let sub = p.restrict(0.5, 3.5).unwrap();
        assert_eq!(
            sub.segments(),
            &[Segment::new(0.5, 0.0), Segment::new(2.0, 1.0), Segment::new(0.5, 2.0)]
        );
        assert_eq!(p.angle_at(1.0), 1.0);
        assert_eq!(p.angle_at(4.0), 2.0);
        assert_eq!(p.start_times(), [0.0, 1.0, 3.0]);
        assert!(p.restrict(2.0, 2.0).is_err());
    }

    #[test]
    fn vertices_roundtrip() {
        let p = AngularPath::from_pairs(&[(1.0, 3.0), (0.5, -3.0), (2.0, 0.25)]).unwrap();
        let q = AngularPath::from_vertices(&realize(&p).vertices).unwrap();
        for (a, b) in p.segments().iter().zip(q.segments()) {
            assert!(close(a.duration, b.duration, 1e-14));
        }
        // -3.0 unwraps next to 3.0
        assert!(close(q.segments()[1].angle, TAU - 3.0, 1e-14));
    }

    #[test]
    fn singular_cusp_midpoints() {
        let spec = SingularCuspSpec::linear(2.0, 0.5, 0.0, 1.0).unwrap();
        let p = make_singular_cusp(&spec, 2).unwrap();
        let got: Vec<f64> = p.segments().iter().map(|s| s.angle).collect();
        let want = [-0.375, -0.125, -PI - 0.125, -PI - 0.375];
        for (g, w) in got.iter().zip(want) {
            assert!(close(*g, w, 1e-15), "{got:?}");
        }
        assert!(make_singular_cusp(&spec, 1).is_err());
    }

    #[test]
    fn singular_cusp_flip_is_pi() {
        for c in [0.25, 0.5, 0.99] {
            let spec = SingularCuspSpec::linear(2.0, 0.2, 0.3, c).unwrap();
            assert!(close(spec.theta_at(1.0) - spec.retrace_angle(1.0), PI, 1e-15));
        }
    }

    #[test]
    fn singular_cusp_rejects_bad_spec() {
        assert!(SingularCuspSpec::linear(2.0, 0.9, 0.0, 0.5).is_err());
        assert!(SingularCuspSpec::linear(2.0, 0.2, 0.0, 0.0).is_err());
        assert!(SingularCuspSpec::linear(2.0, 0.2, 0.0, 1.5).is_err());
        let bad = ThetaTable::new(alloc::vec![(0.0, 0.0), (1.0, 0.0)]);
        assert!(bad.is_err());
    }

    #[test]
    fn tree_like_cusp_returns_home() {
        let spec = SingularCuspSpec::linear(2.0, 0.5, 0.0, 1.0).unwrap();
        let res = 1000;
        let p = make_singular_cusp(&spec, res).unwrap();
        let [dx, dy] = realize(&p).displacement();
        assert!(libm::hypot(dx, dy) <= 2.0 / res as f64);
    }

    #[test]
    fn regular_cusp_examples() {
        let l = AngularPath::from_pairs(&[(1.0, 0.0), (1.0, FRAC_PI_2)]).unwrap();
        let hyp = RegularCuspHypothesis {
            a: -PI / 4.0,
            witnesses: alloc::vec![CuspWitness {
                delta: 0.01,
                good_set: IntervalSet::interval(0.0, 2.0).unwrap(),
                a_delta: -0.1,
                b_delta: FRAC_PI_2 + 0.1,
            }],
        };
        assert_eq!(check_regular_cusp(&l, &hyp, 0.01), Ok(CuspCheck::Pass));
        assert_eq!(
            check_regular_cusp(&l, &hyp, 0.001),
            Err(Error::MissingWitness { delta: 0.001 })
        );

        let bent = AngularPath::from_pairs(&[(1.0, 0.0), (1.0, -PI / 4.0 + 1.5 * PI)]).unwrap();
        assert_eq!(
            check_regular_cusp(&bent, &hyp, 0.01),
            Ok(CuspCheck::Fail {
                kind: CuspViolationKind::OutsideRange,
                segment: Some(1),
            })
        );
    }
}
