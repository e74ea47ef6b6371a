// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Finite unions of closed intervals with exact measure arithmetic.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A finite union of closed intervals `[lo, hi]`, kept sorted and disjoint.
///
/// Touching or overlapping inputs are merged. Degenerate intervals
/// (`lo == hi`) are kept since they matter for membership, though they
/// carry no measure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct IntervalSet {
    parts: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new([(lo, hi)])
    }

    pub fn new(parts: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in parts {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::param(
                    "interval",
                    alloc::format!("[{lo}, {hi}] is not a finite closed interval"),
                ));
            }
            raw.push((lo, hi));
        }
        Ok(Self::from_unchecked(raw))
    }

    fn from_unchecked(mut raw: Vec<(f64, f64)>) -> Self {
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut parts: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match parts.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => parts.push((lo, hi)),
            }
        }
        Self { parts }
    }

    pub fn parts(&self) -> &[(f64, f64)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.parts.iter().any(|&(lo, hi)| lo <= t && t <= hi)
    }

    /// Measure of the intersection with `[lo, hi]`.
    pub fn overlap(&self, lo: f64, hi: f64) -> f64 {
        self.parts
            .iter()
            .map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
            .sum()
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let (a0, a1) = self.parts[i];
            let (b0, b1) = other.parts[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_unchecked(out)
    }

    pub fn clip(&self, lo: f64, hi: f64) -> Self {
        self.intersect(&Self {
            parts: alloc::vec![(lo, hi)],
        })
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut raw = self.parts.clone();
        raw.extend_from_slice(&other.parts);
        Self::from_unchecked(raw)
    }

    /// Closure of `[lo, hi] \ self`.
    pub fn complement_in(&self, lo: f64, hi: f64) -> Self {
        let mut out = Vec::new();
        let mut cursor = lo;
        for &(a, b) in &self.parts {
            if b < lo || a > hi {
                continue;
            }
            if a > cursor {
                out.push((cursor, a));
            }
            cursor = cursor.max(b);
        }
        if cursor < hi {
            out.push((cursor, hi));
        }
        Self::from_unchecked(out)
    }

    /// Measure of `self \ other`.
    pub fn measure_minus(&self, other: &Self) -> f64 {
        (self.measure() - self.intersect(other).measure()).max(0.0)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.parts.iter().all(|&(lo, hi)| {
            other
                .parts
                .iter()
                .any(|&(a, b)| a <= lo && hi <= b)
        })
    }
}

impl TryFrom<Vec<[f64; 2]>> for IntervalSet {
    type Error = Error;

    fn try_from(value: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(value.into_iter().map(|[lo, hi]| (lo, hi)))
    }
}

impl From<IntervalSet> for Vec<[f64; 2]> {
    fn from(value: IntervalSet) -> Self {
        value.parts.into_iter().map(|(lo, hi)| [lo, hi]).collect()
    }
}
